//! Random small stores: action units over oracle leaves, contexts with random leaf states.
#![allow(dead_code)]

use std::collections::BTreeMap;

use aku_core::condition::{ApplicabilityConditionSet, ConditionItem, ConditionKind};
use aku_core::fixtures::{self, id};
use aku_core::unit::UnitMeta;
use aku_core::{ActionClass, ActionUnit, ConditionExpr, EntityKind, EvidenceUnit, Outcome, Quality, SlotSpec, UnitStore};
use proptest::prelude::*;

use super::kleene;

#[derive(Debug, Clone)]
pub struct RandomStore {
    pub conditions: Vec<Vec<ConditionExpr>>,
    pub contexts: Vec<(Vec<kleene::State>, Vec<Quality>)>,
    pub evidence: Vec<(usize, usize, bool)>,
}

pub fn random_store() -> impl Strategy<Value = RandomStore> {
    let leaves = kleene::leaf_exprs(4);
    let leaf = (0..4usize).prop_map(move |i| leaves[i].clone());
    let expr = leaf.prop_recursive(3, 10, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| ConditionExpr::and(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| ConditionExpr::or(l, r)),
            inner.prop_map(ConditionExpr::negate),
        ]
    });
    let quality = prop_oneof![Just(Quality::Observed), Just(Quality::Assumed)];
    let context = (
        prop::collection::vec(prop::sample::select(kleene::STATES.to_vec()), 4),
        prop::collection::vec(quality, 4),
    );
    // two shared units plus two per action unit, plus evidence: at most 20 units besides contexts
    (1usize..=7, 0usize..=10).prop_flat_map(move |(n_au, n_ctx)| {
        (
            prop::collection::vec(prop::collection::vec(expr.clone(), 1..4), n_au),
            prop::collection::vec(context.clone(), n_ctx),
            prop::collection::vec((0..n_au, 0..n_ctx.max(1), any::<bool>()), 0..=4),
        )
            .prop_map(|(conditions, contexts, evidence)| RandomStore { conditions, contexts, evidence })
    })
}

pub fn build(spec: &RandomStore) -> UnitStore {
    let fixture = fixtures::fixture_store();
    let mut store = UnitStore::new();
    let plan = fixture.plan(&id("ex:mangrove-plan")).unwrap().clone();
    let objective = fixture.objective(&id("ex:mangrove-objective")).unwrap().clone();
    store.put_unit(plan.clone()).unwrap();
    store.put_unit(objective.clone()).unwrap();
    for (i, exprs) in spec.conditions.iter().enumerate() {
        let items = exprs
            .iter()
            .enumerate()
            .map(|(j, e)| ConditionItem::new(ConditionKind::Contextual, &format!("c{j}"), &e.to_string()))
            .collect();
        let set = format!("ex:set-{i}");
        store
            .put_unit(ApplicabilityConditionSet::new(UnitMeta::new(id(&set), "set"), items))
            .unwrap();
        let mut au = ActionUnit::new(
            UnitMeta::new(id(&format!("ex:au-{i}")), "random unit"),
            ActionClass::Intervention,
            plan.base.id.clone(),
            id(&set),
            objective.base.id.clone(),
        );
        au.inputs = vec![SlotSpec::input("site", EntityKind::Material)];
        au.outputs = vec![SlotSpec::output("site_after", EntityKind::Material)];
        store.put_unit(au).unwrap();
    }
    for (i, (states, qualities)) in spec.contexts.iter().enumerate() {
        let mut ctx = kleene::context_for(states);
        ctx.base.id = id(&format!("ex:ctx-{i}"));
        for a in &mut ctx.assertions {
            let k: usize = a.attribute[1..].parse().unwrap();
            a.quality = qualities[k];
        }
        store.put_unit(ctx).unwrap();
    }
    if !spec.contexts.is_empty() {
        for (au, ctx, success) in &spec.evidence {
            let outcome = if *success { Outcome::Success } else { Outcome::Failure };
            let e = EvidenceUnit {
                base: UnitMeta::new(store.next_id("ex:evidence-"), "field report"),
                action_unit: id(&format!("ex:au-{au}")),
                context: id(&format!("ex:ctx-{ctx}")),
                outcome,
                metrics: BTreeMap::new(),
                recorded_at: fixtures::surveyed_at(),
            };
            store.put_unit(e).unwrap();
        }
    }
    store
}

