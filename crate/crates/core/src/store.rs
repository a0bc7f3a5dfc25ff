//! Identity-keyed store of semantic units.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::action::{ActionUnit, EvidenceUnit, ObjectiveUnit, PlanSpecUnit};
use crate::condition::ApplicabilityConditionSet;
use crate::error::{Error, Result};
use crate::id::UnitId;
use crate::orchestrate::ExecutionRecord;
use crate::schema::StatementSchema;
use crate::unit::{
    is_valid_attribute, is_valid_subject, Assertion, ContextUnit, Frame, StatementClass, StatementUnit, Unit,
    UnitKind,
};

/// Optional filters for [`UnitStore::list_units`]; unset fields match everything.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitFilter {
    #[serde(default)]
    pub kind: Option<UnitKind>,
    #[serde(default)]
    pub statement_class: Option<StatementClass>,
    #[serde(default)]
    pub frame: Option<Frame>,
}

impl UnitFilter {
    pub fn kind(kind: UnitKind) -> Self {
        UnitFilter {
            kind: Some(kind),
            ..Default::default()
        }
    }

    fn matches(&self, unit: &Unit) -> bool {
        if let Some(kind) = self.kind {
            if unit.kind() != kind {
                return false;
            }
        }
        if let Some(class) = self.statement_class {
            match unit {
                Unit::Statement(s) if s.statement_class == class => {}
                _ => return false,
            }
        }
        if let Some(frame) = self.frame {
            match unit {
                Unit::Context(c) if c.frame == frame => {}
                _ => return false,
            }
        }
        true
    }
}

/// Units keyed by id. Clones are cheap enough to serve as evaluation snapshots.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UnitStore {
    units: BTreeMap<UnitId, Unit>,
}

macro_rules! typed_getter {
    ($name:ident, $variant:ident, $ty:ty, $kind:expr) => {
        pub fn $name(&self, id: &UnitId) -> Result<&$ty> {
            match self.get_unit(id)? {
                Unit::$variant(u) => Ok(u),
                other => Err(Error::WrongKind {
                    id: id.clone(),
                    expected: $kind,
                    found: other.kind(),
                }),
            }
        }
    };
}

impl UnitStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn contains(&self, id: &UnitId) -> bool {
        self.units.contains_key(id)
    }

    /// Units in id order.
    pub fn iter(&self) -> impl Iterator<Item = &Unit> {
        self.units.values()
    }

    pub fn put_unit(&mut self, unit: impl Into<Unit>) -> Result<UnitId> {
        let mut ids = self.put_units(vec![unit.into()])?;
        Ok(ids.remove(0))
    }

    /// Inserts a batch atomically: references may resolve to other members of the batch.
    ///
    /// Re-putting a unit identical to the stored one is a no-op.
    pub fn put_units(&mut self, units: Vec<Unit>) -> Result<Vec<UnitId>> {
        let mut fresh: BTreeMap<UnitId, Unit> = BTreeMap::new();
        let mut ids = Vec::with_capacity(units.len());
        for unit in units {
            check_unit_local(&unit)?;
            let id = unit.id().clone();
            ids.push(id.clone());
            if let Some(existing) = self.units.get(&id).or_else(|| fresh.get(&id)) {
                if *existing == unit {
                    continue;
                }
                return Err(Error::DuplicateIdConflict(id));
            }
            fresh.insert(id, unit);
        }

        for unit in fresh.values() {
            for target in unit.references() {
                if !self.units.contains_key(&target) && !fresh.contains_key(&target) {
                    return Err(Error::DanglingReference {
                        from: unit.id().clone(),
                        to: target,
                    });
                }
            }
        }

        // The stored part-of graph is acyclic, so any new cycle must pass through a fresh unit.
        let parts_of = |id: &UnitId| -> Option<&Vec<UnitId>> {
            fresh
                .get(id)
                .or_else(|| self.units.get(id))
                .map(|u| &u.meta().parts)
        };
        for start in fresh.keys() {
            if reaches(start, start, &parts_of) {
                return Err(Error::PartCycle(start.clone()));
            }
        }

        self.units.extend(fresh);
        Ok(ids)
    }

    /// Overwrites a unit of the same id and kind. Used for records that evolve in place
    /// (contexts gaining assertions, execution records advancing).
    pub(crate) fn replace_unit(&mut self, unit: Unit) -> Result<()> {
        check_unit_local(&unit)?;
        let id = unit.id().clone();
        let existing = self.get_unit(&id)?;
        if existing.kind() != unit.kind() {
            return Err(Error::WrongKind {
                id,
                expected: existing.kind(),
                found: unit.kind(),
            });
        }
        if existing.meta().parts != unit.meta().parts {
            return Err(Error::Invalid(format!("parts of {id} cannot change in place")));
        }
        for target in unit.references() {
            if !self.units.contains_key(&target) {
                return Err(Error::DanglingReference { from: id, to: target });
            }
        }
        self.units.insert(id, unit);
        Ok(())
    }

    pub fn get_unit(&self, id: &UnitId) -> Result<&Unit> {
        self.units.get(id).ok_or_else(|| Error::NotFound(id.clone()))
    }

    typed_getter!(statement, Statement, StatementUnit, UnitKind::Statement);
    typed_getter!(context, Context, ContextUnit, UnitKind::Context);
    typed_getter!(schema, Schema, StatementSchema, UnitKind::Schema);
    typed_getter!(action, Action, ActionUnit, UnitKind::Action);
    typed_getter!(objective, Objective, ObjectiveUnit, UnitKind::Objective);
    typed_getter!(plan, Plan, PlanSpecUnit, UnitKind::Plan);
    typed_getter!(condition_set, ConditionSet, ApplicabilityConditionSet, UnitKind::ConditionSet);
    typed_getter!(evidence, Evidence, EvidenceUnit, UnitKind::Evidence);
    typed_getter!(execution, Execution, ExecutionRecord, UnitKind::Execution);

    /// Context that must be a situation frame.
    pub fn situation(&self, id: &UnitId) -> Result<&ContextUnit> {
        let ctx = self.context(id)?;
        if ctx.frame != Frame::Situation {
            return Err(Error::WrongFrame {
                id: id.clone(),
                frame: ctx.frame,
            });
        }
        Ok(ctx)
    }

    /// Matching ids in lexicographic order.
    pub fn list_units(&self, filter: &UnitFilter) -> Vec<UnitId> {
        self.units
            .values()
            .filter(|u| filter.matches(u))
            .map(|u| u.id().clone())
            .collect()
    }

    pub fn action_units(&self) -> impl Iterator<Item = &ActionUnit> {
        self.units.values().filter_map(|u| match u {
            Unit::Action(a) => Some(a),
            _ => None,
        })
    }

    pub fn situation_contexts(&self) -> impl Iterator<Item = &ContextUnit> {
        self.units.values().filter_map(|u| match u {
            Unit::Context(c) if c.frame == Frame::Situation => Some(c),
            _ => None,
        })
    }

    pub fn evidence_units(&self) -> impl Iterator<Item = &EvidenceUnit> {
        self.units.values().filter_map(|u| match u {
            Unit::Evidence(e) => Some(e),
            _ => None,
        })
    }

    pub fn executions(&self) -> impl Iterator<Item = &ExecutionRecord> {
        self.units.values().filter_map(|u| match u {
            Unit::Execution(x) => Some(x),
            _ => None,
        })
    }

    /// Appends an assertion to a situation context. History is kept; the latest timestamp is current.
    pub fn add_assertion(&mut self, context_id: &UnitId, assertion: Assertion) -> Result<()> {
        check_assertion(&assertion)?;
        self.situation(context_id)?;
        match self.units.get_mut(context_id) {
            Some(Unit::Context(ctx)) => {
                ctx.assertions.push(assertion);
                Ok(())
            }
            _ => Err(Error::NotFound(context_id.clone())),
        }
    }

    /// Removes a unit nothing else references. Evidence retraction relies on this.
    pub fn remove_unit(&mut self, id: &UnitId) -> Result<Unit> {
        self.get_unit(id)?;
        if let Some(user) = self
            .units
            .values()
            .find(|u| u.id() != id && u.references().contains(id))
        {
            return Err(Error::Invalid(format!("{id} is still referenced by {}", user.id())));
        }
        Ok(self.units.remove(id).expect("checked above"))
    }

    /// First id of the form `{prefix}{n:04}` not yet taken.
    pub fn next_id(&self, prefix: &str) -> UnitId {
        (1..)
            .map(|n| UnitId::new(format!("{prefix}{n:04}")).expect("prefix forms a valid id"))
            .find(|id| !self.units.contains_key(id))
            .expect("unbounded search")
    }
}

fn reaches<'a, F>(from: &UnitId, target: &UnitId, parts_of: &F) -> bool
where
    F: Fn(&UnitId) -> Option<&'a Vec<UnitId>>,
{
    let mut seen = BTreeSet::new();
    let mut stack: Vec<UnitId> = parts_of(from).cloned().unwrap_or_default();
    while let Some(next) = stack.pop() {
        if &next == target {
            return true;
        }
        if seen.insert(next.clone()) {
            if let Some(parts) = parts_of(&next) {
                stack.extend(parts.iter().cloned());
            }
        }
    }
    false
}

fn check_assertion(a: &Assertion) -> Result<()> {
    if !is_valid_subject(&a.subject) {
        return Err(Error::Invalid(format!("invalid assertion subject {:?}", a.subject)));
    }
    if !is_valid_attribute(&a.attribute) {
        return Err(Error::Invalid(format!("invalid assertion attribute {:?}", a.attribute)));
    }
    if let crate::value::SlotValue::Number { unit, .. } = &a.value {
        if !crate::value::is_valid_unit_token(unit) {
            return Err(Error::Invalid(format!("invalid unit token {unit:?}")));
        }
    }
    Ok(())
}

fn check_unit_local(unit: &Unit) -> Result<()> {
    match unit {
        Unit::Statement(s) => {
            if let Some(c) = s.confidence {
                if !(0.0..=1.0).contains(&c) {
                    return Err(Error::Invalid(format!("confidence of {} outside [0,1]", s.base.id)));
                }
            }
            Ok(())
        }
        Unit::Context(c) => c.assertions.iter().try_for_each(check_assertion),
        Unit::Schema(s) => s.check(),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::id::uid;
    use crate::unit::{CompoundUnit, Quality, UnitMeta};
    use crate::value::SlotValue;
    use chrono::{TimeZone, Utc};

    fn compound(id: &str, parts: &[&str]) -> Unit {
        Unit::Compound(CompoundUnit {
            base: UnitMeta::new(uid(id), id).with_parts(parts.iter().map(|p| uid(p)).collect()),
        })
    }

    fn site(id: &str) -> ContextUnit {
        let t = Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap();
        let mut ctx = ContextUnit::situation(uid(id), id);
        for (attr, v) in [
            ("tidal_inundation_pct", SlotValue::decimal("40", "pct")),
            ("sediment_accretion_mm_per_yr", SlotValue::decimal("2", "mm_per_yr")),
            ("salinity_psu", SlotValue::decimal("28", "psu")),
            ("wave_energy_index", SlotValue::decimal("0.3", "1")),
            ("ongoing_disturbance", SlotValue::Boolean(false)),
        ] {
            ctx.assertions.push(Assertion::new("site", attr, v, Quality::Observed, t));
        }
        ctx
    }

    #[test]
    fn put_and_get_round_trip() {
        let mut store = UnitStore::new();
        let id = store.put_unit(site("ex:site-A")).unwrap();
        assert_eq!(id, uid("ex:site-A"));
        let ctx = store.context(&id).unwrap();
        assert_eq!(ctx.assertions.len(), 5);
    }

    #[test]
    fn get_missing_is_not_found() {
        let store = UnitStore::new();
        assert!(matches!(store.get_unit(&uid("ex:absent")), Err(Error::NotFound(_))));
    }

    #[test]
    fn self_part_is_a_cycle() {
        let mut store = UnitStore::new();
        // a self-reference resolves (the unit is in the batch) but closes a cycle
        let err = store.put_unit(compound("ex:loop", &["ex:loop"])).unwrap_err();
        assert!(matches!(err, Error::PartCycle(_)));
        assert!(store.is_empty());
    }

    #[test]
    fn transitive_cycle_within_batch() {
        let mut store = UnitStore::new();
        let err = store
            .put_units(vec![compound("ex:a", &["ex:b"]), compound("ex:b", &["ex:a"])])
            .unwrap_err();
        assert!(matches!(err, Error::PartCycle(_)));
    }

    #[test]
    fn identical_reput_is_idempotent() {
        let mut store = UnitStore::new();
        store.put_unit(site("ex:site-A")).unwrap();
        let before = store.clone();
        assert_eq!(store.put_unit(site("ex:site-A")).unwrap(), uid("ex:site-A"));
        assert_eq!(store, before);
    }

    #[test]
    fn conflicting_reput_is_rejected() {
        let mut store = UnitStore::new();
        store.put_unit(site("ex:site-A")).unwrap();
        let mut changed = site("ex:site-A");
        changed.base.label = "other".into();
        assert!(matches!(store.put_unit(changed), Err(Error::DuplicateIdConflict(_))));
    }

    #[test]
    fn dangling_part_is_rejected() {
        let mut store = UnitStore::new();
        let err = store.put_unit(compound("ex:a", &["ex:missing"])).unwrap_err();
        assert!(matches!(err, Error::DanglingReference { .. }));
    }

    #[test]
    fn add_assertion_rules() {
        let mut store = UnitStore::new();
        store.put_unit(site("ex:site-A")).unwrap();
        let mut doc = ContextUnit::situation(uid("ex:notes"), "notes");
        doc.frame = Frame::Document;
        store.put_unit(doc).unwrap();

        let t = Utc.with_ymd_and_hms(2024, 6, 1, 0, 0, 0).unwrap();
        let a = Assertion::new("site", "salinity_psu", SlotValue::decimal("33", "psu"), Quality::Observed, t);
        store.add_assertion(&uid("ex:site-A"), a.clone()).unwrap();
        let current = store.context(&uid("ex:site-A")).unwrap().current("site", "salinity_psu").unwrap();
        assert_eq!(current.value, SlotValue::decimal("33", "psu"));

        assert!(matches!(
            store.add_assertion(&uid("ex:notes"), a.clone()),
            Err(Error::WrongFrame { .. })
        ));
        assert!(matches!(store.add_assertion(&uid("ex:nope"), a), Err(Error::NotFound(_))));
    }

    #[test]
    fn list_is_sorted_and_filtered() {
        let mut store = UnitStore::new();
        assert!(store.list_units(&UnitFilter::default()).is_empty());
        store.put_unit(site("ex:site-B")).unwrap();
        store.put_unit(site("ex:site-A")).unwrap();
        store.put_unit(compound("ex:group", &["ex:site-A"])).unwrap();
        assert_eq!(
            store.list_units(&UnitFilter::kind(UnitKind::Context)),
            vec![uid("ex:site-A"), uid("ex:site-B")]
        );
        let assertional = UnitFilter {
            statement_class: Some(StatementClass::Assertional),
            ..Default::default()
        };
        assert!(store.list_units(&assertional).is_empty());
    }

    #[test]
    fn referenced_units_cannot_be_removed() {
        let mut store = UnitStore::new();
        store.put_unit(site("ex:site-A")).unwrap();
        store.put_unit(compound("ex:group", &["ex:site-A"])).unwrap();
        assert!(store.remove_unit(&uid("ex:site-A")).is_err());
        store.remove_unit(&uid("ex:group")).unwrap();
        store.remove_unit(&uid("ex:site-A")).unwrap();
    }
}
