//! Applicability evaluation: conditions, action units, counterfactual overlays.

mod condition;
mod report;
mod view;

use crate::action::{validate_action_unit, ActionClass, ActionUnit};
use crate::condition::{ConditionExpr, ConditionItem, ConditionKind, TriValue};
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::id::UnitId;
use crate::store::UnitStore;
use crate::unit::{is_valid_attribute, is_valid_subject, Assertion, Quality};

pub use condition::{
    attestation_attribute, binding_attribute, ConditionEvaluation, Diagnostic, BINDING_SUBJECT,
};
pub use report::{
    verdict_of, ApplicabilityReport, ConditionResult, Flip, Gap, GapReason, Grade, Verdict, WhatIfDiff,
};
pub use view::SituationView;

use condition::Evaluator;

/// Gaps for one non-SAT condition.
fn gaps_for(label: &str, expr: &ConditionExpr, eval: &ConditionEvaluation) -> Vec<Gap> {
    let gap = |reason, needed: &str| Gap {
        condition_label: label.to_string(),
        reason,
        needed: needed.to_string(),
    };
    let mut gaps: Vec<Gap> = match eval.value {
        TriValue::Sat => return Vec::new(),
        TriValue::Unknown => eval
            .diagnostics
            .iter()
            .filter(|d| d.reason != GapReason::Violated)
            .map(|d| gap(d.reason, &d.needed))
            .collect(),
        TriValue::Unsat => eval
            .diagnostics
            .iter()
            .filter(|d| d.reason == GapReason::Nonconformant)
            .map(|d| gap(d.reason, &d.needed))
            .collect(),
    };
    if gaps.is_empty() {
        let needed = expr
            .paths()
            .first()
            .map(|p| p.to_string())
            .or_else(|| expr.capabilities().first().map(|c| c.to_string()))
            .or_else(|| expr.schema_ids().iter().next().map(|s| s.to_string()))
            .unwrap_or_default();
        gaps.push(gap(GapReason::Violated, &needed));
    }
    gaps.dedup();
    gaps
}

/// `supported` when every consulted assertion was observed, `plausible` otherwise.
pub(crate) fn support_grade(per_condition: &[ConditionResult]) -> Grade {
    if per_condition
        .iter()
        .flat_map(|c| &c.support)
        .all(|s| s.quality == Quality::Observed)
    {
        Grade::Supported
    } else {
        Grade::Plausible
    }
}

impl Engine {
    /// Evaluates one expression against a stored situation context.
    pub fn evaluate_condition(&self, store: &UnitStore, expr: &ConditionExpr, context_id: &UnitId) -> Result<ConditionEvaluation> {
        let ctx = store.situation(context_id)?;
        self.evaluate_condition_in(store, expr, &SituationView::new(ctx))
    }

    pub fn evaluate_condition_in(&self, store: &UnitStore, expr: &ConditionExpr, view: &SituationView<'_>) -> Result<ConditionEvaluation> {
        Evaluator {
            store,
            conversions: &self.settings.conversions,
            view,
        }
        .evaluate(expr)
    }

    /// The unit's condition items; transformational units with an empty set get one
    /// schema-conformance item per schema-typed input.
    pub fn effective_conditions(&self, store: &UnitStore, au: &ActionUnit) -> Result<Vec<ConditionItem>> {
        let set = store.condition_set(&au.conditions)?;
        if !set.items.is_empty() || au.class != ActionClass::Transformational {
            return Ok(set.items.clone());
        }
        Ok(au
            .inputs
            .iter()
            .filter_map(|slot| {
                let schema_id = slot.schema_id.clone()?;
                Some(ConditionItem {
                    kind: ConditionKind::Formal,
                    label: format!("input {} conforms to {}", slot.role, schema_id),
                    expr: ConditionExpr::SchemaConforms {
                        input_role: slot.role.clone(),
                        schema_id,
                    },
                })
            })
            .collect())
    }

    pub(crate) fn checked_action<'s>(&self, store: &'s UnitStore, au_id: &UnitId) -> Result<&'s ActionUnit> {
        let au = store.action(au_id)?;
        let report = validate_action_unit(au, store)?;
        if !report.ok {
            return Err(Error::InvalidActionUnit {
                id: au_id.clone(),
                violations: report.messages(),
            });
        }
        Ok(au)
    }

    /// Per-condition values, verdict and gaps, without grading.
    pub(crate) fn assess(
        &self,
        store: &UnitStore,
        au: &ActionUnit,
        view: &SituationView<'_>,
    ) -> Result<(Vec<ConditionResult>, Verdict, Vec<Gap>)> {
        let items = self.effective_conditions(store, au)?;
        self.assess_items(store, &items, view)
    }

    pub(crate) fn assess_items(
        &self,
        store: &UnitStore,
        items: &[ConditionItem],
        view: &SituationView<'_>,
    ) -> Result<(Vec<ConditionResult>, Verdict, Vec<Gap>)> {
        let mut results = Vec::with_capacity(items.len());
        let mut gaps = Vec::new();
        for item in items {
            let eval = self.evaluate_condition_in(store, &item.expr, view)?;
            gaps.extend(gaps_for(&item.label, &item.expr, &eval));
            results.push(ConditionResult {
                label: item.label.clone(),
                kind: item.kind,
                value: eval.value,
                support: eval.support,
            });
        }
        let verdict = verdict_of(results.iter().map(|r| r.value));
        Ok((results, verdict, gaps))
    }

    /// Success evidence for `au` whose own context makes `au` applicable.
    pub fn qualifying_evidence(&self, store: &UnitStore, au: &ActionUnit) -> Result<Vec<UnitId>> {
        let mut out = Vec::new();
        for e in store.evidence_units() {
            if e.action_unit != au.base.id || e.outcome != crate::action::Outcome::Success {
                continue;
            }
            let Ok(ctx) = store.situation(&e.context) else {
                continue;
            };
            let (_, verdict, _) = self.assess(store, au, &SituationView::new(ctx))?;
            if verdict == Verdict::Applicable {
                out.push(e.base.id.clone());
            }
        }
        Ok(out)
    }

    pub fn promotion_holds(&self, store: &UnitStore, au: &ActionUnit) -> Result<bool> {
        let needed = self.settings.promotion.min_success_evidence;
        if needed == 0 {
            return Ok(true);
        }
        Ok(self.qualifying_evidence(store, au)?.len() >= needed)
    }

    pub(crate) fn evaluate_in_view(&self, store: &UnitStore, au: &ActionUnit, view: &SituationView<'_>) -> Result<ApplicabilityReport> {
        let (per_condition, verdict, gaps) = self.assess(store, au, view)?;
        let grade = match verdict {
            Verdict::Inapplicable => Grade::Inapplicable,
            Verdict::Undetermined => Grade::Unknown,
            Verdict::Applicable => {
                if self.promotion_holds(store, au)? {
                    Grade::Validated
                } else {
                    support_grade(&per_condition)
                }
            }
        };
        Ok(ApplicabilityReport {
            action_unit: au.base.id.clone(),
            context: view.context_id().clone(),
            per_condition,
            verdict,
            grade,
            gaps,
        })
    }

    /// Judges whether `au_id` may be applied in the situation `context_id`.
    pub fn evaluate_action_unit(&self, store: &UnitStore, au_id: &UnitId, context_id: &UnitId) -> Result<ApplicabilityReport> {
        let au = self.checked_action(store, au_id)?;
        let ctx = store.situation(context_id)?;
        self.evaluate_in_view(store, au, &SituationView::new(ctx))
    }

    /// Re-evaluates with `overrides` layered over the context. The store is not touched.
    pub fn what_if(&self, store: &UnitStore, au_id: &UnitId, context_id: &UnitId, overrides: Vec<Assertion>) -> Result<WhatIfDiff> {
        for o in &overrides {
            if !is_valid_subject(&o.subject) || !is_valid_attribute(&o.attribute) {
                return Err(Error::Invalid(format!("invalid override path {}.{}", o.subject, o.attribute)));
            }
        }
        let au = self.checked_action(store, au_id)?;
        let ctx = store.situation(context_id)?;
        let before = self.evaluate_in_view(store, au, &SituationView::new(ctx))?;
        let after = self.evaluate_in_view(store, au, &SituationView::with_overlay(ctx, &overrides))?;
        let flips = before
            .per_condition
            .iter()
            .zip(&after.per_condition)
            .filter(|(b, a)| b.value != a.value)
            .map(|(b, a)| Flip {
                label: b.label.clone(),
                from: b.value,
                to: a.value,
            })
            .collect();
        Ok(WhatIfDiff {
            overrides,
            before,
            after,
            flips,
        })
    }
}
