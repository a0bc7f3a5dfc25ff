//! Forward (situation → procedures) and reverse (procedure → situations) discovery.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::level_of;
use crate::action::{GroundingLevel, ObjectiveClass};
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::eval::{ApplicabilityReport, Grade, SituationView, Verdict};
use crate::id::UnitId;
use crate::store::UnitStore;

/// Restricts forward discovery by the candidates' objectives.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObjectiveFilter {
    pub objective_class: Option<ObjectiveClass>,
    /// Every listed tag must be present on the objective.
    pub tags: Vec<String>,
    /// Also list candidates that are inapplicable.
    pub include_inapplicable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub action_unit: UnitId,
    pub report: ApplicabilityReport,
    pub level: GroundingLevel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextVerdict {
    pub context_id: UnitId,
    pub verdict: Verdict,
    pub grade: Grade,
}

fn rank(a: &RankedCandidate, b: &RankedCandidate) -> Ordering {
    a.report
        .verdict
        .cmp(&b.report.verdict)
        .then(a.report.grade.cmp(&b.report.grade))
        .then(b.report.sat_fraction().total_cmp(&a.report.sat_fraction()))
        .then(a.action_unit.cmp(&b.action_unit))
}

impl Engine {
    /// Action units worth considering in a situation, best first.
    ///
    /// Units that fail structural validation are skipped.
    pub fn discover_forward(&self, store: &UnitStore, context_id: &UnitId, filter: &ObjectiveFilter) -> Result<Vec<RankedCandidate>> {
        let ctx = store.situation(context_id)?;
        let view = SituationView::new(ctx);
        let mut out = Vec::new();
        for au in store.action_units() {
            let objective = store.objective(&au.objective)?;
            if filter.objective_class.is_some_and(|c| c != objective.objective_class)
                || !filter.tags.iter().all(|t| objective.tags.contains(t))
            {
                continue;
            }
            match self.checked_action(store, &au.base.id) {
                Ok(_) => {}
                Err(Error::InvalidActionUnit { .. }) => continue,
                Err(e) => return Err(e),
            }
            let report = self.evaluate_in_view(store, au, &view)?;
            if report.verdict == Verdict::Inapplicable && !filter.include_inapplicable {
                continue;
            }
            out.push(RankedCandidate {
                action_unit: au.base.id.clone(),
                level: level_of(&report),
                report,
            });
        }
        out.sort_by(rank);
        Ok(out)
    }

    /// Every situation context with the unit's verdict there, applicable first.
    pub fn discover_reverse(&self, store: &UnitStore, au_id: &UnitId) -> Result<Vec<ContextVerdict>> {
        let au = self.checked_action(store, au_id)?;
        let mut out = Vec::new();
        for ctx in store.situation_contexts() {
            let report = self.evaluate_in_view(store, au, &SituationView::new(ctx))?;
            out.push(ContextVerdict {
                context_id: ctx.base.id.clone(),
                verdict: report.verdict,
                grade: report.grade,
            });
        }
        out.sort_by(|a, b| a.verdict.cmp(&b.verdict).then(a.context_id.cmp(&b.context_id)));
        Ok(out)
    }
}
