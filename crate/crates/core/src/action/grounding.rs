//! The structural → applicable → validated ladder.

use serde::{Deserialize, Serialize};

use crate::engine::Engine;
use crate::error::Result;
use crate::eval::ApplicabilityReport;
use crate::id::UnitId;
use crate::orchestrate::level_of;
use crate::store::UnitStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundingLevel {
    /// A well-formed action unit, not yet tied to a situation.
    Structural,
    /// All applicability conditions hold in the given situation.
    Applicable,
    /// Applicable, and backed by enough success evidence from comparable situations.
    Validated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundingAssessment {
    pub level: GroundingLevel,
    /// Present whenever a context was supplied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ApplicabilityReport>,
}

impl Engine {
    /// Where `au_id` sits on the grounding ladder, optionally relative to a situation.
    pub fn grounding_level(&self, store: &UnitStore, au_id: &UnitId, context_id: Option<&UnitId>) -> Result<GroundingAssessment> {
        let Some(context_id) = context_id else {
            self.checked_action(store, au_id)?;
            return Ok(GroundingAssessment {
                level: GroundingLevel::Structural,
                report: None,
            });
        };
        let report = self.evaluate_action_unit(store, au_id, context_id)?;
        Ok(GroundingAssessment {
            level: level_of(&report),
            report: Some(report),
        })
    }
}
