use serde::{Deserialize, Serialize};

use crate::condition::{ConditionKind, TriValue};
use crate::id::UnitId;
use crate::unit::{Assertion, AssertionRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Applicable,
    Undetermined,
    Inapplicable,
}

/// Ordered best-first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grade {
    Validated,
    Supported,
    Plausible,
    Unknown,
    Inapplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapReason {
    MissingData,
    Violated,
    Unattested,
    UnitMismatch,
    Nonconformant,
}

/// An unmet or undecidable condition and what would resolve it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    pub condition_label: String,
    pub reason: GapReason,
    /// A path, capability or schema id depending on `reason`.
    pub needed: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub label: String,
    pub kind: ConditionKind,
    pub value: TriValue,
    pub support: Vec<AssertionRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApplicabilityReport {
    pub action_unit: UnitId,
    pub context: UnitId,
    pub per_condition: Vec<ConditionResult>,
    pub verdict: Verdict,
    pub grade: Grade,
    pub gaps: Vec<Gap>,
}

impl ApplicabilityReport {
    /// Share of conditions that are SAT; 1.0 for an empty condition list.
    pub fn sat_fraction(&self) -> f64 {
        if self.per_condition.is_empty() {
            return 1.0;
        }
        let sat = self.per_condition.iter().filter(|c| c.value == TriValue::Sat).count();
        sat as f64 / self.per_condition.len() as f64
    }

    pub fn condition(&self, label: &str) -> Option<&ConditionResult> {
        self.per_condition.iter().find(|c| c.label == label)
    }
}

/// Verdict from per-condition values: any UNSAT → inapplicable, all SAT → applicable.
pub fn verdict_of<I: IntoIterator<Item = TriValue>>(values: I) -> Verdict {
    let mut verdict = Verdict::Applicable;
    for v in values {
        match v {
            TriValue::Unsat => return Verdict::Inapplicable,
            TriValue::Unknown => verdict = Verdict::Undetermined,
            TriValue::Sat => {}
        }
    }
    verdict
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flip {
    pub label: String,
    pub from: TriValue,
    pub to: TriValue,
}

/// Outcome of a counterfactual re-evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhatIfDiff {
    pub overrides: Vec<Assertion>,
    pub before: ApplicabilityReport,
    pub after: ApplicabilityReport,
    pub flips: Vec<Flip>,
}
