//! Discovery, execution of action units, manual tasks and evidence.

mod discover;
mod execute;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::action::{ActionClass, ActionUnit, EntityKind, GroundingLevel, Outcome, SlotSpec};
use crate::condition::TriValue;
use crate::eval::{ApplicabilityReport, Gap};
use crate::id::UnitId;
use crate::schema::conformance;
use crate::store::UnitStore;
use crate::unit::{AssertionRef, ContextUnit, Unit, UnitMeta};
use crate::value::{SlotValue, Timestamp};

pub use discover::{ContextVerdict, ObjectiveFilter, RankedCandidate};

/// What an executor sees when it runs one step.
pub struct ExecutorInput<'a> {
    pub store: &'a UnitStore,
    pub action_unit: &'a ActionUnit,
    pub context: &'a ContextUnit,
    pub inputs: &'a BTreeMap<String, SlotValue>,
}

/// Produces output values by role, or a failure message.
pub type ExecutorFn =
    Arc<dyn Fn(&ExecutorInput<'_>) -> Result<BTreeMap<String, SlotValue>, String> + Send + Sync>;

/// Named callables that plan specifications refer to through `executable`.
#[derive(Clone, Default)]
pub struct ExecutorRegistry {
    table: BTreeMap<String, ExecutorFn>,
}

impl fmt::Debug for ExecutorRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.table.keys()).finish()
    }
}

impl ExecutorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register<F>(&mut self, name: &str, f: F) -> &mut Self
    where
        F: Fn(&ExecutorInput<'_>) -> Result<BTreeMap<String, SlotValue>, String> + Send + Sync + 'static,
    {
        self.table.insert(name.to_string(), Arc::new(f));
        self
    }

    pub fn get(&self, name: &str) -> Option<&ExecutorFn> {
        self.table.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.table.keys().map(String::as_str)
    }

    /// Transformational units whose plan names an executable that is not registered.
    pub fn missing(&self, store: &UnitStore) -> Vec<(UnitId, String)> {
        store
            .action_units()
            .filter(|a| a.class == ActionClass::Transformational)
            .filter_map(|a| {
                let name = store.plan(&a.plan).ok()?.executable.clone()?;
                (!self.table.contains_key(&name)).then(|| (a.base.id.clone(), name))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecutionStatus {
    /// Not started; dry runs report this.
    Pending,
    Running,
    WaitingManual,
    Completed,
    Failed,
    BlockedInapplicable,
    BlockedUndetermined,
}

impl ExecutionStatus {
    pub fn is_blocked(self) -> bool {
        matches!(self, ExecutionStatus::BlockedInapplicable | ExecutionStatus::BlockedUndetermined)
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, ExecutionStatus::Completed | ExecutionStatus::Failed) || self.is_blocked()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecutorKind {
    Automatic,
    Manual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepOutcome {
    Success,
    Failure,
    Partial,
    Pending,
}

impl From<Outcome> for StepOutcome {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Success => StepOutcome::Success,
            Outcome::Failure => StepOutcome::Failure,
            Outcome::Partial => StepOutcome::Partial,
        }
    }
}

/// One atomic action unit run inside an execution.
///
/// `step_id` is a `/`-separated path through composite steps and conditional branches
/// (`main` for an atomic unit executed directly).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step_id: String,
    pub action_unit: UnitId,
    pub applicability_snapshot: ApplicabilityReport,
    #[serde(default)]
    pub inputs: BTreeMap<String, SlotValue>,
    #[serde(default)]
    pub outputs: BTreeMap<String, SlotValue>,
    pub executor: ExecutorKind,
    pub outcome: StepOutcome,
    pub started_at: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ended_at: Option<Timestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionOutcome {
    Branch,
    Else,
    /// All guards failed and there is no else action: the situation is flagged for reassessment.
    Deferred,
    BlockedUndetermined,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardEvaluation {
    pub index: usize,
    pub guard: UnitId,
    pub value: TriValue,
    pub gaps: Vec<Gap>,
}

/// Result of first-match branch selection. `guards` lists the guards evaluated, in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchSelection {
    pub outcome: SelectionOutcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<UnitId>,
    pub guards: Vec<GuardEvaluation>,
}

impl BranchSelection {
    pub fn gaps(&self) -> Vec<&Gap> {
        self.guards.iter().flat_map(|g| &g.gaps).collect()
    }
}

/// Applicability check of a composite or conditional node, with its branch choice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateRecord {
    /// Empty for the executed unit itself.
    pub path: String,
    pub action_unit: UnitId,
    pub report: ApplicabilityReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<BranchSelection>,
}

/// Provenance of one execute call and everything that followed from it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionRecord {
    #[serde(flatten)]
    pub base: UnitMeta,
    pub action_unit: UnitId,
    pub context: UnitId,
    pub status: ExecutionStatus,
    /// Applicability of the executed unit at start.
    pub report: ApplicabilityReport,
    #[serde(default)]
    pub gates: Vec<GateRecord>,
    #[serde(default)]
    pub steps: Vec<StepRecord>,
    /// Assertions written back to the context.
    #[serde(default)]
    pub feedback: Vec<AssertionRef>,
    #[serde(default)]
    pub inputs: BTreeMap<String, SlotValue>,
    #[serde(default)]
    pub outputs: BTreeMap<String, SlotValue>,
    pub started_at: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ended_at: Option<Timestamp>,
    /// Step or node path whose applicability blocked the run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocked_at: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocking_report: Option<ApplicabilityReport>,
    #[serde(default)]
    pub deferred: bool,
    #[serde(default)]
    pub dry_run: bool,
    #[serde(default)]
    pub evidence_on_completion: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<UnitId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl ExecutionRecord {
    pub fn step(&self, step_id: &str) -> Option<&StepRecord> {
        self.steps.iter().find(|s| s.step_id == step_id)
    }

    pub fn gate(&self, path: &str) -> Option<&GateRecord> {
        self.gates.iter().find(|g| g.path == path)
    }

    /// Branch choice of the executed unit, when it is conditional.
    pub fn selection(&self) -> Option<&BranchSelection> {
        self.gate("").and_then(|g| g.selection.as_ref())
    }
}

/// Work waiting for a person.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManualTask {
    pub execution_id: UnitId,
    pub step_id: String,
    pub action_unit: UnitId,
    pub directive_text: String,
    pub required_outputs: Vec<SlotSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExecuteOptions {
    /// Check applicability and branch choice only; nothing is stored.
    pub dry_run: bool,
    /// Record an evidence unit when the execution completes.
    pub evidence_on_completion: bool,
    /// Values for the executed unit's input roles.
    pub inputs: BTreeMap<String, SlotValue>,
}

/// Checks a value against a slot: material slots take references (or names),
/// schema-typed information slots take a reference to a conforming stored statement.
pub fn check_slot_value(store: &UnitStore, spec: &SlotSpec, value: &SlotValue) -> Result<(), String> {
    match spec.entity_kind {
        EntityKind::Material => match value {
            SlotValue::Ref(_) | SlotValue::Text(_) => Ok(()),
            other => Err(format!("material slot needs a reference, got {}", other.datatype())),
        },
        EntityKind::Information => {
            let Some(schema_id) = &spec.schema_id else {
                return Ok(());
            };
            let SlotValue::Ref(target) = value else {
                return Err(format!("needs a reference to a {schema_id} statement"));
            };
            let statement = match store.get_unit(target) {
                Ok(Unit::Statement(s)) => s,
                Ok(other) => return Err(format!("{target} is a {} unit, not a statement", other.kind())),
                Err(_) => return Err(format!("{target} is not in the store")),
            };
            let schema = store.schema(schema_id).map_err(|e| e.to_string())?;
            let report = conformance(statement, schema);
            if report.conformant {
                Ok(())
            } else {
                Err(format!("{target} does not conform to {schema_id}"))
            }
        }
    }
}

/// Grounding level implied by a report.
pub fn level_of(report: &ApplicabilityReport) -> GroundingLevel {
    use crate::eval::{Grade, Verdict};
    match (report.verdict, report.grade) {
        (Verdict::Applicable, Grade::Validated) => GroundingLevel::Validated,
        (Verdict::Applicable, _) => GroundingLevel::Applicable,
        _ => GroundingLevel::Structural,
    }
}
