//! Action units: the typed family of extended plan specifications, their components,
//! class-typing validation, and the grounding ladder.

mod grounding;
mod validate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::condition::Path;
use crate::id::UnitId;
use crate::unit::UnitMeta;
use crate::value::{SlotValue, Timestamp};

pub use grounding::{GroundingAssessment, GroundingLevel};
pub use validate::{topological_order, validate_action_unit, ValidationReport, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionClass {
    Epistemic,
    Transformational,
    Intervention,
    Composite,
    Conditional,
}

impl ActionClass {
    pub fn is_atomic(self) -> bool {
        matches!(
            self,
            ActionClass::Epistemic | ActionClass::Transformational | ActionClass::Intervention
        )
    }
}

/// Which way an epistemic unit relates representation and world.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpistemicDirection {
    /// representation → world
    Recognize,
    /// world → representation (statements)
    Describe,
    /// world → representation (terms)
    Designate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Information,
    Material,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotDirection {
    Input,
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cardinality {
    pub min: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<u32>,
}

impl Default for Cardinality {
    fn default() -> Self {
        Cardinality { min: 1, max: Some(1) }
    }
}

/// A participant of an action unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotSpec {
    pub role: String,
    pub direction: SlotDirection,
    pub entity_kind: EntityKind,
    /// Only meaningful for information slots.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_id: Option<UnitId>,
    #[serde(default)]
    pub cardinality: Cardinality,
}

impl SlotSpec {
    pub fn input(role: &str, entity_kind: EntityKind) -> Self {
        SlotSpec {
            role: role.to_string(),
            direction: SlotDirection::Input,
            entity_kind,
            schema_id: None,
            cardinality: Cardinality::default(),
        }
    }

    pub fn output(role: &str, entity_kind: EntityKind) -> Self {
        SlotSpec {
            direction: SlotDirection::Output,
            ..SlotSpec::input(role, entity_kind)
        }
    }

    pub fn with_schema(mut self, schema: UnitId) -> Self {
        self.schema_id = Some(schema);
        self
    }

    pub fn optional(mut self) -> Self {
        self.cardinality.min = 0;
        self
    }

    pub fn is_required(&self) -> bool {
        self.cardinality.min > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanKind {
    Diagnostic,
    Algorithmic,
    Procedural,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderingEntry {
    pub step: String,
    #[serde(default)]
    pub precedes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanSpecUnit {
    #[serde(flatten)]
    pub base: UnitMeta,
    pub plan_kind: PlanKind,
    /// Name of a registered executor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub executable: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directive_text: Option<String>,
    #[serde(default)]
    pub ordering: Vec<OrderingEntry>,
}

impl PlanSpecUnit {
    pub fn directive(base: UnitMeta, plan_kind: PlanKind, text: &str) -> Self {
        PlanSpecUnit {
            base,
            plan_kind,
            executable: None,
            directive_text: Some(text.to_string()),
            ordering: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveClass {
    Epistemic,
    Transformational,
    Intervention,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectiveUnit {
    #[serde(flatten)]
    pub base: UnitMeta,
    pub objective_class: ObjectiveClass,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub tags: Vec<String>,
    /// Condition set describing success.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub success_criteria: Option<UnitId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binding {
    pub from_step: String,
    pub from_output_role: String,
    pub to_input_role: String,
}

/// One step of a composite unit. `bindings` feed this step's inputs from earlier steps' outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChildStep {
    pub step_id: String,
    pub action_unit: UnitId,
    #[serde(default)]
    pub precedes: Vec<String>,
    #[serde(default)]
    pub bindings: Vec<Binding>,
}

/// Guard is a condition-set unit; the branch fires when all of its items are SAT.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub guard: UnitId,
    pub action: UnitId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionUnit {
    #[serde(flatten)]
    pub base: UnitMeta,
    pub class: ActionClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epistemic_direction: Option<EpistemicDirection>,
    #[serde(default)]
    pub inputs: Vec<SlotSpec>,
    #[serde(default)]
    pub outputs: Vec<SlotSpec>,
    pub plan: UnitId,
    pub conditions: UnitId,
    pub objective: UnitId,
    /// Situation paths the unit reads at evaluation time.
    #[serde(default)]
    pub context_requirements: Vec<Path>,
    #[serde(default)]
    pub children: Vec<ChildStep>,
    #[serde(default)]
    pub branches: Vec<Branch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub else_action: Option<UnitId>,
}

impl ActionUnit {
    /// Bare unit of `class`; callers fill in slots and structure.
    pub fn new(base: UnitMeta, class: ActionClass, plan: UnitId, conditions: UnitId, objective: UnitId) -> Self {
        ActionUnit {
            base,
            class,
            epistemic_direction: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            plan,
            conditions,
            objective,
            context_requirements: Vec::new(),
            children: Vec::new(),
            branches: Vec::new(),
            else_action: None,
        }
    }

    pub fn input(&self, role: &str) -> Option<&SlotSpec> {
        self.inputs.iter().find(|s| s.role == role)
    }

    pub fn output(&self, role: &str) -> Option<&SlotSpec> {
        self.outputs.iter().find(|s| s.role == role)
    }

    pub fn child(&self, step_id: &str) -> Option<&ChildStep> {
        self.children.iter().find(|c| c.step_id == step_id)
    }

    pub(crate) fn references(&self) -> Vec<UnitId> {
        let mut refs = vec![self.plan.clone(), self.conditions.clone(), self.objective.clone()];
        refs.extend(self.inputs.iter().chain(&self.outputs).filter_map(|s| s.schema_id.clone()));
        refs.extend(self.children.iter().map(|c| c.action_unit.clone()));
        for b in &self.branches {
            refs.push(b.guard.clone());
            refs.push(b.action.clone());
        }
        refs.extend(self.else_action.iter().cloned());
        refs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Failure,
    Partial,
}

/// A documented application of an action unit in a context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceUnit {
    #[serde(flatten)]
    pub base: UnitMeta,
    pub action_unit: UnitId,
    pub context: UnitId,
    pub outcome: Outcome,
    #[serde(default)]
    pub metrics: BTreeMap<String, SlotValue>,
    pub recorded_at: Timestamp,
}
