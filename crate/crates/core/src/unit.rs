//! Semantic unit records and the tagged [`Unit`] envelope stored in a [`UnitStore`](crate::store::UnitStore).

use std::collections::BTreeMap;
use std::fmt;

use chrono::DateTime;
use serde::{Deserialize, Serialize};

use crate::action::{ActionUnit, EvidenceUnit, ObjectiveUnit, PlanSpecUnit};
use crate::condition::ApplicabilityConditionSet;
use crate::id::UnitId;
use crate::orchestrate::ExecutionRecord;
use crate::schema::StatementSchema;
use crate::value::{SlotValue, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitKind {
    Statement,
    Context,
    Compound,
    Schema,
    Action,
    Objective,
    Plan,
    ConditionSet,
    Evidence,
    Execution,
}

impl fmt::Display for UnitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnitKind::Statement => "statement",
            UnitKind::Context => "context",
            UnitKind::Compound => "compound",
            UnitKind::Schema => "schema",
            UnitKind::Action => "action",
            UnitKind::Objective => "objective",
            UnitKind::Plan => "plan",
            UnitKind::ConditionSet => "condition-set",
            UnitKind::Evidence => "evidence",
            UnitKind::Execution => "execution",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub created_at: Timestamp,
}

impl Default for Provenance {
    fn default() -> Self {
        Provenance {
            source: "unspecified".to_string(),
            created_at: DateTime::UNIX_EPOCH,
        }
    }
}

/// Fields shared by every semantic unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitMeta {
    pub id: UnitId,
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub provenance: Provenance,
    /// Compound membership: the units this unit is made of.
    #[serde(default)]
    pub parts: Vec<UnitId>,
}

impl UnitMeta {
    pub fn new(id: UnitId, label: impl Into<String>) -> Self {
        UnitMeta {
            id,
            label: label.into(),
            provenance: Provenance::default(),
            parts: Vec::new(),
        }
    }

    pub fn with_source(mut self, source: &str, created_at: Timestamp) -> Self {
        self.provenance = Provenance {
            source: source.to_string(),
            created_at,
        };
        self
    }

    pub fn with_parts(mut self, parts: Vec<UnitId>) -> Self {
        self.parts = parts;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatementClass {
    Assertional,
    Universal,
    Prototypical,
    Directive,
    ConditionalDirective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementUnit {
    #[serde(flatten)]
    pub base: UnitMeta,
    pub statement_class: StatementClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_id: Option<UnitId>,
    #[serde(default)]
    pub slots: BTreeMap<String, SlotValue>,
    /// Cross-frame link to the entity or unit the statement is about.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub about: Option<UnitId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Situation,
    Document,
    Activity,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Frame::Situation => "situation",
            Frame::Document => "document",
            Frame::Activity => "activity",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quality {
    Observed,
    Inferred,
    Assumed,
}

/// An instance-level fact inside a situation frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assertion {
    pub subject: String,
    pub attribute: String,
    pub value: SlotValue,
    pub quality: Quality,
    pub observed_at: Timestamp,
    #[serde(default)]
    pub provenance: String,
}

impl Assertion {
    pub fn new(
        subject: &str,
        attribute: &str,
        value: SlotValue,
        quality: Quality,
        observed_at: Timestamp,
    ) -> Self {
        Assertion {
            subject: subject.to_string(),
            attribute: attribute.to_string(),
            value,
            quality,
            observed_at,
            provenance: String::new(),
        }
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn path(&self) -> String {
        format!("{}.{}", self.subject, self.attribute)
    }

    pub fn to_ref(&self) -> AssertionRef {
        AssertionRef {
            subject: self.subject.clone(),
            attribute: self.attribute.clone(),
            observed_at: self.observed_at,
            quality: self.quality,
        }
    }
}

/// Points at one assertion of a context by key and timestamp.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssertionRef {
    pub subject: String,
    pub attribute: String,
    pub observed_at: Timestamp,
    pub quality: Quality,
}

/// Subjects are unit ids or bare entity tokens; the same grammar covers both.
pub fn is_valid_subject(s: &str) -> bool {
    crate::id::is_valid_id(s)
}

/// Attribute tokens are flat: no dots.
pub fn is_valid_attribute(s: &str) -> bool {
    crate::id::is_valid_id(s) && !s.contains('.')
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextUnit {
    #[serde(flatten)]
    pub base: UnitMeta,
    pub frame: Frame,
    #[serde(default)]
    pub assertions: Vec<Assertion>,
}

impl ContextUnit {
    pub fn situation(id: UnitId, label: &str) -> Self {
        ContextUnit {
            base: UnitMeta::new(id, label),
            frame: Frame::Situation,
            assertions: Vec::new(),
        }
    }

    pub fn with(mut self, assertion: Assertion) -> Self {
        self.assertions.push(assertion);
        self
    }

    /// Current value for `(subject, attribute)`: the latest `observed_at`, later insertion winning ties.
    pub fn current(&self, subject: &str, attribute: &str) -> Option<&Assertion> {
        let mut best: Option<&Assertion> = None;
        for a in self
            .assertions
            .iter()
            .filter(|a| a.subject == subject && a.attribute == attribute)
        {
            match best {
                Some(b) if a.observed_at < b.observed_at => {}
                _ => best = Some(a),
            }
        }
        best
    }

    /// One current assertion per `(subject, attribute)` key, ordered by key.
    pub fn current_assertions(&self) -> Vec<&Assertion> {
        let mut keys: BTreeMap<(&str, &str), &Assertion> = BTreeMap::new();
        for a in &self.assertions {
            let key = (a.subject.as_str(), a.attribute.as_str());
            match keys.get(&key) {
                Some(b) if a.observed_at < b.observed_at => {}
                _ => {
                    keys.insert(key, a);
                }
            }
        }
        keys.into_values().collect()
    }

    /// Every assertion ever recorded for the key, in insertion order.
    pub fn history<'a>(&'a self, subject: &'a str, attribute: &'a str) -> impl Iterator<Item = &'a Assertion> + 'a {
        self.assertions
            .iter()
            .filter(move |a| a.subject == subject && a.attribute == attribute)
    }
}

/// A unit that only groups other units through `parts`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompoundUnit {
    #[serde(flatten)]
    pub base: UnitMeta,
}

/// Tagged union of every unit kind, serialized with a `kind` discriminator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Unit {
    Statement(StatementUnit),
    Context(ContextUnit),
    Compound(CompoundUnit),
    Schema(StatementSchema),
    Action(ActionUnit),
    Objective(ObjectiveUnit),
    Plan(PlanSpecUnit),
    ConditionSet(ApplicabilityConditionSet),
    Evidence(EvidenceUnit),
    Execution(ExecutionRecord),
}

impl Unit {
    pub fn meta(&self) -> &UnitMeta {
        match self {
            Unit::Statement(u) => &u.base,
            Unit::Context(u) => &u.base,
            Unit::Compound(u) => &u.base,
            Unit::Schema(u) => &u.base,
            Unit::Action(u) => &u.base,
            Unit::Objective(u) => &u.base,
            Unit::Plan(u) => &u.base,
            Unit::ConditionSet(u) => &u.base,
            Unit::Evidence(u) => &u.base,
            Unit::Execution(u) => &u.base,
        }
    }

    pub fn id(&self) -> &UnitId {
        &self.meta().id
    }

    pub fn kind(&self) -> UnitKind {
        match self {
            Unit::Statement(_) => UnitKind::Statement,
            Unit::Context(_) => UnitKind::Context,
            Unit::Compound(_) => UnitKind::Compound,
            Unit::Schema(_) => UnitKind::Schema,
            Unit::Action(_) => UnitKind::Action,
            Unit::Objective(_) => UnitKind::Objective,
            Unit::Plan(_) => UnitKind::Plan,
            Unit::ConditionSet(_) => UnitKind::ConditionSet,
            Unit::Evidence(_) => UnitKind::Evidence,
            Unit::Execution(_) => UnitKind::Execution,
        }
    }

    /// Ids this unit requires to resolve inside the store.
    ///
    /// Assertion subjects, `about` links and `ref` slot values name entities that may live
    /// outside the store and are not included.
    pub fn references(&self) -> Vec<UnitId> {
        let mut refs: Vec<UnitId> = self.meta().parts.clone();
        match self {
            Unit::Statement(s) => refs.extend(s.schema_id.iter().cloned()),
            Unit::Action(a) => refs.extend(a.references()),
            Unit::Objective(o) => refs.extend(o.success_criteria.iter().cloned()),
            Unit::ConditionSet(c) => refs.extend(c.schema_references()),
            Unit::Evidence(e) => {
                refs.push(e.action_unit.clone());
                refs.push(e.context.clone());
            }
            Unit::Execution(x) => {
                refs.push(x.action_unit.clone());
                refs.push(x.context.clone());
            }
            Unit::Context(_) | Unit::Compound(_) | Unit::Schema(_) | Unit::Plan(_) => {}
        }
        refs
    }
}

macro_rules! unit_from {
    ($($variant:ident($ty:ty)),* $(,)?) => {
        $(impl From<$ty> for Unit {
            fn from(u: $ty) -> Self {
                Unit::$variant(u)
            }
        })*
    };
}

unit_from!(
    Statement(StatementUnit),
    Context(ContextUnit),
    Compound(CompoundUnit),
    Schema(StatementSchema),
    Action(ActionUnit),
    Objective(ObjectiveUnit),
    Plan(PlanSpecUnit),
    ConditionSet(ApplicabilityConditionSet),
    Evidence(EvidenceUnit),
    Execution(ExecutionRecord),
);
