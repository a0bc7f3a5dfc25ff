//! Applicability-condition language: AST, three-valued results, condition sets.
//!
//! Concrete syntax (keywords upper-case, `NOT` binds tighter than `AND`, which binds tighter
//! than `OR`; binary connectives are left-associative):
//!
//! ```text
//! site.tidal_inundation_pct BETWEEN 20 pct AND 75 pct
//! site.salinity_psu <= 36 psu AND NOT site.ongoing_disturbance == true
//! site.habitat IN {"mangrove", "estuarine"} OR EXISTS site.replanting_permit
//! SCHEMA(occurrences, ex:occurrence-record) AND ATTESTED(histology_diagnostics)
//! ```
//!
//! Numbers carry an optional unit token (`1` when omitted). Other literals: `"text"`,
//! `true`/`false`, `<ex:unit-id>` references and `@2024-05-01T00:00:00Z` timestamps.

mod parse;
mod print;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::id::UnitId;
use crate::unit::{is_valid_attribute, is_valid_subject, UnitMeta};
use crate::value::SlotValue;

pub use parse::{parse_condition, parse_literal, ParseError, ParseErrorKind};

/// Reserved words of the condition language. They cannot serve as unit tokens, roles or capabilities.
pub const KEYWORDS: [&str; 8] = ["AND", "OR", "NOT", "BETWEEN", "IN", "EXISTS", "SCHEMA", "ATTESTED"];

/// Three-valued (strong Kleene) truth value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TriValue {
    Sat,
    Unsat,
    Unknown,
}

impl TriValue {
    pub fn and(self, other: TriValue) -> TriValue {
        use TriValue::*;
        match (self, other) {
            (Unsat, _) | (_, Unsat) => Unsat,
            (Sat, Sat) => Sat,
            _ => Unknown,
        }
    }

    pub fn or(self, other: TriValue) -> TriValue {
        use TriValue::*;
        match (self, other) {
            (Sat, _) | (_, Sat) => Sat,
            (Unsat, Unsat) => Unsat,
            _ => Unknown,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> TriValue {
        match self {
            TriValue::Sat => TriValue::Unsat,
            TriValue::Unsat => TriValue::Sat,
            TriValue::Unknown => TriValue::Unknown,
        }
    }

    pub fn from_bool(b: bool) -> TriValue {
        if b {
            TriValue::Sat
        } else {
            TriValue::Unsat
        }
    }
}

impl fmt::Display for TriValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TriValue::Sat => "SAT",
            TriValue::Unsat => "UNSAT",
            TriValue::Unknown => "UNKNOWN",
        })
    }
}

/// `subject.attribute`; the attribute is the segment after the last dot.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    pub subject: String,
    pub attribute: String,
}

impl Path {
    pub fn new(subject: &str, attribute: &str) -> Option<Path> {
        (is_valid_subject(subject) && is_valid_attribute(attribute)).then(|| Path {
            subject: subject.to_string(),
            attribute: attribute.to_string(),
        })
    }

    pub fn parse(text: &str) -> Option<Path> {
        let (subject, attribute) = text.rsplit_once('.')?;
        Path::new(subject, attribute)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.subject, self.attribute)
    }
}

impl Serialize for Path {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Path {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Path::parse(&text).ok_or_else(|| serde::de::Error::custom(format!("invalid path {text:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    pub fn is_ordering(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }
}

/// Evaluable condition AST. Serialized as its source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConditionExpr {
    Cmp { path: Path, op: CmpOp, literal: SlotValue },
    Between { path: Path, lo: SlotValue, hi: SlotValue },
    In { path: Path, values: Vec<SlotValue> },
    Exists { path: Path },
    SchemaConforms { input_role: String, schema_id: UnitId },
    Attested { capability: String },
    And(Box<ConditionExpr>, Box<ConditionExpr>),
    Or(Box<ConditionExpr>, Box<ConditionExpr>),
    Not(Box<ConditionExpr>),
}

impl ConditionExpr {
    pub fn and(l: ConditionExpr, r: ConditionExpr) -> ConditionExpr {
        ConditionExpr::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: ConditionExpr, r: ConditionExpr) -> ConditionExpr {
        ConditionExpr::Or(Box::new(l), Box::new(r))
    }

    pub fn negate(e: ConditionExpr) -> ConditionExpr {
        ConditionExpr::Not(Box::new(e))
    }

    /// Context paths the expression reads, in first-occurrence order.
    pub fn paths(&self) -> Vec<&Path> {
        let mut out = Vec::new();
        self.walk(&mut |e| match e {
            ConditionExpr::Cmp { path, .. }
            | ConditionExpr::Between { path, .. }
            | ConditionExpr::In { path, .. }
            | ConditionExpr::Exists { path } => {
                if !out.contains(&path) {
                    out.push(path);
                }
            }
            _ => {}
        });
        out
    }

    pub fn references_path(&self, path: &Path) -> bool {
        self.paths().contains(&path)
    }

    pub fn schema_ids(&self) -> BTreeSet<&UnitId> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let ConditionExpr::SchemaConforms { schema_id, .. } = e {
                out.insert(schema_id);
            }
        });
        out
    }

    pub fn capabilities(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let ConditionExpr::Attested { capability } = e {
                out.push(capability.as_str());
            }
        });
        out
    }

    pub fn depth(&self) -> usize {
        match self {
            ConditionExpr::And(l, r) | ConditionExpr::Or(l, r) => 1 + l.depth().max(r.depth()),
            ConditionExpr::Not(e) => 1 + e.depth(),
            _ => 1,
        }
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a ConditionExpr)) {
        f(self);
        match self {
            ConditionExpr::And(l, r) | ConditionExpr::Or(l, r) => {
                l.walk(f);
                r.walk(f);
            }
            ConditionExpr::Not(e) => e.walk(f),
            _ => {}
        }
    }
}

impl FromStr for ConditionExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_condition(s)
    }
}

impl Serialize for ConditionExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ConditionExpr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_condition(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionKind {
    /// Diagnostic and competence requirements.
    Referential,
    /// Schema conformance of inputs.
    Formal,
    /// Predicates over the situation.
    Contextual,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionItem {
    pub kind: ConditionKind,
    pub expr: ConditionExpr,
    pub label: String,
}

impl ConditionItem {
    /// Parses `source`; panics on malformed text. Intended for fixtures.
    pub fn new(kind: ConditionKind, label: &str, source: &str) -> Self {
        let expr = parse_condition(source).unwrap_or_else(|e| panic!("condition {label:?}: {e}"));
        ConditionItem {
            kind,
            expr,
            label: label.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApplicabilityConditionSet {
    #[serde(flatten)]
    pub base: UnitMeta,
    #[serde(default)]
    pub items: Vec<ConditionItem>,
}

impl ApplicabilityConditionSet {
    pub fn new(base: UnitMeta, items: Vec<ConditionItem>) -> Self {
        ApplicabilityConditionSet { base, items }
    }

    pub(crate) fn schema_references(&self) -> Vec<UnitId> {
        let ids: BTreeSet<&UnitId> = self.items.iter().flat_map(|i| i.expr.schema_ids()).collect();
        ids.into_iter().cloned().collect()
    }
}
