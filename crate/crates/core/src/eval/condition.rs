//! Three-valued evaluation of a single condition expression against a situation.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::report::GapReason;
use super::view::SituationView;
use crate::condition::{CmpOp, ConditionExpr, Path, TriValue};
use crate::engine::UnitConversions;
use crate::error::Result;
use crate::id::UnitId;
use crate::schema::conformance;
use crate::store::UnitStore;
use crate::unit::{Assertion, AssertionRef, Unit};
use crate::value::SlotValue;

/// Subject under which input-role bindings are asserted: `input.bind:<role>`.
pub const BINDING_SUBJECT: &str = "input";

pub fn binding_attribute(role: &str) -> String {
    format!("bind:{role}")
}

pub fn attestation_attribute(capability: &str) -> String {
    format!("attested:{capability}")
}

/// Why a leaf could not be decided, or why a schema check failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub reason: GapReason,
    pub needed: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionEvaluation {
    pub value: TriValue,
    /// Every assertion the evaluation consulted.
    pub support: Vec<AssertionRef>,
    pub diagnostics: Vec<Diagnostic>,
}

pub(crate) struct Evaluator<'a> {
    pub store: &'a UnitStore,
    pub conversions: &'a UnitConversions,
    pub view: &'a SituationView<'a>,
}

struct Acc {
    support: Vec<AssertionRef>,
    diagnostics: Vec<Diagnostic>,
}

impl Acc {
    fn support(&mut self, a: &Assertion) {
        let r = a.to_ref();
        if !self.support.contains(&r) {
            self.support.push(r);
        }
    }

    fn diagnose(&mut self, reason: GapReason, needed: String, detail: String) {
        let d = Diagnostic { reason, needed, detail };
        if !self.diagnostics.contains(&d) {
            self.diagnostics.push(d);
        }
    }
}

enum Compared {
    Ord(Ordering),
    /// Only equality is defined between the values.
    Equal(bool),
    Incomparable(String),
}

impl<'a> Evaluator<'a> {
    pub fn evaluate(&self, expr: &ConditionExpr) -> Result<ConditionEvaluation> {
        let mut acc = Acc {
            support: Vec::new(),
            diagnostics: Vec::new(),
        };
        let value = self.eval(expr, &mut acc)?;
        Ok(ConditionEvaluation {
            value,
            support: acc.support,
            diagnostics: acc.diagnostics,
        })
    }

    fn eval(&self, expr: &ConditionExpr, acc: &mut Acc) -> Result<TriValue> {
        Ok(match expr {
            ConditionExpr::And(l, r) => {
                let a = self.eval(l, acc)?;
                let b = self.eval(r, acc)?;
                match (a, b) {
                    (TriValue::Unsat, _) | (_, TriValue::Unsat) => TriValue::Unsat,
                    (TriValue::Sat, TriValue::Sat) => TriValue::Sat,
                    _ => TriValue::Unknown,
                }
            }
            ConditionExpr::Or(l, r) => {
                let a = self.eval(l, acc)?;
                let b = self.eval(r, acc)?;
                match (a, b) {
                    (TriValue::Sat, _) | (_, TriValue::Sat) => TriValue::Sat,
                    (TriValue::Unsat, TriValue::Unsat) => TriValue::Unsat,
                    _ => TriValue::Unknown,
                }
            }
            ConditionExpr::Not(e) => match self.eval(e, acc)? {
                TriValue::Sat => TriValue::Unsat,
                TriValue::Unsat => TriValue::Sat,
                TriValue::Unknown => TriValue::Unknown,
            },
            ConditionExpr::Exists { path } => match self.view.current(&path.subject, &path.attribute) {
                Some(a) => {
                    acc.support(a);
                    TriValue::Sat
                }
                None => TriValue::Unsat,
            },
            ConditionExpr::Cmp { path, op, literal } => {
                let Some(actual) = self.lookup(path, acc) else {
                    return Ok(TriValue::Unknown);
                };
                match self.compare(actual, literal) {
                    Compared::Ord(ord) => TriValue::from_bool(match op {
                        CmpOp::Lt => ord == Ordering::Less,
                        CmpOp::Le => ord != Ordering::Greater,
                        CmpOp::Gt => ord == Ordering::Greater,
                        CmpOp::Ge => ord != Ordering::Less,
                        CmpOp::Eq => ord == Ordering::Equal,
                        CmpOp::Ne => ord != Ordering::Equal,
                    }),
                    Compared::Equal(eq) if !op.is_ordering() => TriValue::from_bool((*op == CmpOp::Eq) == eq),
                    Compared::Equal(_) => {
                        acc.diagnose(
                            GapReason::UnitMismatch,
                            path.to_string(),
                            format!("`{}` is not defined for {}", op.symbol(), actual.datatype()),
                        );
                        TriValue::Unknown
                    }
                    Compared::Incomparable(why) => {
                        acc.diagnose(GapReason::UnitMismatch, path.to_string(), why);
                        TriValue::Unknown
                    }
                }
            }
            ConditionExpr::Between { path, lo, hi } => {
                let Some(actual) = self.lookup(path, acc) else {
                    return Ok(TriValue::Unknown);
                };
                match (self.compare(actual, lo), self.compare(actual, hi)) {
                    (Compared::Ord(a), Compared::Ord(b)) => {
                        TriValue::from_bool(a != Ordering::Less && b != Ordering::Greater)
                    }
                    (Compared::Incomparable(why), _) | (_, Compared::Incomparable(why)) => {
                        acc.diagnose(GapReason::UnitMismatch, path.to_string(), why);
                        TriValue::Unknown
                    }
                    _ => {
                        acc.diagnose(
                            GapReason::UnitMismatch,
                            path.to_string(),
                            format!("BETWEEN is not defined for {}", actual.datatype()),
                        );
                        TriValue::Unknown
                    }
                }
            }
            ConditionExpr::In { path, values } => {
                let Some(actual) = self.lookup(path, acc) else {
                    return Ok(TriValue::Unknown);
                };
                let mut mismatch = None;
                let mut found = false;
                for v in values {
                    match self.compare(actual, v) {
                        Compared::Ord(Ordering::Equal) | Compared::Equal(true) => found = true,
                        Compared::Ord(_) | Compared::Equal(false) => {}
                        Compared::Incomparable(why) => mismatch = Some(why),
                    }
                }
                match (found, mismatch) {
                    (true, _) => TriValue::Sat,
                    (false, None) => TriValue::Unsat,
                    (false, Some(why)) => {
                        acc.diagnose(GapReason::UnitMismatch, path.to_string(), why);
                        TriValue::Unknown
                    }
                }
            }
            ConditionExpr::Attested { capability } => {
                let attribute = attestation_attribute(capability);
                match self
                    .view
                    .current_with_attribute(&attribute)
                    .into_iter()
                    .find(|a| a.value == SlotValue::Boolean(true))
                {
                    Some(a) => {
                        acc.support(a);
                        TriValue::Sat
                    }
                    None => {
                        acc.diagnose(
                            GapReason::Unattested,
                            capability.clone(),
                            format!("no attestation `{attribute} == true`"),
                        );
                        TriValue::Unknown
                    }
                }
            }
            ConditionExpr::SchemaConforms { input_role, schema_id } => {
                self.schema_conforms(input_role, schema_id, acc)?
            }
        })
    }

    fn lookup(&self, path: &Path, acc: &mut Acc) -> Option<&'a SlotValue> {
        match self.view.current(&path.subject, &path.attribute) {
            Some(a) => {
                acc.support(a);
                Some(&a.value)
            }
            None => {
                acc.diagnose(GapReason::MissingData, path.to_string(), "no current assertion".into());
                None
            }
        }
    }

    fn compare(&self, actual: &SlotValue, literal: &SlotValue) -> Compared {
        match (actual, literal) {
            (
                SlotValue::Number { magnitude, unit },
                SlotValue::Number {
                    magnitude: target,
                    unit: target_unit,
                },
            ) => match self.conversions.convert(*magnitude, unit, target_unit) {
                Some(converted) => Compared::Ord(converted.cmp(target)),
                None => Compared::Incomparable(format!("unit `{unit}` does not convert to `{target_unit}`")),
            },
            (SlotValue::Timestamp(a), SlotValue::Timestamp(b)) => Compared::Ord(a.cmp(b)),
            (SlotValue::Text(a), SlotValue::Text(b)) => Compared::Ord(a.cmp(b)),
            (SlotValue::Boolean(a), SlotValue::Boolean(b)) => Compared::Equal(a == b),
            (SlotValue::Ref(a), SlotValue::Ref(b)) => Compared::Equal(a == b),
            (a, b) => Compared::Incomparable(format!("{} value compared with {} literal", a.datatype(), b.datatype())),
        }
    }

    fn schema_conforms(&self, role: &str, schema_id: &UnitId, acc: &mut Acc) -> Result<TriValue> {
        let schema = self.store.schema(schema_id)?;
        let attribute = binding_attribute(role);
        let Some(binding) = self.view.current(BINDING_SUBJECT, &attribute) else {
            acc.diagnose(
                GapReason::MissingData,
                format!("{BINDING_SUBJECT}.{attribute}"),
                format!("input role `{role}` is unbound"),
            );
            return Ok(TriValue::Unknown);
        };
        acc.support(binding);
        let SlotValue::Ref(target) = &binding.value else {
            acc.diagnose(
                GapReason::Nonconformant,
                schema_id.to_string(),
                format!("input `{role}` is bound to a {} value, not a statement", binding.value.datatype()),
            );
            return Ok(TriValue::Unsat);
        };
        match self.store.get_unit(target) {
            Ok(Unit::Statement(statement)) => {
                let report = conformance(statement, schema);
                if report.conformant {
                    Ok(TriValue::Sat)
                } else {
                    let detail = report
                        .violations
                        .iter()
                        .map(|v| format!("{}: {:?}", v.role, v.reason))
                        .collect::<Vec<_>>()
                        .join(", ");
                    acc.diagnose(GapReason::Nonconformant, schema_id.to_string(), detail);
                    Ok(TriValue::Unsat)
                }
            }
            Ok(other) => {
                acc.diagnose(
                    GapReason::Nonconformant,
                    schema_id.to_string(),
                    format!("input `{role}` is bound to a {} unit", other.kind()),
                );
                Ok(TriValue::Unsat)
            }
            Err(_) => {
                acc.diagnose(
                    GapReason::Nonconformant,
                    schema_id.to_string(),
                    format!("input `{role}` is bound to {target}, which is not in the store"),
                );
                Ok(TriValue::Unknown)
            }
        }
    }
}
