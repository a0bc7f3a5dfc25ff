//! Statement schemata: role-named slot templates with admissible-value constraints,
//! conformance checking, and schema-based affordance lookup.

use std::collections::BTreeSet;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::id::UnitId;
use crate::store::UnitStore;
use crate::unit::{StatementClass, StatementUnit, UnitMeta};
use crate::value::{is_valid_unit_token, Datatype, SlotValue};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotSpecDef {
    pub role: String,
    pub datatype: Datatype,
    /// Required unit token, numbers only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    /// Inclusive `[min, max]`, numbers only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<(Decimal, Decimal)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed: Option<Vec<SlotValue>>,
    #[serde(default)]
    pub mandatory: bool,
}

impl SlotSpecDef {
    pub fn new(role: &str, datatype: Datatype, mandatory: bool) -> Self {
        SlotSpecDef {
            role: role.to_string(),
            datatype,
            unit: None,
            range: None,
            allowed: None,
            mandatory,
        }
    }

    pub fn unit(mut self, unit: &str) -> Self {
        self.unit = Some(unit.to_string());
        self
    }

    pub fn range(mut self, min: Decimal, max: Decimal) -> Self {
        self.range = Some((min, max));
        self
    }

    pub fn allowed(mut self, values: Vec<SlotValue>) -> Self {
        self.allowed = Some(values);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementSchema {
    #[serde(flatten)]
    pub base: UnitMeta,
    pub statement_class: StatementClass,
    pub slots: Vec<SlotSpecDef>,
}

impl StatementSchema {
    pub fn slot(&self, role: &str) -> Option<&SlotSpecDef> {
        self.slots.iter().find(|s| s.role == role)
    }

    /// Structural invariants: unique roles, at least one mandatory slot, number-only constraints.
    pub fn check(&self) -> Result<()> {
        let invalid = |reason: String| Error::InvalidSchema {
            id: self.base.id.clone(),
            reason,
        };
        let mut roles = BTreeSet::new();
        for slot in &self.slots {
            if slot.role.is_empty() {
                return Err(invalid("empty role name".into()));
            }
            if !roles.insert(slot.role.as_str()) {
                return Err(invalid(format!("duplicate role {}", slot.role)));
            }
            if slot.datatype != Datatype::Number && (slot.unit.is_some() || slot.range.is_some()) {
                return Err(invalid(format!("unit/range on non-number slot {}", slot.role)));
            }
            if let Some(unit) = &slot.unit {
                if !is_valid_unit_token(unit) {
                    return Err(invalid(format!("invalid unit token {unit:?} on {}", slot.role)));
                }
            }
            if let Some((lo, hi)) = slot.range {
                if lo > hi {
                    return Err(invalid(format!("empty range on {}", slot.role)));
                }
            }
            if let Some(allowed) = &slot.allowed {
                if allowed.iter().any(|v| v.datatype() != slot.datatype) {
                    return Err(invalid(format!("allowed values of {} have the wrong datatype", slot.role)));
                }
            }
        }
        if !self.slots.iter().any(|s| s.mandatory) {
            return Err(invalid("at least one mandatory slot is required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationReason {
    Missing,
    WrongDatatype,
    WrongUnit,
    OutOfRange,
    NotAllowed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotViolation {
    pub role: String,
    pub reason: ViolationReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConformanceReport {
    pub conformant: bool,
    pub violations: Vec<SlotViolation>,
}

/// Checks a statement against a schema. Slots the schema does not mention are ignored.
pub fn conformance(statement: &StatementUnit, schema: &StatementSchema) -> ConformanceReport {
    let violations: Vec<SlotViolation> = schema
        .slots
        .iter()
        .filter_map(|spec| {
            slot_violation(spec, statement.slots.get(&spec.role)).map(|reason| SlotViolation {
                role: spec.role.clone(),
                reason,
            })
        })
        .collect();
    ConformanceReport {
        conformant: violations.is_empty(),
        violations,
    }
}

fn slot_violation(spec: &SlotSpecDef, value: Option<&SlotValue>) -> Option<ViolationReason> {
    let Some(value) = value else {
        return spec.mandatory.then_some(ViolationReason::Missing);
    };
    if value.datatype() != spec.datatype {
        return Some(ViolationReason::WrongDatatype);
    }
    if let SlotValue::Number { magnitude, unit } = value {
        if spec.unit.as_deref().is_some_and(|required| required != unit) {
            return Some(ViolationReason::WrongUnit);
        }
        if let Some((lo, hi)) = spec.range {
            if *magnitude < lo || *magnitude > hi {
                return Some(ViolationReason::OutOfRange);
            }
        }
    }
    if let Some(allowed) = &spec.allowed {
        if !allowed.contains(value) {
            return Some(ViolationReason::NotAllowed);
        }
    }
    None
}

/// Adds a schema to the store after checking its invariants.
pub fn register_schema(store: &mut UnitStore, schema: StatementSchema) -> Result<UnitId> {
    schema.check()?;
    if store.contains(&schema.base.id) {
        return Err(Error::DuplicateIdConflict(schema.base.id.clone()));
    }
    store.put_unit(schema)
}

pub fn check_conformance(store: &UnitStore, statement: &StatementUnit, schema_id: &UnitId) -> Result<ConformanceReport> {
    let schema = store.schema(schema_id)?;
    Ok(conformance(statement, schema))
}

/// Action units with an input slot typed by `schema_id`, in id order.
pub fn compatible_action_units(store: &UnitStore, schema_id: &UnitId) -> Result<Vec<UnitId>> {
    store.schema(schema_id)?;
    Ok(store
        .action_units()
        .filter(|a| a.inputs.iter().any(|s| s.schema_id.as_ref() == Some(schema_id)))
        .map(|a| a.base.id.clone())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::id::uid;
    use chrono::{TimeZone, Utc};
    use std::collections::BTreeMap;

    fn occurrence_schema() -> StatementSchema {
        StatementSchema {
            base: UnitMeta::new(uid("ex:occurrence-record"), "occurrence record"),
            statement_class: StatementClass::Assertional,
            slots: vec![
                SlotSpecDef::new("taxon", Datatype::Text, true),
                SlotSpecDef::new("latitude", Datatype::Number, true)
                    .unit("deg")
                    .range(Decimal::from(-90), Decimal::from(90)),
                SlotSpecDef::new("longitude", Datatype::Number, true)
                    .unit("deg")
                    .range(Decimal::from(-180), Decimal::from(180)),
                SlotSpecDef::new("event_date", Datatype::Timestamp, true),
                SlotSpecDef::new("sampling_effort", Datatype::Number, true).unit("h"),
                SlotSpecDef::new("basis", Datatype::Text, false)
                    .allowed(vec![SlotValue::text("human_observation"), SlotValue::text("specimen")]),
            ],
        }
    }

    fn record(slots: &[(&str, SlotValue)]) -> StatementUnit {
        StatementUnit {
            base: UnitMeta::new(uid("ex:occ-1"), "record"),
            statement_class: StatementClass::Assertional,
            schema_id: Some(uid("ex:occurrence-record")),
            slots: slots.iter().map(|(k, v)| (k.to_string(), v.clone())).collect::<BTreeMap<_, _>>(),
            about: None,
            confidence: None,
        }
    }

    fn full_slots() -> Vec<(&'static str, SlotValue)> {
        vec![
            ("taxon", SlotValue::text("Rhizophora mucronata")),
            ("latitude", SlotValue::decimal("-4.05", "deg")),
            ("longitude", SlotValue::decimal("39.66", "deg")),
            ("event_date", SlotValue::Timestamp(Utc.with_ymd_and_hms(2023, 3, 2, 9, 0, 0).unwrap())),
            ("sampling_effort", SlotValue::decimal("2.5", "h")),
        ]
    }

    #[test]
    fn full_record_conforms() {
        let report = conformance(&record(&full_slots()), &occurrence_schema());
        assert!(report.conformant);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn missing_latitude_is_reported() {
        let slots: Vec<_> = full_slots().into_iter().filter(|(k, _)| *k != "latitude").collect();
        let report = conformance(&record(&slots), &occurrence_schema());
        assert!(!report.conformant);
        assert_eq!(
            report.violations,
            vec![SlotViolation {
                role: "latitude".into(),
                reason: ViolationReason::Missing
            }]
        );
    }

    #[test]
    fn textual_date_is_wrong_datatype() {
        let mut slots = full_slots();
        slots[3].1 = SlotValue::text("2023-03-02");
        let report = conformance(&record(&slots), &occurrence_schema());
        assert_eq!(
            report.violations,
            vec![SlotViolation {
                role: "event_date".into(),
                reason: ViolationReason::WrongDatatype
            }]
        );
    }

    #[test]
    fn unit_range_and_allowed_violations() {
        let mut slots = full_slots();
        slots[1].1 = SlotValue::decimal("-4.05", "rad");
        slots[2].1 = SlotValue::decimal("200", "deg");
        slots.push(("basis", SlotValue::text("rumour")));
        let report = conformance(&record(&slots), &occurrence_schema());
        let reasons: Vec<_> = report.violations.iter().map(|v| (v.role.as_str(), v.reason)).collect();
        assert_eq!(
            reasons,
            vec![
                ("latitude", ViolationReason::WrongUnit),
                ("longitude", ViolationReason::OutOfRange),
                ("basis", ViolationReason::NotAllowed),
            ]
        );
    }

    #[test]
    fn register_rejects_bad_schemas() {
        let mut store = UnitStore::new();
        let mut empty = occurrence_schema();
        empty.slots.clear();
        assert!(matches!(register_schema(&mut store, empty), Err(Error::InvalidSchema { .. })));

        let mut dup = occurrence_schema();
        dup.slots.push(SlotSpecDef::new("taxon", Datatype::Text, false));
        assert!(matches!(register_schema(&mut store, dup), Err(Error::InvalidSchema { .. })));

        let mut unit_on_text = occurrence_schema();
        unit_on_text.slots[0].unit = Some("pct".into());
        assert!(matches!(register_schema(&mut store, unit_on_text), Err(Error::InvalidSchema { .. })));

        let id = register_schema(&mut store, occurrence_schema()).unwrap();
        assert_eq!(id, uid("ex:occurrence-record"));
        assert!(matches!(
            register_schema(&mut store, occurrence_schema()),
            Err(Error::DuplicateIdConflict(_))
        ));
    }

    #[test]
    fn conformance_against_missing_schema_is_not_found() {
        let store = UnitStore::new();
        let err = check_conformance(&store, &record(&full_slots()), &uid("ex:occurrence-record")).unwrap_err();
        assert!(matches!(err, Error::NotFound(_)));
    }
}
