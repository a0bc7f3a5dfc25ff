use std::collections::BTreeMap;

use aku_core::fixtures::{self, id};
use aku_core::schema::{
    check_conformance, compatible_action_units, conformance, register_schema, SlotSpecDef, StatementSchema,
    ViolationReason,
};
use aku_core::unit::{StatementClass, StatementUnit, UnitMeta};
use aku_core::value::Datatype;
use aku_core::{ActionClass, ActionUnit, EntityKind, Error, SlotSpec, SlotValue, Unit, UnitStore};
use proptest::prelude::*;
use serde_json::Value;

const FROZEN: &str = include_str!("../fixtures/mangrove.bundle.json");

fn statement(slots: BTreeMap<String, SlotValue>) -> StatementUnit {
    StatementUnit {
        base: UnitMeta::new(id("ex:probe"), "probe"),
        statement_class: StatementClass::Assertional,
        schema_id: None,
        slots,
        about: None,
        confidence: None,
    }
}

fn full_record() -> BTreeMap<String, SlotValue> {
    fixtures::fixture_store().statement(&id("ex:occ-1")).unwrap().slots.clone()
}

#[test]
fn occurrence_schema_registers_with_its_five_mandatory_roles() {
    let mut store = UnitStore::new();
    let schema = fixtures::occurrence_schema();
    assert_eq!(register_schema(&mut store, schema.clone()).unwrap(), id(fixtures::OCCURRENCE_SCHEMA));
    let mandatory: Vec<&str> = schema.slots.iter().filter(|s| s.mandatory).map(|s| s.role.as_str()).collect();
    assert_eq!(mandatory, ["taxon", "latitude", "longitude", "event_date", "sampling_effort"]);
    assert!(matches!(register_schema(&mut store, schema), Err(Error::DuplicateIdConflict(_))));
}

#[test]
fn malformed_schemas_are_invalid() {
    let mut store = UnitStore::new();
    let base = |slots| StatementSchema {
        base: UnitMeta::new(id("ex:bad"), "bad"),
        statement_class: StatementClass::Assertional,
        slots,
    };
    let cases = vec![
        vec![],
        vec![SlotSpecDef::new("a", Datatype::Text, true), SlotSpecDef::new("a", Datatype::Number, false)],
        vec![SlotSpecDef::new("a", Datatype::Text, false)],
        vec![SlotSpecDef::new("a", Datatype::Text, true).unit("pct")],
    ];
    for slots in cases {
        assert!(matches!(register_schema(&mut store, base(slots)), Err(Error::InvalidSchema { .. })));
    }
    assert!(store.is_empty());
}

#[test]
fn conformance_reports_each_violation() {
    let store = fixtures::fixture_store();
    let schema_id = id(fixtures::OCCURRENCE_SCHEMA);

    let report = check_conformance(&store, &statement(full_record()), &schema_id).unwrap();
    assert!(report.conformant);
    assert!(report.violations.is_empty());

    let missing = store.statement(&id("ex:occ-3")).unwrap();
    let report = check_conformance(&store, missing, &schema_id).unwrap();
    assert!(!report.conformant);
    assert_eq!(report.violations.len(), 1);
    assert_eq!(report.violations[0].role, "latitude");
    assert_eq!(report.violations[0].reason, ViolationReason::Missing);

    let mut slots = full_record();
    slots.insert("event_date".into(), SlotValue::text("2025-11-04"));
    slots.insert("latitude".into(), SlotValue::number(95, "deg"));
    slots.insert("sampling_effort".into(), SlotValue::number(3, "min"));
    slots.insert("basis".into(), SlotValue::text("hearsay"));
    let report = check_conformance(&store, &statement(slots), &schema_id).unwrap();
    let got: Vec<(&str, ViolationReason)> =
        report.violations.iter().map(|v| (v.role.as_str(), v.reason)).collect();
    assert_eq!(
        got,
        [
            ("latitude", ViolationReason::OutOfRange),
            ("event_date", ViolationReason::WrongDatatype),
            ("sampling_effort", ViolationReason::WrongUnit),
            ("basis", ViolationReason::NotAllowed),
        ]
    );

    assert!(matches!(
        check_conformance(&store, &statement(full_record()), &id("ex:absent")),
        Err(Error::NotFound(_))
    ));
}

#[test]
fn affordances_for_the_occurrence_schema_match_a_raw_scan() {
    let raw: Value = serde_json::from_str(FROZEN).unwrap();
    let mut scanned: Vec<String> = raw["units"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|u| u["kind"] == "action")
        .filter(|u| {
            u["inputs"]
                .as_array()
                .is_some_and(|ins| ins.iter().any(|s| s["schema_id"] == fixtures::OCCURRENCE_SCHEMA))
        })
        .map(|u| u["id"].as_str().unwrap().to_string())
        .collect();
    scanned.sort();
    assert_eq!(scanned, [fixtures::DERIVE_EBV]);

    let store = fixtures::fixture_store();
    let found = compatible_action_units(&store, &id(fixtures::OCCURRENCE_SCHEMA)).unwrap();
    assert_eq!(found.iter().map(|i| i.to_string()).collect::<Vec<_>>(), scanned);
}

fn transformational_reader(store: &mut UnitStore, au_id: &str, schema: &str) {
    let base = fixtures::fixture_store();
    let template = base.action(&id(fixtures::DERIVE_EBV)).unwrap().clone();
    let mut au = ActionUnit::new(
        UnitMeta::new(id(au_id), au_id),
        ActionClass::Transformational,
        template.plan.clone(),
        template.conditions.clone(),
        template.objective.clone(),
    );
    au.inputs = vec![SlotSpec::input("records", EntityKind::Information).with_schema(id(schema))];
    au.outputs = vec![SlotSpec::output("summary", EntityKind::Information)];
    store.put_unit(au).unwrap();
}

#[test]
fn unused_schema_has_no_affordances_and_shared_schema_lists_both_readers() {
    let mut store = fixtures::fixture_store();
    let mut other = fixtures::occurrence_schema();
    other.base.id = id("ex:unused-schema");
    register_schema(&mut store, other).unwrap();
    assert!(compatible_action_units(&store, &id("ex:unused-schema")).unwrap().is_empty());

    transformational_reader(&mut store, "ex:zz-reader", "ex:unused-schema");
    transformational_reader(&mut store, "ex:aa-reader", "ex:unused-schema");
    assert_eq!(
        compatible_action_units(&store, &id("ex:unused-schema")).unwrap(),
        vec![id("ex:aa-reader"), id("ex:zz-reader")]
    );
    assert!(matches!(compatible_action_units(&store, &id("ex:absent")), Err(Error::NotFound(_))));
}

proptest! {
    #[test]
    fn dropping_slots_keeps_or_breaks_conformance_as_the_mandatory_flag_says(mask in prop::collection::vec(any::<bool>(), 6)) {
        let schema = fixtures::occurrence_schema();
        let mut slots = full_record();
        let mut dropped_mandatory = false;
        for (spec, drop) in schema.slots.iter().zip(&mask) {
            if *drop {
                slots.remove(&spec.role);
                dropped_mandatory |= spec.mandatory;
            }
        }
        let report = conformance(&statement(slots.clone()), &schema);
        prop_assert_eq!(report.conformant, !dropped_mandatory);
        prop_assert_eq!(report.conformant, report.violations.is_empty());
        prop_assert_eq!(report.clone(), conformance(&statement(slots), &schema));
    }

    #[test]
    fn affordance_lookup_equals_brute_force(assign in prop::collection::vec(prop::option::of(0usize..3), 1..8)) {
        let mut store = fixtures::fixture_store();
        let schemas = ["ex:s-0", "ex:s-1", "ex:s-2"];
        for s in schemas {
            let mut schema = fixtures::occurrence_schema();
            schema.base.id = id(s);
            register_schema(&mut store, schema).unwrap();
        }
        let mut expected: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        for (i, choice) in assign.iter().enumerate() {
            let au_id = format!("ex:reader-{i}");
            match choice {
                Some(k) => {
                    transformational_reader(&mut store, &au_id, schemas[*k]);
                    expected.entry(schemas[*k]).or_default().push(au_id);
                }
                None => {
                    let mut au = store.action(&id(fixtures::DERIVE_EBV)).unwrap().clone();
                    au.base = UnitMeta::new(id(&au_id), "untyped");
                    au.inputs = vec![SlotSpec::input("notes", EntityKind::Information)];
                    store.put_unit(Unit::from(au)).unwrap();
                }
            }
        }
        for s in schemas {
            let brute: Vec<String> = store
                .action_units()
                .filter(|a| a.inputs.iter().any(|x| x.schema_id.as_ref() == Some(&id(s))))
                .map(|a| a.base.id.to_string())
                .collect();
            let mut want = expected.get(s).cloned().unwrap_or_default();
            want.sort();
            let got: Vec<String> = compatible_action_units(&store, &id(s)).unwrap().iter().map(|i| i.to_string()).collect();
            prop_assert_eq!(&got, &brute);
            prop_assert_eq!(&got, &want);
        }
    }
}
