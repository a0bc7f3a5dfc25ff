//! A small worked bundle: coastal restoration, an ecological-fingerprint decision, a
//! two-step histology workflow, an irrigation rule and a biodiversity-variable derivation.
//!
//! The same units are frozen in `fixtures/mangrove.bundle.json`.

use std::collections::BTreeMap;

use chrono::{TimeZone, Utc};

use crate::action::{
    ActionClass, ActionUnit, Binding, Branch, ChildStep, EntityKind, EpistemicDirection, ObjectiveClass,
    ObjectiveUnit, OrderingEntry, PlanKind, PlanSpecUnit, SlotSpec,
};
use crate::condition::{ApplicabilityConditionSet, ConditionItem, ConditionKind, Path};
use crate::id::{uid, UnitId};
use crate::orchestrate::ExecutorRegistry;
use crate::schema::{conformance, SlotSpecDef, StatementSchema};
use crate::store::UnitStore;
use crate::unit::{Assertion, ContextUnit, Frame, Quality, StatementClass, StatementUnit, Unit, UnitMeta};
use crate::value::{Datatype, SlotValue, Timestamp};

pub const MANGROVE: &str = "ex:mangrove";
pub const SITE_A: &str = "ex:site-A";
pub const SITE_B: &str = "ex:site-B";
pub const SITE_C: &str = "ex:site-C";
pub const OCCURRENCE_SCHEMA: &str = "ex:occurrence-schema";
pub const DERIVE_EBV: &str = "ex:derive-ebv";
pub const SPECIES_ID: &str = "ex:species-id";
pub const SURVEY: &str = "ex:survey-1";
pub const FINGERPRINT: &str = "ex:fingerprint-decision";
pub const PASSIVE_REGENERATION: &str = "ex:passive-regeneration";
pub const HYDROLOGICAL_RESTORATION: &str = "ex:hydrological-restoration";
pub const FP_SITES: [&str; 4] = ["ex:fp-site-1", "ex:fp-site-2", "ex:fp-site-3", "ex:fp-site-4"];
pub const HISTOLOGY: &str = "ex:histology-analysis";
pub const TISSUE_STAINING: &str = "ex:tissue-staining";
pub const COMPOSITIONAL_ID: &str = "ex:compositional-identification";
pub const HISTOLOGY_LAB: &str = "ex:histology-lab";
pub const IRRIGATION: &str = "ex:irrigation-decision";
pub const IRRIGATE: &str = "ex:irrigate";
pub const FIELD: &str = "ex:field-1";
pub const SOURCE_NOTES: &str = "ex:source-notes";
/// Executor name used by the biodiversity-variable derivation plan.
pub const SPECIES_RICHNESS_EXECUTOR: &str = "ebv.species_richness";

fn at(y: i32, m: u32, d: u32) -> Timestamp {
    Utc.with_ymd_and_hms(y, m, d, 0, 0, 0).single().expect("valid date")
}

/// Creation time stamped on every fixture unit.
pub fn created_at() -> Timestamp {
    at(2026, 1, 15)
}

/// Observation time of the survey assertions.
pub fn surveyed_at() -> Timestamp {
    at(2026, 3, 1)
}

fn meta(id: &str, label: &str) -> UnitMeta {
    UnitMeta::new(uid(id), label).with_source("fixture", created_at())
}

fn observed(subject: &str, attribute: &str, value: SlotValue) -> Assertion {
    Assertion::new(subject, attribute, value, Quality::Observed, surveyed_at()).with_provenance("field survey")
}

fn num(s: &str, unit: &str) -> SlotValue {
    SlotValue::decimal(s, unit)
}

fn item(kind: ConditionKind, label: &str, source: &str) -> ConditionItem {
    ConditionItem::new(kind, label, source)
}

fn conditions(id: &str, label: &str, items: Vec<ConditionItem>) -> Unit {
    ApplicabilityConditionSet::new(meta(id, label), items).into()
}

fn directive_plan(id: &str, kind: PlanKind, text: &str) -> Unit {
    PlanSpecUnit::directive(meta(id, text), kind, text).into()
}

fn objective(id: &str, class: ObjectiveClass, description: &str, tags: &[&str]) -> Unit {
    ObjectiveUnit {
        base: meta(id, description),
        objective_class: class,
        description: description.to_string(),
        tags: tags.iter().map(|t| t.to_string()).collect(),
        success_criteria: None,
    }
    .into()
}

/// An action unit whose compound parts are its plan, condition set and objective.
fn action(id: &str, label: &str, class: ActionClass, plan: &str, conds: &str, goal: &str) -> ActionUnit {
    let base = meta(id, label).with_parts(vec![uid(plan), uid(conds), uid(goal)]);
    ActionUnit::new(base, class, uid(plan), uid(conds), uid(goal))
}

fn paths(list: &[&str]) -> Vec<Path> {
    list.iter().map(|p| Path::parse(p).expect("valid path")).collect()
}

fn site(id: &str, label: &str, assertions: Vec<Assertion>) -> Unit {
    let mut ctx = ContextUnit::situation(uid(id), label);
    ctx.base.provenance = meta(id, label).provenance;
    ctx.assertions = assertions;
    ctx.into()
}

/// Baseline assertions shared by the three coastal sites.
fn coastal(inundation: &str, salinity: Option<&str>) -> Vec<Assertion> {
    let mut a = vec![
        observed("site", "tidal_inundation_pct", num(inundation, "pct")),
        observed("site", "sediment_accretion_mm_per_yr", num("2", "mm_per_yr")),
    ];
    if let Some(s) = salinity {
        a.push(observed("site", "salinity_psu", num(s, "psu")));
    }
    a.push(observed("site", "wave_energy_index", num("0.3", "1")));
    a.push(observed("site", "ongoing_disturbance", SlotValue::Boolean(false)));
    a
}

fn mangrove_units() -> Vec<Unit> {
    let c = ConditionKind::Contextual;
    let mut au = action(
        MANGROVE,
        "Mangrove planting on a degraded coastal site",
        ActionClass::Intervention,
        "ex:mangrove-plan",
        "ex:mangrove-conditions",
        "ex:mangrove-objective",
    );
    au.inputs = vec![
        SlotSpec::input("site", EntityKind::Material),
        SlotSpec::input("propagules", EntityKind::Material),
    ];
    au.outputs = vec![SlotSpec::output("planted_site", EntityKind::Material)];
    au.context_requirements = paths(&[
        "site.tidal_inundation_pct",
        "site.sediment_accretion_mm_per_yr",
        "site.salinity_psu",
        "site.wave_energy_index",
        "site.ongoing_disturbance",
    ]);
    vec![
        directive_plan(
            "ex:mangrove-plan",
            PlanKind::Procedural,
            "Plant nursery-raised propagules across the intertidal elevation band and monitor survival",
        ),
        conditions(
            "ex:mangrove-conditions",
            "Site conditions for mangrove planting",
            vec![
                item(c, "tidal_inundation", "site.tidal_inundation_pct BETWEEN 20 pct AND 75 pct"),
                item(c, "sediment_accretion", "site.sediment_accretion_mm_per_yr >= 0 mm_per_yr"),
                item(c, "salinity", "site.salinity_psu <= 36 psu"),
                item(c, "wave_energy", "site.wave_energy_index < 0.5"),
                item(c, "disturbance", "site.ongoing_disturbance == false"),
            ],
        ),
        objective(
            "ex:mangrove-objective",
            ObjectiveClass::Intervention,
            "Re-establish mangrove cover",
            &["restoration", "mangrove", "coastal"],
        ),
        au.into(),
        site(SITE_A, "Coastal site A", coastal("40", Some("28"))),
        site(SITE_B, "Coastal site B", coastal("10", Some("28"))),
        site(SITE_C, "Coastal site C", coastal("40", None)),
    ]
}

fn occurrence(id: &str, taxon: &str, latitude: Option<&str>) -> Unit {
    let mut slots = BTreeMap::new();
    slots.insert("taxon".to_string(), SlotValue::text(taxon));
    if let Some(lat) = latitude {
        slots.insert("latitude".to_string(), num(lat, "deg"));
    }
    slots.insert("longitude".to_string(), num("-80.9", "deg"));
    slots.insert("event_date".to_string(), SlotValue::Timestamp(at(2025, 11, 4)));
    slots.insert("sampling_effort".to_string(), num("2.5", "h"));
    slots.insert("basis".to_string(), SlotValue::text("human_observation"));
    StatementUnit {
        base: meta(id, &format!("Occurrence of {taxon}")),
        statement_class: StatementClass::Assertional,
        schema_id: None,
        slots,
        about: Some(uid(SITE_A)),
        confidence: Some(0.9),
    }
    .into()
}

/// Schema for species occurrence records.
pub fn occurrence_schema() -> StatementSchema {
    StatementSchema {
        base: meta(OCCURRENCE_SCHEMA, "Species occurrence record"),
        statement_class: StatementClass::Assertional,
        slots: vec![
            SlotSpecDef::new("taxon", Datatype::Text, true),
            SlotSpecDef::new("latitude", Datatype::Number, true)
                .unit("deg")
                .range((-90).into(), 90.into()),
            SlotSpecDef::new("longitude", Datatype::Number, true)
                .unit("deg")
                .range((-180).into(), 180.into()),
            SlotSpecDef::new("event_date", Datatype::Timestamp, true),
            SlotSpecDef::new("sampling_effort", Datatype::Number, true).unit("h"),
            SlotSpecDef::new("basis", Datatype::Text, false).allowed(vec![
                SlotValue::text("human_observation"),
                SlotValue::text("preserved_specimen"),
                SlotValue::text("machine_observation"),
            ]),
        ],
    }
}

fn monitoring_units() -> Vec<Unit> {
    let mut ebv = action(
        DERIVE_EBV,
        "Derive species richness from occurrence records",
        ActionClass::Transformational,
        "ex:ebv-plan",
        "ex:ebv-conditions",
        "ex:ebv-objective",
    );
    ebv.inputs = vec![SlotSpec::input("occurrence", EntityKind::Information).with_schema(uid(OCCURRENCE_SCHEMA))];
    ebv.outputs = vec![SlotSpec::output("species_richness", EntityKind::Information)];

    let mut species = action(
        SPECIES_ID,
        "Identify a specimen to species",
        ActionClass::Epistemic,
        "ex:species-id-plan",
        "ex:species-id-conditions",
        "ex:species-id-objective",
    );
    species.epistemic_direction = Some(EpistemicDirection::Describe);
    species.inputs = vec![SlotSpec::input("specimen", EntityKind::Material)];
    species.outputs = vec![SlotSpec::output("taxon_name", EntityKind::Information)];

    let mut plan = PlanSpecUnit::directive(
        meta("ex:ebv-plan", "Species richness algorithm"),
        PlanKind::Algorithmic,
        "Count the distinct taxa among conforming occurrence records",
    );
    plan.executable = Some(SPECIES_RICHNESS_EXECUTOR.to_string());

    vec![
        occurrence_schema().into(),
        occurrence("ex:occ-1", "Rhizophora mangle", Some("25.1")),
        occurrence("ex:occ-2", "Avicennia germinans", Some("25.2")),
        occurrence("ex:occ-3", "Laguncularia racemosa", None),
        plan.into(),
        conditions("ex:ebv-conditions", "Input records must be well-formed", vec![]),
        objective(
            "ex:ebv-objective",
            ObjectiveClass::Transformational,
            "Derive an essential biodiversity variable",
            &["monitoring", "ebv"],
        ),
        ebv.into(),
        directive_plan(
            "ex:species-id-plan",
            PlanKind::Diagnostic,
            "Compare diagnostic characters of the specimen with the identification key and name the species",
        ),
        conditions(
            "ex:species-id-conditions",
            "Observer competence",
            vec![item(
                ConditionKind::Referential,
                "observer_competence",
                "ATTESTED(taxonomic_identification)",
            )],
        ),
        objective(
            "ex:species-id-objective",
            ObjectiveClass::Epistemic,
            "Name the species of a specimen",
            &["monitoring"],
        ),
        species.into(),
        site(
            SURVEY,
            "Monitoring survey",
            vec![
                observed("input", "bind:occurrence", SlotValue::Ref(uid("ex:occ-1"))),
                observed("observer", "attested:taxonomic_identification", SlotValue::Boolean(true)),
            ],
        ),
    ]
}

fn fingerprint_units() -> Vec<Unit> {
    let c = ConditionKind::Contextual;
    let mut decision = action(
        FINGERPRINT,
        "Choose a restoration pathway from the ecosystem fingerprint",
        ActionClass::Conditional,
        "ex:fingerprint-plan",
        "ex:fingerprint-conditions",
        "ex:fingerprint-objective",
    );
    decision.branches = vec![
        Branch {
            guard: uid("ex:guard-connected"),
            action: uid(PASSIVE_REGENERATION),
        },
        Branch {
            guard: uid("ex:guard-restorable"),
            action: uid(HYDROLOGICAL_RESTORATION),
        },
    ];

    let target = |id: &str, label: &str, plan: &str, output: &str| {
        let mut au = action(id, label, ActionClass::Intervention, plan, "ex:fingerprint-conditions", "ex:fingerprint-objective");
        au.inputs = vec![SlotSpec::input("site", EntityKind::Material)];
        au.outputs = vec![SlotSpec::output(output, EntityKind::Material)];
        au.context_requirements = paths(&["site.habitat"]);
        Unit::from(au)
    };

    let fp = |i: usize, extra: Vec<Assertion>| {
        let mut a = vec![observed("site", "habitat", SlotValue::text("mangrove"))];
        a.extend(extra);
        site(FP_SITES[i], &format!("Fingerprint site {}", i + 1), a)
    };
    let connectivity = |v: &str| observed("site", "hydrological_connectivity", num(v, "1"));
    let restorable = |b: bool| observed("site", "connectivity_restorable", SlotValue::Boolean(b));
    let earlier = Assertion::new(
        "site",
        "hydrological_connectivity",
        num("0.5", "1"),
        Quality::Inferred,
        at(2024, 3, 1),
    )
    .with_provenance("remote sensing");

    vec![
        directive_plan(
            "ex:fingerprint-plan",
            PlanKind::Diagnostic,
            "If hydrological connectivity is high, let the site regenerate; if it can be restored, restore it; otherwise flag the site and reassess later",
        ),
        conditions(
            "ex:fingerprint-conditions",
            "Coastal wetland habitat",
            vec![item(c, "habitat", r#"site.habitat IN {"mangrove", "saltmarsh"}"#)],
        ),
        conditions(
            "ex:guard-connected",
            "Connectivity is high",
            vec![item(c, "connectivity", "site.hydrological_connectivity > 0.6")],
        ),
        conditions(
            "ex:guard-restorable",
            "Connectivity can be restored",
            vec![item(c, "restorable", "site.connectivity_restorable == true")],
        ),
        objective(
            "ex:fingerprint-objective",
            ObjectiveClass::Intervention,
            "Recover a functioning coastal wetland",
            &["restoration", "wetland"],
        ),
        directive_plan(
            "ex:passive-regeneration-plan",
            PlanKind::Procedural,
            "Remove barriers to propagule dispersal and monitor natural recruitment",
        ),
        directive_plan(
            "ex:hydrological-restoration-plan",
            PlanKind::Procedural,
            "Reopen tidal channels and restore hydrological exchange before planting",
        ),
        target(
            PASSIVE_REGENERATION,
            "Passive natural regeneration",
            "ex:passive-regeneration-plan",
            "regenerating_site",
        ),
        target(
            HYDROLOGICAL_RESTORATION,
            "Hydrological restoration",
            "ex:hydrological-restoration-plan",
            "reconnected_site",
        ),
        decision.into(),
        fp(0, vec![earlier, connectivity("0.8"), restorable(false)]),
        fp(1, vec![connectivity("0.4"), restorable(true)]),
        fp(2, vec![connectivity("0.3"), restorable(false)]),
        fp(3, vec![restorable(true)]),
    ]
}

fn histology_units() -> Vec<Unit> {
    let mut composite = action(
        HISTOLOGY,
        "Histological analysis",
        ActionClass::Composite,
        "ex:histology-plan",
        "ex:histology-conditions",
        "ex:histology-objective",
    );
    composite.inputs = vec![SlotSpec::input("tissue_sample", EntityKind::Material)];
    composite.outputs = vec![SlotSpec::output("composition", EntityKind::Information)];
    composite.children = vec![
        ChildStep {
            step_id: "step-1".to_string(),
            action_unit: uid(TISSUE_STAINING),
            precedes: vec!["step-2".to_string()],
            bindings: vec![],
        },
        ChildStep {
            step_id: "step-2".to_string(),
            action_unit: uid(COMPOSITIONAL_ID),
            precedes: vec![],
            bindings: vec![Binding {
                from_step: "step-1".to_string(),
                from_output_role: "stained_section".to_string(),
                to_input_role: "stained_section".to_string(),
            }],
        },
    ];
    let mut plan = PlanSpecUnit::directive(
        meta("ex:histology-plan", "Stain, then identify"),
        PlanKind::Procedural,
        "Prepare and stain the tissue, then identify its composition from the stained section",
    );
    plan.ordering = vec![
        OrderingEntry {
            step: "step-1".to_string(),
            precedes: vec!["step-2".to_string()],
        },
        OrderingEntry {
            step: "step-2".to_string(),
            precedes: vec![],
        },
    ];

    let mut staining = action(
        TISSUE_STAINING,
        "Tissue preparation and staining",
        ActionClass::Intervention,
        "ex:staining-plan",
        "ex:staining-conditions",
        "ex:staining-objective",
    );
    staining.inputs = vec![SlotSpec::input("tissue_sample", EntityKind::Material)];
    staining.outputs = vec![SlotSpec::output("stained_section", EntityKind::Material)];
    staining.context_requirements = paths(&["sample.state"]);

    let mut identification = action(
        COMPOSITIONAL_ID,
        "Compositional identification",
        ActionClass::Epistemic,
        "ex:identification-plan",
        "ex:identification-conditions",
        "ex:identification-objective",
    );
    identification.epistemic_direction = Some(EpistemicDirection::Describe);
    identification.inputs = vec![SlotSpec::input("stained_section", EntityKind::Material)];
    identification.outputs = vec![SlotSpec::output("composition", EntityKind::Information)];

    let untreated = || {
        vec![item(
            ConditionKind::Contextual,
            "untreated_sample",
            r#"sample.state == "untreated""#,
        )]
    };

    vec![
        plan.into(),
        conditions("ex:histology-conditions", "An untreated sample is available", untreated()),
        objective(
            "ex:histology-objective",
            ObjectiveClass::Epistemic,
            "Determine the tissue composition of a sample",
            &["histology", "diagnosis"],
        ),
        directive_plan(
            "ex:staining-plan",
            PlanKind::Procedural,
            "Fix, embed, section and stain the tissue sample",
        ),
        conditions("ex:staining-conditions", "The sample has not been treated yet", untreated()),
        objective(
            "ex:staining-objective",
            ObjectiveClass::Intervention,
            "Produce a stained tissue section",
            &["histology"],
        ),
        directive_plan(
            "ex:identification-plan",
            PlanKind::Diagnostic,
            "Examine the stained section under the microscope and describe its tissue composition",
        ),
        conditions(
            "ex:identification-conditions",
            "Examiner competence",
            vec![item(
                ConditionKind::Referential,
                "examiner_competence",
                "ATTESTED(histological_identification)",
            )],
        ),
        objective(
            "ex:identification-objective",
            ObjectiveClass::Epistemic,
            "Describe the composition of a stained section",
            &["histology"],
        ),
        staining.into(),
        identification.into(),
        composite.into(),
        site(
            HISTOLOGY_LAB,
            "Histology laboratory",
            vec![
                observed("sample", "state", SlotValue::text("untreated")),
                observed("technician", "attested:histological_identification", SlotValue::Boolean(true)),
            ],
        ),
    ]
}

fn irrigation_units() -> Vec<Unit> {
    let mut decision = action(
        IRRIGATION,
        "Irrigate when the soil is dry",
        ActionClass::Conditional,
        "ex:irrigation-plan",
        "ex:irrigation-conditions",
        "ex:irrigation-objective",
    );
    decision.branches = vec![Branch {
        guard: uid("ex:guard-dry"),
        action: uid(IRRIGATE),
    }];
    let mut irrigate = action(
        IRRIGATE,
        "Irrigation",
        ActionClass::Intervention,
        "ex:irrigate-plan",
        "ex:irrigate-conditions",
        "ex:irrigation-objective",
    );
    irrigate.inputs = vec![SlotSpec::input("field", EntityKind::Material)];
    irrigate.outputs = vec![SlotSpec::output("irrigated_field", EntityKind::Material)];
    irrigate.context_requirements = paths(&["field.water_available"]);
    let c = ConditionKind::Contextual;
    vec![
        directive_plan(
            "ex:irrigation-plan",
            PlanKind::Diagnostic,
            "If soil moisture is below the threshold, irrigate",
        ),
        conditions(
            "ex:irrigation-conditions",
            "Soil moisture is monitored",
            vec![item(c, "moisture_recorded", "EXISTS field.soil_moisture")],
        ),
        conditions(
            "ex:guard-dry",
            "Soil moisture below threshold",
            vec![item(c, "soil_dry", "field.soil_moisture < 0.2")],
        ),
        directive_plan(
            "ex:irrigate-plan",
            PlanKind::Procedural,
            "Open the irrigation valves until the field reaches field capacity",
        ),
        conditions(
            "ex:irrigate-conditions",
            "Water is available",
            vec![item(c, "water_available", "field.water_available == true")],
        ),
        objective(
            "ex:irrigation-objective",
            ObjectiveClass::Intervention,
            "Keep the crop out of water stress",
            &["agriculture", "irrigation"],
        ),
        irrigate.into(),
        decision.into(),
        site(
            FIELD,
            "Field 1",
            vec![
                observed("field", "soil_moisture", num("0.1", "1")),
                observed("field", "water_available", SlotValue::Boolean(true)),
            ],
        ),
    ]
}

fn document_units() -> Vec<Unit> {
    let mut notes = ContextUnit {
        base: meta(SOURCE_NOTES, "Notes taken from the restoration literature"),
        frame: Frame::Document,
        assertions: vec![],
    };
    notes.assertions.push(
        Assertion::new(
            "ex:mangrove",
            "salinity_tolerance_psu",
            num("36", "psu"),
            Quality::Inferred,
            created_at(),
        )
        .with_provenance("literature"),
    );
    let tolerance = StatementUnit {
        base: meta("ex:salinity-tolerance", "Mangrove seedlings tolerate salinity up to 36 psu"),
        statement_class: StatementClass::Prototypical,
        schema_id: None,
        slots: BTreeMap::from([
            ("organism".to_string(), SlotValue::text("mangrove seedling")),
            ("max_salinity".to_string(), num("36", "psu")),
        ]),
        about: Some(uid(MANGROVE)),
        confidence: Some(0.8),
    };
    vec![notes.into(), tolerance.into()]
}

/// Every fixture unit, in insertion order.
pub fn fixture_units() -> Vec<Unit> {
    let mut units = Vec::new();
    units.extend(mangrove_units());
    units.extend(monitoring_units());
    units.extend(fingerprint_units());
    units.extend(histology_units());
    units.extend(irrigation_units());
    units.extend(document_units());
    units
}

/// A store holding the whole fixture bundle.
pub fn fixture_store() -> UnitStore {
    let mut store = UnitStore::new();
    store.put_units(fixture_units()).expect("fixture units are consistent");
    store
}

/// Registers the executors the fixture plans name.
pub fn register_fixture_executors(registry: &mut ExecutorRegistry) {
    registry.register(SPECIES_RICHNESS_EXECUTOR, |input| {
        let schema = match input.store.schema(&uid(OCCURRENCE_SCHEMA)) {
            Ok(s) => s,
            Err(e) => return Err(e.to_string()),
        };
        let taxa: std::collections::BTreeSet<String> = input
            .store
            .iter()
            .filter_map(|u| match u {
                Unit::Statement(s) if conformance(s, schema).conformant => s.slots.get("taxon").map(|t| t.to_string()),
                _ => None,
            })
            .collect();
        Ok(BTreeMap::from([(
            "species_richness".to_string(),
            SlotValue::number(taxa.len() as i64, "1"),
        )]))
    });
}

/// Id helper for callers that work with the fixture constants.
pub fn id(s: &str) -> UnitId {
    uid(s)
}
