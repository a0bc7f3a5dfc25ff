//! Walks the mangrove procedure up the grounding ladder: structural without a situation,
//! applicable at site A, validated once successful evidence is recorded.
//!
//! `cargo run -p aku-core --example grounding_ladder`

use std::collections::BTreeMap;

use aku_core::fixtures::{self, id};
use aku_core::unit::UnitMeta;
use aku_core::{Engine, EvidenceUnit, Outcome, SlotValue};

fn main() -> aku_core::Result<()> {
    let engine = Engine::default();
    let mut store = fixtures::fixture_store();
    let au = id(fixtures::MANGROVE);
    let site = id(fixtures::SITE_A);

    println!("no situation: {:?}", engine.grounding_level(&store, &au, None)?.level);
    println!("at {site}:   {:?}", engine.grounding_level(&store, &au, Some(&site))?.level);

    let evidence = EvidenceUnit {
        base: UnitMeta::new(store.next_id("ex:evidence-"), "seedling survival after one year"),
        action_unit: au.clone(),
        context: site.clone(),
        outcome: Outcome::Success,
        metrics: BTreeMap::from([("survival".to_string(), SlotValue::number(80, "pct"))]),
        recorded_at: fixtures::surveyed_at(),
    };
    let evidence_id = engine.record_evidence(&mut store, evidence)?;
    println!("with {evidence_id}: {:?}", engine.grounding_level(&store, &au, Some(&site))?.level);
    Ok(())
}
