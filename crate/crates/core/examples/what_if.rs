//! Asks what would change at site B if tidal inundation were 40 %: the violated condition
//! flips and the procedure becomes applicable. The store itself is left untouched.
//!
//! `cargo run -p aku-core --example what_if`

use aku_core::fixtures::{self, id};
use aku_core::{bundle_to_string, Engine, SlotValue};

fn main() -> aku_core::Result<()> {
    let engine = Engine::default();
    let store = fixtures::fixture_store();
    let before = bundle_to_string(&store)?;

    let site = store.context(&id(fixtures::SITE_B))?;
    let mut drier = site.current("site", "tidal_inundation_pct").expect("fixture asserts inundation").clone();
    drier.value = SlotValue::number(40, "pct");

    let diff = engine.what_if(&store, &id(fixtures::MANGROVE), &id(fixtures::SITE_B), vec![drier])?;
    println!("before: {:?} ({:?})", diff.before.verdict, diff.before.grade);
    println!("after:  {:?} ({:?})", diff.after.verdict, diff.after.grade);
    for flip in &diff.flips {
        println!("  {}: {} -> {}", flip.label, flip.from, flip.to);
    }
    assert_eq!(bundle_to_string(&store)?, before, "what-if must not mutate the store");
    Ok(())
}
