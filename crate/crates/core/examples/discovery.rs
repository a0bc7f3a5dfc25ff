//! Forward discovery ranks procedures for a situation; reverse discovery lists the
//! situations where a procedure applies.
//!
//! `cargo run -p aku-core --example discovery`

use aku_core::fixtures::{self, id};
use aku_core::{Engine, ObjectiveFilter};

fn main() -> aku_core::Result<()> {
    let engine = Engine::default();
    let store = fixtures::fixture_store();

    let filter = ObjectiveFilter {
        include_inapplicable: true,
        ..Default::default()
    };
    println!("procedures for {}:", fixtures::SITE_A);
    for c in engine.discover_forward(&store, &id(fixtures::SITE_A), &filter)? {
        println!("  {:<14} {:<12} {:?} {}", format!("{:?}", c.report.verdict), format!("{:?}", c.report.grade), c.level, c.action_unit);
    }

    println!("situations for {}:", fixtures::MANGROVE);
    for v in engine.discover_reverse(&store, &id(fixtures::MANGROVE))? {
        println!("  {:<14} {}", format!("{:?}", v.verdict), v.context_id);
    }
    Ok(())
}
