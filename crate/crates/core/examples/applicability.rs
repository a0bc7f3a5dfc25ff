//! Evaluates the mangrove restoration procedure against three survey sites and prints the
//! per-condition truth values, verdict, grade and gaps.
//!
//! `cargo run -p aku-core --example applicability`

use aku_core::fixtures::{self, id};
use aku_core::Engine;

fn main() -> aku_core::Result<()> {
    let engine = Engine::default();
    let store = fixtures::fixture_store();
    for site in [fixtures::SITE_A, fixtures::SITE_B, fixtures::SITE_C] {
        let report = engine.evaluate_action_unit(&store, &id(fixtures::MANGROVE), &id(site))?;
        println!("{site}: {:?} ({:?})", report.verdict, report.grade);
        for c in &report.per_condition {
            println!("  {:<8} {}", c.value.to_string(), c.label);
        }
        for gap in &report.gaps {
            println!("  gap: {} [{:?}] needs {}", gap.condition_label, gap.reason, gap.needed);
        }
    }
    Ok(())
}
