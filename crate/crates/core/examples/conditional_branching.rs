//! First-match branch selection over the fingerprint decision: one site per outcome
//! (branch 0, branch 1, deferred, blocked on missing data).
//!
//! `cargo run -p aku-core --example conditional_branching`

use aku_core::fixtures::{self, id};
use aku_core::{Engine, ExecuteOptions};

fn main() -> aku_core::Result<()> {
    let engine = Engine::default();
    let mut store = fixtures::fixture_store();
    for site in fixtures::FP_SITES {
        let selection = engine.select_branch(&store, &id(fixtures::FINGERPRINT), &id(site))?;
        let guards: Vec<String> = selection.guards.iter().map(|g| format!("{}={}", g.index, g.value)).collect();
        print!("{site}: {:?}", selection.outcome);
        if let Some(action) = &selection.action {
            print!(" -> {action}");
        }
        println!("  [{}]", guards.join(" "));

        let record = engine.execute(&mut store, &id(fixtures::FINGERPRINT), &id(site), ExecuteOptions::default())?;
        println!("  execution {}: {:?}", record.base.id, record.status);
    }
    Ok(())
}
