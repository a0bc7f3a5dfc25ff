//! Writes the fixture bundle to a file (default: stdout) and checks that it loads back
//! to the same store.
//!
//! `cargo run -p aku-core --example export_fixture -- crates/core/fixtures/mangrove.bundle.json`

use aku_core::{bundle_from_str, bundle_to_string, fixtures};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let store = fixtures::fixture_store();
    let text = bundle_to_string(&store)?;
    assert_eq!(bundle_from_str(&text)?, store, "bundle must round-trip");
    match std::env::args().nth(1) {
        Some(path) => {
            std::fs::write(&path, &text)?;
            eprintln!("wrote {} units to {path}", store.len());
        }
        None => print!("{text}"),
    }
    Ok(())
}
