//! Parses condition expressions and evaluates them with three-valued logic against a
//! situation, showing how missing data yields UNKNOWN rather than false.
//!
//! `cargo run -p aku-core --example condition_language`

use aku_core::fixtures::{self, id};
use aku_core::{parse_condition, Engine};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let engine = Engine::default();
    let store = fixtures::fixture_store();
    let expressions = [
        "site.salinity_psu BETWEEN 5 psu AND 35 psu",
        "site.salinity_psu > 5 psu OR site.tidal_inundation_pct < 60 pct",
        "NOT site.ongoing_disturbance == true AND EXISTS site.salinity_psu",
    ];
    for text in expressions {
        let expr = parse_condition(text)?;
        for site in [fixtures::SITE_A, fixtures::SITE_C] {
            let eval = engine.evaluate_condition(&store, &expr, &id(site))?;
            println!("{:<8} {site:<10} {expr}", eval.value.to_string());
        }
    }
    match parse_condition("site.salinity_psu >") {
        Err(e) => println!("parse error: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
