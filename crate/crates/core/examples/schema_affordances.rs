//! Checks a statement against the occurrence schema and lists the procedures whose inputs
//! that schema can feed, then runs the automatic species-richness derivation.
//!
//! `cargo run -p aku-core --example schema_affordances`

use aku_core::fixtures::{self, id};
use aku_core::schema::compatible_action_units;
use aku_core::{Engine, ExecuteOptions, ExecutorRegistry};

fn main() -> aku_core::Result<()> {
    let mut store = fixtures::fixture_store();
    let schema = id(fixtures::OCCURRENCE_SCHEMA);
    println!("procedures consuming {schema}: {:?}", compatible_action_units(&store, &schema)?);

    let mut executors = ExecutorRegistry::new();
    fixtures::register_fixture_executors(&mut executors);
    let engine = Engine::default().with_executors(executors);
    let record = engine.execute(&mut store, &id(fixtures::DERIVE_EBV), &id(fixtures::SURVEY), ExecuteOptions::default())?;
    println!("{}: {:?}", record.base.id, record.status);
    for step in &record.steps {
        println!("  {} -> {:?}", step.step_id, step.outputs);
    }
    Ok(())
}
