//! Runs the two-step histology composite. Both steps are manual: the engine pauses, lists the
//! open task, refuses out-of-order completion and writes the final result back to the context.
//!
//! `cargo run -p aku-core --example composite_workflow`

use std::collections::BTreeMap;

use aku_core::fixtures::{self, id};
use aku_core::{Engine, ExecuteOptions, Outcome, SlotValue};

fn main() -> aku_core::Result<()> {
    let engine = Engine::default();
    let mut store = fixtures::fixture_store();
    let options = ExecuteOptions {
        evidence_on_completion: true,
        ..Default::default()
    };
    let record = engine.execute(&mut store, &id(fixtures::HISTOLOGY), &id(fixtures::HISTOLOGY_LAB), options)?;
    let exec = record.base.id.clone();
    println!("{exec}: {:?}", record.status);

    for task in engine.list_tasks(&store, Some(&exec))? {
        println!("  open task {} ({}): {}", task.step_id, task.action_unit, task.directive_text);
    }

    let composition = BTreeMap::from([("composition".to_string(), SlotValue::text("fibrous"))]);
    match engine.complete_manual_task(&mut store, &exec, "step-2", composition.clone(), Outcome::Success) {
        Err(e) => println!("  step-2 first: {e}"),
        Ok(_) => unreachable!("step-2 depends on step-1"),
    }

    let section = BTreeMap::from([("stained_section".to_string(), SlotValue::Ref(id("ex:section-1")))]);
    engine.complete_manual_task(&mut store, &exec, "step-1", section, Outcome::Success)?;
    let done = engine.complete_manual_task(&mut store, &exec, "step-2", composition, Outcome::Success)?;
    println!("{exec}: {:?}, evidence {:?}", done.status, done.evidence);
    for step in &done.steps {
        println!("  {} {} {:?} {:?}", step.step_id, step.action_unit, step.outcome, step.outputs);
    }

    let lab = store.context(&id(fixtures::HISTOLOGY_LAB))?;
    let written = lab.current(fixtures::HISTOLOGY, "composition").expect("result written back");
    println!("written back: {:?} (provenance {})", written.value, written.provenance);
    Ok(())
}
