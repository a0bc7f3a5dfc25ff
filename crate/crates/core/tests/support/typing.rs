//! Slot-typing table for atomic action classes, written out case by case.
#![allow(dead_code)]

use aku_core::action::EpistemicDirection;
use aku_core::fixtures::{self, id};
use aku_core::unit::UnitMeta;
use aku_core::{ActionClass, ActionUnit, EntityKind, SlotSpec, UnitStore};

/// Which entity kinds a slot list contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kinds {
    Empty,
    Info,
    Material,
    Both,
}

pub const KINDS: [Kinds; 4] = [Kinds::Empty, Kinds::Info, Kinds::Material, Kinds::Both];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Epistemic(Option<EpistemicDirection>),
    Transformational,
    Intervention,
}

pub const SHAPES: [Shape; 6] = [
    Shape::Epistemic(None),
    Shape::Epistemic(Some(EpistemicDirection::Recognize)),
    Shape::Epistemic(Some(EpistemicDirection::Describe)),
    Shape::Epistemic(Some(EpistemicDirection::Designate)),
    Shape::Transformational,
    Shape::Intervention,
];

fn has_info(k: Kinds) -> bool {
    matches!(k, Kinds::Info | Kinds::Both)
}

fn has_material(k: Kinds) -> bool {
    matches!(k, Kinds::Material | Kinds::Both)
}

/// The expected verdict for one row of the table.
pub fn accepted(shape: Shape, inputs: Kinds, outputs: Kinds) -> bool {
    match shape {
        Shape::Transformational => !has_material(inputs) && !has_material(outputs),
        Shape::Intervention => has_material(inputs) && has_material(outputs),
        Shape::Epistemic(direction) => {
            let spans = (has_info(inputs) || has_info(outputs)) && (has_material(inputs) || has_material(outputs));
            match direction {
                None => false,
                Some(EpistemicDirection::Recognize) => spans && has_material(outputs),
                Some(_) => spans && has_info(outputs),
            }
        }
    }
}

fn slots(kinds: Kinds, output: bool) -> Vec<SlotSpec> {
    let make = |role: &str, kind| {
        if output {
            SlotSpec::output(role, kind)
        } else {
            SlotSpec::input(role, kind)
        }
    };
    let prefix = if output { "out" } else { "in" };
    let mut v = Vec::new();
    if has_info(kinds) {
        v.push(make(&format!("{prefix}_info"), EntityKind::Information));
    }
    if has_material(kinds) {
        v.push(make(&format!("{prefix}_material"), EntityKind::Material));
    }
    v
}

/// A unit with the given shape, reusing fixture plans, conditions and objectives of the right class.
pub fn unit(shape: Shape, inputs: Kinds, outputs: Kinds) -> ActionUnit {
    let (class, plan, conditions, objective) = match shape {
        Shape::Epistemic(_) => (
            ActionClass::Epistemic,
            "ex:species-id-plan",
            "ex:species-id-conditions",
            "ex:species-id-objective",
        ),
        Shape::Transformational => (
            ActionClass::Transformational,
            "ex:ebv-plan",
            "ex:ebv-conditions",
            "ex:ebv-objective",
        ),
        Shape::Intervention => (
            ActionClass::Intervention,
            "ex:mangrove-plan",
            "ex:mangrove-conditions",
            "ex:mangrove-objective",
        ),
    };
    let mut au = ActionUnit::new(
        UnitMeta::new(id("ex:typing-probe"), "typing probe"),
        class,
        id(plan),
        id(conditions),
        id(objective),
    );
    if let Shape::Epistemic(direction) = shape {
        au.epistemic_direction = direction;
    }
    au.inputs = slots(inputs, false);
    au.outputs = slots(outputs, true);
    au
}

pub fn store() -> UnitStore {
    fixtures::fixture_store()
}
