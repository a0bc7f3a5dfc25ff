use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{
    ActionClass, ActionUnit, ChildStep, EntityKind, EpistemicDirection, ObjectiveClass, SlotDirection, SlotSpec,
};
use crate::error::{Error, Result};
use crate::id::UnitId;
use crate::store::UnitStore;
use crate::unit::{Unit, UnitKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Short name of the broken invariant, e.g. `transformational-typing`.
    pub invariant: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn has(&self, invariant: &str) -> bool {
        self.violations.iter().any(|v| v.invariant == invariant)
    }

    pub fn messages(&self) -> Vec<String> {
        self.violations.iter().map(|v| v.message.clone()).collect()
    }
}

#[derive(Default)]
struct Collector(Vec<Violation>);

impl Collector {
    fn push(&mut self, invariant: &str, message: impl Into<String>) {
        self.0.push(Violation {
            invariant: invariant.to_string(),
            message: message.into(),
        });
    }
}

/// Kahn's algorithm over `precedes`, breaking ties by declaration order.
///
/// Returns step indices, or `None` when the relation has a cycle or names an unknown step.
pub fn topological_order(children: &[ChildStep]) -> Option<Vec<usize>> {
    let index: BTreeMap<&str, usize> = children.iter().enumerate().map(|(i, c)| (c.step_id.as_str(), i)).collect();
    let mut indegree = vec![0usize; children.len()];
    for c in children {
        for succ in &c.precedes {
            indegree[*index.get(succ.as_str())?] += 1;
        }
    }
    let mut order = Vec::with_capacity(children.len());
    let mut done = vec![false; children.len()];
    while order.len() < children.len() {
        let next = (0..children.len()).find(|&i| !done[i] && indegree[i] == 0)?;
        done[next] = true;
        order.push(next);
        for succ in &children[next].precedes {
            indegree[index[succ.as_str()]] -= 1;
        }
    }
    Some(order)
}

/// Steps that must finish before `step` (transitive closure of `precedes`, reversed).
pub(crate) fn predecessors(children: &[ChildStep], step: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut frontier = vec![step.to_string()];
    while let Some(target) = frontier.pop() {
        for c in children {
            if c.precedes.iter().any(|p| *p == target) && out.insert(c.step_id.clone()) {
                frontier.push(c.step_id.clone());
            }
        }
    }
    out
}

fn expect_kind(store: &UnitStore, from: &UnitId, id: &UnitId, kind: UnitKind, what: &str, out: &mut Collector) -> Result<bool> {
    let unit = store.get_unit(id).map_err(|_| Error::DanglingReference {
        from: from.clone(),
        to: id.clone(),
    })?;
    if unit.kind() != kind {
        out.push(
            "reference-kind",
            format!("{what} {id} must be a {kind} unit, found {}", unit.kind()),
        );
        return Ok(false);
    }
    Ok(true)
}

fn check_slots(au: &ActionUnit, store: &UnitStore, out: &mut Collector) -> Result<()> {
    for (list, expected) in [(&au.inputs, SlotDirection::Input), (&au.outputs, SlotDirection::Output)] {
        let mut roles = BTreeSet::new();
        for slot in list {
            if slot.direction != expected {
                out.push("slot-direction", format!("slot {} is listed as {expected:?} but declares {:?}", slot.role, slot.direction));
            }
            if !roles.insert(slot.role.as_str()) {
                out.push("slot-role", format!("duplicate {expected:?} role {}", slot.role));
            }
            if let Some(max) = slot.cardinality.max {
                if slot.cardinality.min > max {
                    out.push("slot-cardinality", format!("slot {} has min > max", slot.role));
                }
            }
            if let Some(schema) = &slot.schema_id {
                if slot.entity_kind == EntityKind::Material {
                    out.push("slot-schema", format!("material slot {} cannot carry a schema", slot.role));
                }
                expect_kind(store, &au.base.id, schema, UnitKind::Schema, "slot schema", out)?;
            }
        }
    }
    Ok(())
}

fn any_kind(slots: &[SlotSpec], kind: EntityKind) -> bool {
    slots.iter().any(|s| s.entity_kind == kind)
}

fn check_class_typing(au: &ActionUnit, out: &mut Collector) {
    let all: Vec<&SlotSpec> = au.inputs.iter().chain(&au.outputs).collect();
    match au.class {
        ActionClass::Epistemic => {
            let spans = all.iter().any(|s| s.entity_kind == EntityKind::Information)
                && all.iter().any(|s| s.entity_kind == EntityKind::Material);
            if !spans {
                out.push("epistemic-typing", "epistemic slots must relate information and material entities");
            }
            match au.epistemic_direction {
                None => out.push("epistemic-direction", "epistemic units must declare recognize, describe or designate"),
                Some(EpistemicDirection::Recognize) => {
                    if !any_kind(&au.outputs, EntityKind::Material) {
                        out.push("epistemic-typing", "recognition must output a material-entity reference");
                    }
                }
                Some(EpistemicDirection::Describe | EpistemicDirection::Designate) => {
                    if !any_kind(&au.outputs, EntityKind::Information) {
                        out.push("epistemic-typing", "description and designation must output information");
                    }
                }
            }
        }
        ActionClass::Transformational => {
            if any_kind(&au.inputs, EntityKind::Material) {
                out.push("transformational-typing", "transformational inputs must be information");
            }
            if any_kind(&au.outputs, EntityKind::Material) {
                out.push("transformational-typing", "transformational outputs must be information");
            }
        }
        ActionClass::Intervention => {
            if !any_kind(&au.inputs, EntityKind::Material) {
                out.push("intervention-typing", "intervention inputs must include a material entity");
            }
            if !any_kind(&au.outputs, EntityKind::Material) {
                out.push("intervention-typing", "intervention outputs must include a material entity");
            }
        }
        ActionClass::Composite | ActionClass::Conditional => {}
    }
    if au.class != ActionClass::Epistemic && au.epistemic_direction.is_some() {
        out.push("epistemic-direction", "only epistemic units carry an epistemic direction");
    }
}

fn objective_matches(class: ActionClass, objective: ObjectiveClass) -> bool {
    match class {
        ActionClass::Epistemic => objective == ObjectiveClass::Epistemic,
        ActionClass::Transformational => objective == ObjectiveClass::Transformational,
        ActionClass::Intervention => objective == ObjectiveClass::Intervention,
        // composites take the class of their overall goal; conditionals may override the default
        ActionClass::Composite | ActionClass::Conditional => true,
    }
}

fn slot_compatible(from: &SlotSpec, to: &SlotSpec) -> bool {
    from.entity_kind == to.entity_kind && (to.schema_id.is_none() || from.schema_id == to.schema_id)
}

fn check_composite(au: &ActionUnit, store: &UnitStore, out: &mut Collector) -> Result<()> {
    if au.children.is_empty() {
        out.push("composite-children", "composite units need at least one child step");
        return Ok(());
    }
    let mut ids = BTreeSet::new();
    for c in &au.children {
        if !ids.insert(c.step_id.as_str()) {
            out.push("composite-steps", format!("duplicate step id {}", c.step_id));
        }
    }
    for c in &au.children {
        for p in &c.precedes {
            if !ids.contains(p.as_str()) {
                out.push("composite-steps", format!("step {} precedes unknown step {p}", c.step_id));
            }
        }
    }
    if out.0.iter().any(|v| v.invariant == "composite-steps") {
        return Ok(());
    }
    if topological_order(&au.children).is_none() {
        out.push("precedes-cycle", "precedes cycle among child steps");
    }

    let mut child_units: BTreeMap<&str, &ActionUnit> = BTreeMap::new();
    for c in &au.children {
        if c.action_unit == au.base.id || contains_unit(store, &c.action_unit, &au.base.id, &mut BTreeSet::new()) {
            out.push("composite-nesting", format!("step {} nests {} inside itself", c.step_id, au.base.id));
            continue;
        }
        if expect_kind(store, &au.base.id, &c.action_unit, UnitKind::Action, "child", out)? {
            child_units.insert(c.step_id.as_str(), store.action(&c.action_unit)?);
        }
    }

    for c in &au.children {
        let before = predecessors(&au.children, &c.step_id);
        for b in &c.bindings {
            if !before.contains(&b.from_step) {
                out.push(
                    "binding-order",
                    format!("binding source {} does not precede {}", b.from_step, c.step_id),
                );
                continue;
            }
            let (Some(src), Some(dst)) = (child_units.get(b.from_step.as_str()), child_units.get(c.step_id.as_str())) else {
                continue;
            };
            match (src.output(&b.from_output_role), dst.input(&b.to_input_role)) {
                (Some(from), Some(to)) => {
                    if !slot_compatible(from, to) {
                        out.push(
                            "binding-type",
                            format!(
                                "{}.{} cannot feed {}.{}",
                                b.from_step, b.from_output_role, c.step_id, b.to_input_role
                            ),
                        );
                    }
                }
                (None, _) => out.push(
                    "binding-type",
                    format!("step {} has no output {}", b.from_step, b.from_output_role),
                ),
                (_, None) => out.push(
                    "binding-type",
                    format!("step {} has no input {}", c.step_id, b.to_input_role),
                ),
            }
        }
    }

    for o in &au.outputs {
        let produced = child_units
            .values()
            .filter_map(|u| u.output(&o.role))
            .any(|s| slot_compatible(s, o));
        if !produced && child_units.len() == au.children.len() {
            out.push("composite-output", format!("no child step produces output {}", o.role));
        }
    }

    let plan = store.plan(&au.plan).ok();
    if let Some(plan) = plan.filter(|p| !p.ordering.is_empty()) {
        for entry in &plan.ordering {
            let declared = au.child(&entry.step).map(|c| {
                let mut p = c.precedes.clone();
                p.sort();
                p
            });
            let mut listed = entry.precedes.clone();
            listed.sort();
            if declared.as_ref() != Some(&listed) {
                out.push("plan-ordering", format!("plan ordering for step {} disagrees with the child steps", entry.step));
            }
        }
    }
    Ok(())
}

/// Whether `root`'s composite/conditional structure reaches `target`.
fn contains_unit(store: &UnitStore, root: &UnitId, target: &UnitId, seen: &mut BTreeSet<UnitId>) -> bool {
    if !seen.insert(root.clone()) {
        return false;
    }
    let Ok(Unit::Action(a)) = store.get_unit(root) else {
        return false;
    };
    a.children
        .iter()
        .map(|c| &c.action_unit)
        .chain(a.branches.iter().map(|b| &b.action))
        .chain(a.else_action.iter())
        .any(|id| id == target || contains_unit(store, id, target, seen))
}

fn check_conditional(au: &ActionUnit, store: &UnitStore, out: &mut Collector) -> Result<()> {
    if au.branches.is_empty() {
        out.push("conditional-branches", "conditional units need at least one branch");
    }
    for (i, b) in au.branches.iter().enumerate() {
        expect_kind(store, &au.base.id, &b.guard, UnitKind::ConditionSet, &format!("guard of branch {i}"), out)?;
        if b.action == au.base.id || contains_unit(store, &b.action, &au.base.id, &mut BTreeSet::new()) {
            out.push("conditional-nesting", format!("branch {i} leads back to {}", au.base.id));
            continue;
        }
        expect_kind(store, &au.base.id, &b.action, UnitKind::Action, &format!("action of branch {i}"), out)?;
    }
    if let Some(e) = &au.else_action {
        expect_kind(store, &au.base.id, e, UnitKind::Action, "else action", out)?;
    }
    Ok(())
}

/// Checks every structural and class-typing invariant of an action unit.
///
/// Missing referenced units are errors; everything else is reported as a violation.
pub fn validate_action_unit(au: &ActionUnit, store: &UnitStore) -> Result<ValidationReport> {
    let mut out = Collector::default();
    let id = &au.base.id;

    if expect_kind(store, id, &au.plan, UnitKind::Plan, "plan", &mut out)? {
        let plan = store.plan(&au.plan)?;
        if plan.executable.is_none() && plan.directive_text.is_none() {
            out.push("plan-content", format!("plan {} needs an executable or directive text", plan.base.id));
        }
    }
    if expect_kind(store, id, &au.conditions, UnitKind::ConditionSet, "condition set", &mut out)? {
        let set = store.condition_set(&au.conditions)?;
        if au.class == ActionClass::Intervention && set.items.is_empty() {
            out.push("intervention-conditions", "intervention units need at least one applicability condition");
        }
    }
    if expect_kind(store, id, &au.objective, UnitKind::Objective, "objective", &mut out)? {
        let objective = store.objective(&au.objective)?;
        if !objective_matches(au.class, objective.objective_class) {
            out.push(
                "objective-class",
                format!("{:?} unit cannot pursue a {:?} objective", au.class, objective.objective_class),
            );
        }
    }

    check_slots(au, store, &mut out)?;
    check_class_typing(au, &mut out);

    if !au.context_requirements.is_empty()
        && !matches!(au.class, ActionClass::Intervention | ActionClass::Epistemic)
    {
        out.push("context-requirements", "only intervention and epistemic units declare context requirements");
    }
    if au.class != ActionClass::Composite && !au.children.is_empty() {
        out.push("composite-children", "only composite units have child steps");
    }
    if au.class != ActionClass::Conditional && (!au.branches.is_empty() || au.else_action.is_some()) {
        out.push("conditional-branches", "only conditional units have branches");
    }
    match au.class {
        ActionClass::Composite => check_composite(au, store, &mut out)?,
        ActionClass::Conditional => check_conditional(au, store, &mut out)?,
        _ => {}
    }

    Ok(ValidationReport {
        ok: out.0.is_empty(),
        violations: out.0,
    })
}
