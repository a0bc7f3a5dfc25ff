//! The execution state machine.
//!
//! An execution is replayed from its record every time it advances: finished steps and
//! evaluated gates are reused, and the walk stops at the first step that is still open,
//! blocked or failed. Every mutating call works on a copy of the store and commits it only
//! when the whole call succeeds.

use std::collections::BTreeMap;

use super::{
    check_slot_value, BranchSelection, ExecuteOptions, ExecutionRecord, ExecutionStatus, ExecutorInput,
    ExecutorKind, GateRecord, GuardEvaluation, ManualTask, SelectionOutcome, StepOutcome, StepRecord,
};
use crate::action::{topological_order, ActionClass, ActionUnit, EvidenceUnit, Outcome};
use crate::condition::TriValue;
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::eval::{
    binding_attribute, support_grade, ApplicabilityReport, Grade, SituationView, Verdict, BINDING_SUBJECT,
};
use crate::id::UnitId;
use crate::store::UnitStore;
use crate::unit::{Assertion, Quality, Unit, UnitMeta};
use crate::value::SlotValue;

type Values = BTreeMap<String, SlotValue>;

enum Flow {
    Done(Values),
    Waiting,
    Failed(String),
    Blocked { at: String, report: ApplicabilityReport },
}

fn join(path: &str, step: &str) -> String {
    if path.is_empty() {
        step.to_string()
    } else {
        format!("{path}/{step}")
    }
}

fn binding_overlay(inputs: &Values, provenance: &str, engine: &Engine) -> Vec<Assertion> {
    let now = engine.now();
    inputs
        .iter()
        .map(|(role, v)| {
            Assertion::new(BINDING_SUBJECT, &binding_attribute(role), v.clone(), Quality::Observed, now)
                .with_provenance(provenance)
        })
        .collect()
}

/// Checks produced values against the unit's declared outputs.
fn check_outputs(store: &UnitStore, au: &ActionUnit, outputs: &Values, require: bool) -> Result<()> {
    if require {
        if let Some(spec) = au.outputs.iter().find(|s| s.is_required() && !outputs.contains_key(&s.role)) {
            return Err(Error::MissingOutput { role: spec.role.clone() });
        }
    }
    for (role, value) in outputs {
        let spec = au.output(role).ok_or_else(|| Error::TypeMismatch {
            role: role.clone(),
            reason: format!("{} declares no output {role}", au.base.id),
        })?;
        check_slot_value(store, spec, value).map_err(|reason| Error::TypeMismatch {
            role: role.clone(),
            reason,
        })?;
    }
    Ok(())
}

fn tri_of(verdict: Verdict) -> TriValue {
    match verdict {
        Verdict::Applicable => TriValue::Sat,
        Verdict::Inapplicable => TriValue::Unsat,
        Verdict::Undetermined => TriValue::Unknown,
    }
}

impl Engine {
    /// A guard's items evaluated as a report; the guard's value is the Kleene AND of its items.
    fn guard_report(&self, store: &UnitStore, au: &ActionUnit, guard: &UnitId, view: &SituationView<'_>) -> Result<ApplicabilityReport> {
        let items = &store.condition_set(guard)?.items;
        let (per_condition, verdict, gaps) = self.assess_items(store, items, view)?;
        let grade = match verdict {
            Verdict::Applicable => support_grade(&per_condition),
            Verdict::Undetermined => Grade::Unknown,
            Verdict::Inapplicable => Grade::Inapplicable,
        };
        Ok(ApplicabilityReport {
            action_unit: au.base.id.clone(),
            context: view.context_id().clone(),
            per_condition,
            verdict,
            grade,
            gaps,
        })
    }

    /// First-match selection; the report is the undecided guard's, when selection is blocked.
    fn select_in_view(
        &self,
        store: &UnitStore,
        au: &ActionUnit,
        view: &SituationView<'_>,
    ) -> Result<(BranchSelection, Option<ApplicabilityReport>)> {
        let mut guards = Vec::new();
        for (index, branch) in au.branches.iter().enumerate() {
            let report = self.guard_report(store, au, &branch.guard, view)?;
            let value = tri_of(report.verdict);
            guards.push(GuardEvaluation {
                index,
                guard: branch.guard.clone(),
                value,
                gaps: report.gaps.clone(),
            });
            match value {
                TriValue::Sat => {
                    let selection = BranchSelection {
                        outcome: SelectionOutcome::Branch,
                        branch_index: Some(index),
                        action: Some(branch.action.clone()),
                        guards,
                    };
                    return Ok((selection, None));
                }
                TriValue::Unknown => {
                    let selection = BranchSelection {
                        outcome: SelectionOutcome::BlockedUndetermined,
                        branch_index: None,
                        action: None,
                        guards,
                    };
                    return Ok((selection, Some(report)));
                }
                TriValue::Unsat => {}
            }
        }
        let outcome = if au.else_action.is_some() {
            SelectionOutcome::Else
        } else {
            SelectionOutcome::Deferred
        };
        let selection = BranchSelection {
            outcome,
            branch_index: None,
            action: au.else_action.clone(),
            guards,
        };
        Ok((selection, None))
    }

    /// Picks the branch a conditional unit would take in a situation.
    pub fn select_branch(&self, store: &UnitStore, au_id: &UnitId, context_id: &UnitId) -> Result<BranchSelection> {
        let au = self.checked_action(store, au_id)?;
        if au.class != ActionClass::Conditional {
            return Err(Error::Invalid(format!("{au_id} is not a conditional action unit")));
        }
        let ctx = store.situation(context_id)?;
        Ok(self.select_in_view(store, au, &SituationView::new(ctx))?.0)
    }

    /// Starts an execution of `au_id` in a situation.
    ///
    /// Blocked, waiting and failed runs are returned as records, not errors. Unless this is a
    /// dry run, the record is stored, finished steps write their outputs back to the context,
    /// and the store changes only if the call succeeds.
    pub fn execute(&self, store: &mut UnitStore, au_id: &UnitId, context_id: &UnitId, options: ExecuteOptions) -> Result<ExecutionRecord> {
        let au = self.checked_action(store, au_id)?.clone();
        let ctx = store.situation(context_id)?;
        for (role, value) in &options.inputs {
            let spec = au.input(role).ok_or_else(|| Error::BindingTypeMismatch {
                action_unit: au.base.id.clone(),
                reason: format!("no input role {role}"),
            })?;
            check_slot_value(store, spec, value).map_err(|reason| Error::BindingTypeMismatch {
                action_unit: au.base.id.clone(),
                reason: format!("input {role}: {reason}"),
            })?;
        }

        let id = store.next_id("exec:");
        let now = self.now();
        let overlay = binding_overlay(&options.inputs, id.as_str(), self);
        let view = SituationView::with_overlay(ctx, &overlay);
        let report = self.evaluate_in_view(store, &au, &view)?;
        let mut record = ExecutionRecord {
            base: UnitMeta::new(id.clone(), format!("execution of {au_id} in {context_id}")).with_source("execution", now),
            action_unit: au_id.clone(),
            context: context_id.clone(),
            status: ExecutionStatus::Pending,
            report: report.clone(),
            gates: Vec::new(),
            steps: Vec::new(),
            feedback: Vec::new(),
            inputs: options.inputs.clone(),
            outputs: BTreeMap::new(),
            started_at: now,
            ended_at: None,
            blocked_at: None,
            blocking_report: None,
            deferred: false,
            dry_run: options.dry_run,
            evidence_on_completion: options.evidence_on_completion,
            evidence: None,
            failure: None,
        };

        if options.dry_run {
            if report.verdict != Verdict::Applicable {
                record.status = blocked_status(report.verdict);
                record.blocked_at = Some(String::new());
                record.blocking_report = Some(report);
            } else if au.class == ActionClass::Conditional {
                let (selection, guard_report) = self.select_in_view(store, &au, &view)?;
                match selection.outcome {
                    SelectionOutcome::BlockedUndetermined => {
                        record.status = ExecutionStatus::BlockedUndetermined;
                        record.blocked_at = Some(String::new());
                        record.blocking_report = guard_report;
                    }
                    SelectionOutcome::Deferred => record.deferred = true,
                    SelectionOutcome::Branch | SelectionOutcome::Else => {}
                }
                record.gates.push(GateRecord {
                    path: String::new(),
                    action_unit: au_id.clone(),
                    report,
                    selection: Some(selection),
                });
            }
            return Ok(record);
        }

        let mut driver = Driver {
            engine: self,
            store: store.clone(),
            record,
        };
        driver.run()?;
        *store = driver.store;
        Ok(driver.record)
    }

    /// Closes an open manual step and lets the execution continue.
    pub fn complete_manual_task(
        &self,
        store: &mut UnitStore,
        execution_id: &UnitId,
        step_id: &str,
        outputs: Values,
        outcome: Outcome,
    ) -> Result<ExecutionRecord> {
        let record = store.execution(execution_id)?.clone();
        let no_task = || Error::NoSuchTask {
            execution: execution_id.clone(),
            step: step_id.to_string(),
        };
        if record.status != ExecutionStatus::WaitingManual {
            return Err(no_task());
        }
        let index = record
            .steps
            .iter()
            .position(|s| s.step_id == step_id && s.executor == ExecutorKind::Manual && s.outcome == StepOutcome::Pending)
            .ok_or_else(no_task)?;
        let au = store.action(&record.steps[index].action_unit)?.clone();
        check_outputs(store, &au, &outputs, outcome != Outcome::Failure)?;

        let mut driver = Driver {
            engine: self,
            store: store.clone(),
            record,
        };
        let step = &mut driver.record.steps[index];
        step.outcome = outcome.into();
        step.outputs = outputs.clone();
        step.ended_at = Some(self.now());
        if outcome == Outcome::Failure {
            step.detail = Some("reported as failed".to_string());
        }
        driver.write_feedback(&au.base.id, &outputs)?;
        driver.run()?;
        *store = driver.store;
        Ok(driver.record)
    }

    /// Open manual tasks, optionally of one execution, ordered by execution then step.
    pub fn list_tasks(&self, store: &UnitStore, execution: Option<&UnitId>) -> Result<Vec<ManualTask>> {
        if let Some(id) = execution {
            store.execution(id)?;
        }
        let mut tasks = Vec::new();
        for record in store.executions() {
            if execution.is_some_and(|id| *id != record.base.id) {
                continue;
            }
            for step in &record.steps {
                if step.executor != ExecutorKind::Manual || step.outcome != StepOutcome::Pending {
                    continue;
                }
                let au = store.action(&step.action_unit)?;
                let plan = store.plan(&au.plan)?;
                tasks.push(ManualTask {
                    execution_id: record.base.id.clone(),
                    step_id: step.step_id.clone(),
                    action_unit: au.base.id.clone(),
                    directive_text: plan.directive_text.clone().unwrap_or_default(),
                    required_outputs: au.outputs.iter().filter(|s| s.is_required()).cloned().collect(),
                });
            }
        }
        Ok(tasks)
    }

    /// Stores an evidence unit. It counts toward promotion only where its context makes the
    /// unit applicable.
    pub fn record_evidence(&self, store: &mut UnitStore, evidence: EvidenceUnit) -> Result<UnitId> {
        if store.contains(&evidence.action_unit) {
            store.action(&evidence.action_unit)?;
        }
        if store.contains(&evidence.context) {
            store.context(&evidence.context)?;
        }
        store.put_unit(evidence)
    }
}

fn blocked_status(verdict: Verdict) -> ExecutionStatus {
    if verdict == Verdict::Inapplicable {
        ExecutionStatus::BlockedInapplicable
    } else {
        ExecutionStatus::BlockedUndetermined
    }
}

struct Driver<'e> {
    engine: &'e Engine,
    store: UnitStore,
    record: ExecutionRecord,
}

impl Driver<'_> {
    fn run(&mut self) -> Result<()> {
        self.record.status = ExecutionStatus::Running;
        let root = self.record.action_unit.clone();
        let inputs = self.record.inputs.clone();
        let flow = self.node(&root, "", inputs)?;
        let now = self.engine.now();
        match flow {
            Flow::Waiting => self.record.status = ExecutionStatus::WaitingManual,
            Flow::Failed(message) => {
                self.record.status = ExecutionStatus::Failed;
                self.record.failure = Some(message);
                self.record.ended_at = Some(now);
            }
            Flow::Blocked { at, report } => {
                self.record.status = blocked_status(report.verdict);
                self.record.blocked_at = Some(at);
                self.record.blocking_report = Some(report);
                self.record.ended_at = Some(now);
            }
            Flow::Done(outputs) => {
                if !self.store.action(&root)?.class.is_atomic() {
                    self.write_feedback(&root, &outputs)?;
                }
                self.record.outputs = outputs;
                self.record.status = ExecutionStatus::Completed;
                self.record.ended_at = Some(now);
                if self.record.evidence_on_completion {
                    self.record_evidence()?;
                }
            }
        }
        let unit = Unit::Execution(self.record.clone());
        if self.store.contains(&self.record.base.id) {
            self.store.replace_unit(unit)
        } else {
            self.store.put_unit(unit).map(|_| ())
        }
    }

    fn record_evidence(&mut self) -> Result<()> {
        let outcome = if self.record.steps.iter().any(|s| s.outcome == StepOutcome::Partial) {
            Outcome::Partial
        } else {
            Outcome::Success
        };
        let id = self.store.next_id("evidence:");
        let now = self.engine.now();
        let evidence = EvidenceUnit {
            base: UnitMeta::new(id.clone(), format!("outcome of {}", self.record.base.id))
                .with_source(self.record.base.id.as_str(), now),
            action_unit: self.record.action_unit.clone(),
            context: self.record.context.clone(),
            outcome,
            metrics: self.record.outputs.clone(),
            recorded_at: now,
        };
        self.store.put_unit(evidence)?;
        self.record.evidence = Some(id);
        Ok(())
    }

    /// Writes outputs back as observed assertions about the producing unit.
    fn write_feedback(&mut self, subject: &UnitId, outputs: &Values) -> Result<()> {
        let now = self.engine.now();
        for (role, value) in outputs {
            let assertion = Assertion::new(subject.as_str(), role, value.clone(), Quality::Observed, now)
                .with_provenance(self.record.base.id.as_str());
            self.record.feedback.push(assertion.to_ref());
            self.store.add_assertion(&self.record.context, assertion)?;
        }
        Ok(())
    }

    fn evaluate(&self, au: &ActionUnit, inputs: &Values) -> Result<ApplicabilityReport> {
        let ctx = self.store.situation(&self.record.context)?;
        let overlay = binding_overlay(inputs, self.record.base.id.as_str(), self.engine);
        self.engine
            .evaluate_in_view(&self.store, au, &SituationView::with_overlay(ctx, &overlay))
    }

    fn node(&mut self, au_id: &UnitId, path: &str, inputs: Values) -> Result<Flow> {
        let au = self.store.action(au_id)?.clone();
        if au.class.is_atomic() {
            return self.atomic(&au, path, inputs);
        }
        let gate = match self.record.gates.iter().position(|g| g.path == path) {
            Some(i) => i,
            None => {
                let report = if path.is_empty() {
                    self.record.report.clone()
                } else {
                    self.evaluate(&au, &inputs)?
                };
                self.record.gates.push(GateRecord {
                    path: path.to_string(),
                    action_unit: au_id.clone(),
                    report,
                    selection: None,
                });
                self.record.gates.len() - 1
            }
        };
        let report = &self.record.gates[gate].report;
        if report.verdict != Verdict::Applicable {
            return Ok(Flow::Blocked {
                at: path.to_string(),
                report: report.clone(),
            });
        }
        if au.class == ActionClass::Composite {
            self.composite(&au, path, inputs)
        } else {
            self.conditional(&au, path, gate, inputs)
        }
    }

    fn atomic(&mut self, au: &ActionUnit, path: &str, inputs: Values) -> Result<Flow> {
        let step_id = if path.is_empty() { "main".to_string() } else { path.to_string() };
        if let Some(step) = self.record.step(&step_id) {
            return Ok(match step.outcome {
                StepOutcome::Pending => Flow::Waiting,
                StepOutcome::Failure => Flow::Failed(format!(
                    "step {step_id} failed: {}",
                    step.detail.as_deref().unwrap_or("no detail")
                )),
                StepOutcome::Success | StepOutcome::Partial => Flow::Done(step.outputs.clone()),
            });
        }
        let report = if path.is_empty() {
            self.record.report.clone()
        } else {
            self.evaluate(au, &inputs)?
        };
        if report.verdict != Verdict::Applicable {
            return Ok(Flow::Blocked { at: step_id, report });
        }

        let plan = self.store.plan(&au.plan)?;
        let executor = match (&plan.executable, au.class) {
            (Some(name), ActionClass::Transformational) => self.engine.executors.get(name).cloned(),
            _ => None,
        };
        let mut step = StepRecord {
            step_id: step_id.clone(),
            action_unit: au.base.id.clone(),
            applicability_snapshot: report,
            inputs: inputs.clone(),
            outputs: BTreeMap::new(),
            executor: if executor.is_some() {
                ExecutorKind::Automatic
            } else {
                ExecutorKind::Manual
            },
            outcome: StepOutcome::Pending,
            started_at: self.engine.now(),
            ended_at: None,
            detail: None,
        };
        let Some(executor) = executor else {
            self.record.steps.push(step);
            return Ok(Flow::Waiting);
        };

        let ctx = self.store.situation(&self.record.context)?;
        let result = executor(&ExecutorInput {
            store: &self.store,
            action_unit: au,
            context: ctx,
            inputs: &inputs,
        })
        .and_then(|outputs| {
            check_outputs(&self.store, au, &outputs, true)
                .map(|_| outputs)
                .map_err(|e| e.to_string())
        });
        step.ended_at = Some(self.engine.now());
        match result {
            Ok(outputs) => {
                step.outcome = StepOutcome::Success;
                step.outputs = outputs.clone();
                self.record.steps.push(step);
                self.write_feedback(&au.base.id, &outputs)?;
                Ok(Flow::Done(outputs))
            }
            Err(message) => {
                step.outcome = StepOutcome::Failure;
                step.detail = Some(message.clone());
                self.record.steps.push(step);
                Ok(Flow::Failed(format!("step {step_id} failed: {message}")))
            }
        }
    }

    fn composite(&mut self, au: &ActionUnit, path: &str, inputs: Values) -> Result<Flow> {
        let order = topological_order(&au.children)
            .ok_or_else(|| Error::Invalid(format!("{} has a precedes cycle", au.base.id)))?;
        let mut produced: BTreeMap<&str, Values> = BTreeMap::new();
        for &i in &order {
            let child = &au.children[i];
            let child_au = self.store.action(&child.action_unit)?.clone();
            let mut child_inputs: Values = inputs
                .iter()
                .filter(|(role, _)| child_au.input(role).is_some())
                .map(|(r, v)| (r.clone(), v.clone()))
                .collect();
            for b in &child.bindings {
                let Some(value) = produced.get(b.from_step.as_str()).and_then(|o| o.get(&b.from_output_role)) else {
                    continue;
                };
                let mismatch = |reason: String| Error::BindingTypeMismatch {
                    action_unit: au.base.id.clone(),
                    reason: format!(
                        "{}.{} -> {}.{}: {reason}",
                        b.from_step, b.from_output_role, child.step_id, b.to_input_role
                    ),
                };
                let spec = child_au
                    .input(&b.to_input_role)
                    .ok_or_else(|| mismatch("no such input".to_string()))?;
                check_slot_value(&self.store, spec, value).map_err(mismatch)?;
                child_inputs.insert(b.to_input_role.clone(), value.clone());
            }
            match self.node(&child.action_unit, &join(path, &child.step_id), child_inputs)? {
                Flow::Done(outputs) => {
                    produced.insert(child.step_id.as_str(), outputs);
                }
                other => return Ok(other),
            }
        }

        let mut outputs = Values::new();
        for spec in &au.outputs {
            let found = order
                .iter()
                .rev()
                .find_map(|&i| produced.get(au.children[i].step_id.as_str())?.get(&spec.role));
            match found {
                Some(v) => {
                    outputs.insert(spec.role.clone(), v.clone());
                }
                None if spec.is_required() && !self.record.deferred => {
                    return Ok(Flow::Failed(format!("composite output {} was not produced", spec.role)));
                }
                None => {}
            }
        }
        Ok(Flow::Done(outputs))
    }

    fn conditional(&mut self, au: &ActionUnit, path: &str, gate: usize, inputs: Values) -> Result<Flow> {
        let selection = match &self.record.gates[gate].selection {
            Some(s) => s.clone(),
            None => {
                let ctx = self.store.situation(&self.record.context)?;
                let overlay = binding_overlay(&inputs, self.record.base.id.as_str(), self.engine);
                let view = SituationView::with_overlay(ctx, &overlay);
                let (selection, guard_report) = self.engine.select_in_view(&self.store, au, &view)?;
                self.record.gates[gate].selection = Some(selection.clone());
                if let Some(report) = guard_report {
                    return Ok(Flow::Blocked {
                        at: path.to_string(),
                        report,
                    });
                }
                selection
            }
        };
        let sub = match selection.outcome {
            SelectionOutcome::Deferred => {
                self.record.deferred = true;
                return Ok(Flow::Done(Values::new()));
            }
            SelectionOutcome::BlockedUndetermined => {
                return Err(Error::Invalid("blocked selection cannot be resumed".to_string()));
            }
            SelectionOutcome::Branch => join(path, &format!("branch-{}", selection.branch_index.unwrap_or(0))),
            SelectionOutcome::Else => join(path, "else"),
        };
        let target = selection
            .action
            .clone()
            .ok_or_else(|| Error::Invalid("selection without a target".to_string()))?;
        let target_au = self.store.action(&target)?;
        let target_inputs: Values = inputs
            .into_iter()
            .filter(|(role, _)| target_au.input(role).is_some())
            .collect();
        match self.node(&target, &sub, target_inputs)? {
            Flow::Done(outputs) => Ok(Flow::Done(
                outputs
                    .into_iter()
                    .filter(|(role, _)| au.output(role).is_some())
                    .collect(),
            )),
            other => Ok(other),
        }
    }
}
