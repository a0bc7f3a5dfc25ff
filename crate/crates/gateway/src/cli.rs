//! The `aku` command line. `--json` prints the same data object the HTTP service returns.
//!
//! Exit codes: 0 success or applicable, 1 usage error, 2 internal error, 3 inapplicable,
//! 4 undetermined.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::sync::Arc;

use aku_core::orchestrate::ContextVerdict;
use aku_core::{
    parse_literal, ApplicabilityReport, Assertion, ExecutionRecord, ExecutionStatus, ManualTask, Outcome, Quality,
    RankedCandidate, SlotValue, Timestamp, Verdict, WhatIfDiff,
};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::api::{
    self, ApiError, CompleteRequest, Envelope, ErrorCode, EvaluateRequest, EvidenceRequest,
    ExecuteRequest, ForwardQuery, Service, UnitBatch, WhatIfRequest,
};
use crate::http::DEFAULT_PORT;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;
pub const EXIT_INAPPLICABLE: i32 = 3;
pub const EXIT_UNDETERMINED: i32 = 4;

/// Exit code for an applicability verdict.
pub fn verdict_exit_code(verdict: Verdict) -> i32 {
    match verdict {
        Verdict::Applicable => EXIT_OK,
        Verdict::Inapplicable => EXIT_INAPPLICABLE,
        Verdict::Undetermined => EXIT_UNDETERMINED,
    }
}

#[derive(Debug, Parser)]
#[command(name = "aku", version, about = "Evaluate, discover and execute actionable knowledge units")]
pub struct Cli {
    /// Bundle file to operate on.
    #[arg(long, global = true, env = "AKU_BUNDLE")]
    pub bundle: Option<PathBuf>,
    /// Print the JSON data object instead of the human summary.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and check a bundle, then print unit counts.
    Load { path: Option<PathBuf> },
    /// Add units from a JSON file (one unit or an array; `-` reads stdin).
    Put { file: PathBuf },
    /// Show one unit.
    Get { id: String },
    /// List units, optionally by kind and class.
    List {
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        class: Option<String>,
    },
    /// Append an assertion to a situation context.
    Assert {
        context: String,
        /// `subject.attribute`
        path: String,
        /// Literal such as `40 pct`, `true`, `"text"`, `<ex:id>`.
        value: String,
        #[arg(long, default_value = "observed")]
        quality: String,
        /// Observation time (RFC 3339); defaults to now.
        #[arg(long)]
        at: Option<String>,
    },
    /// Evaluate an action unit in a situation context.
    Eval { action_unit: String, context: String },
    /// Rank action units for a context, or contexts for an action unit.
    Discover(DiscoverArgs),
    /// Re-evaluate with hypothetical assertions.
    Whatif {
        action_unit: String,
        context: String,
        /// `subject.attribute=literal`, repeatable.
        #[arg(long = "set")]
        sets: Vec<String>,
        /// JSON file holding an array of assertions.
        #[arg(long)]
        overrides: Option<PathBuf>,
        #[arg(long, default_value = "observed")]
        quality: String,
        #[arg(long)]
        at: Option<String>,
    },
    /// Execute an action unit in a situation context.
    Execute {
        action_unit: String,
        context: String,
        #[arg(long)]
        dry_run: bool,
        /// Record evidence when the execution completes.
        #[arg(long)]
        evidence: bool,
        /// `role=literal`, repeatable.
        #[arg(long = "input")]
        inputs: Vec<String>,
    },
    /// Show an execution record.
    Execution { id: String },
    /// Manual tasks.
    #[command(subcommand)]
    Tasks(TasksCommand),
    /// Evidence of past executions.
    #[command(subcommand)]
    Evidence(EvidenceCommand),
    /// Action units whose inputs read statements of a schema.
    Affordances { schema: String },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long)]
        readonly: bool,
    },
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    /// Forward: candidates for this situation context.
    #[arg(long, required_unless_present = "action", conflicts_with = "action")]
    pub context: Option<String>,
    /// Reverse: contexts where this action unit applies.
    #[arg(long)]
    pub action: Option<String>,
    /// Objective class filter (forward only).
    #[arg(long, requires = "context")]
    pub class: Option<String>,
    /// Comma-separated objective tags (forward only).
    #[arg(long, requires = "context")]
    pub tags: Option<String>,
    #[arg(long, requires = "context")]
    pub include_inapplicable: bool,
}

#[derive(Debug, Subcommand)]
pub enum TasksCommand {
    /// List open manual tasks.
    List {
        #[arg(long)]
        execution: Option<String>,
    },
    /// Complete an open manual task.
    Complete {
        execution: String,
        step: String,
        /// `role=literal`, repeatable.
        #[arg(long = "output")]
        outputs: Vec<String>,
        #[arg(long, default_value = "success")]
        outcome: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum EvidenceCommand {
    /// Record the outcome of applying an action unit in a context.
    Add {
        action_unit: String,
        context: String,
        #[arg(long)]
        outcome: String,
        /// `name=literal`, repeatable.
        #[arg(long = "metric")]
        metrics: Vec<String>,
        #[arg(long)]
        id: Option<String>,
    },
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    run_cli(cli, out, err)
}

pub fn run_cli(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let json = cli.json;
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            if json {
                let _ = write!(out, "{}", api::render(&Envelope::from(Err(e.clone()))));
            }
            let _ = writeln!(err, "error[{}]: {}", name(&e.code), e.message);
            match e.code {
                ErrorCode::Internal => EXIT_INTERNAL,
                _ => EXIT_USAGE,
            }
        }
    }
}

fn open(bundle: Option<PathBuf>) -> Result<Service, ApiError> {
    let path = bundle.ok_or_else(|| ApiError::invalid("no bundle given: pass --bundle or set AKU_BUNDLE"))?;
    Service::open(api::default_engine(), path)
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32, ApiError> {
    let json = cli.json;
    let emit = |out: &mut dyn Write, data: &Value, human: String| -> Result<(), ApiError> {
        let text = if json { api::render(data) } else { human };
        out.write_all(text.as_bytes())
            .map_err(|e| ApiError::new(ErrorCode::Internal, e.to_string()))
    };
    if let Command::Load { path } = &cli.command {
        let service = open(path.clone().or(cli.bundle))?;
        let data = service.summary()?;
        let human = format!("{} units\n{}", data["units"], lines(&data["by_kind"]));
        emit(out, &data, human)?;
        return Ok(EXIT_OK);
    }
    if let Command::Serve { port, readonly } = cli.command {
        let service = Arc::new(open(cli.bundle)?.readonly(readonly));
        return serve(service, port);
    }
    let service = open(cli.bundle)?;
    let engine_now = || service.engine().now();
    match cli.command {
        Command::Load { .. } | Command::Serve { .. } => unreachable!("handled above"),
        Command::Put { file } => {
            let batch: UnitBatch = parse_json(&read_input(&file)?)?;
            let data = service.put_units(batch)?;
            emit(out, &data, lines(&data["ids"]))?;
        }
        Command::Get { id } => {
            let data = service.get_unit(&id)?;
            let human = api::render(&data);
            emit(out, &data, human)?;
        }
        Command::List { kind, class } => {
            let data = service.list_units(kind.as_deref(), class.as_deref())?;
            let human = rows(&data, |r| format!("{:<32} {:<14} {}", str_of(&r["id"]), str_of(&r["kind"]), str_of(&r["label"])));
            emit(out, &data, human)?;
        }
        Command::Assert { context, path, value, quality, at } => {
            let assertion = assertion(&path, &value, &quality, at.as_deref(), engine_now())?;
            let data = service.add_assertion(&context, assertion)?;
            emit(out, &data, format!("asserted {} = {} in {context}\n", path, value))?;
        }
        Command::Eval { action_unit, context } => {
            let data = service.evaluate(&EvaluateRequest { action_unit, context })?;
            let report: ApplicabilityReport = typed(&data)?;
            emit(out, &data, show_report(&report))?;
            return Ok(verdict_exit_code(report.verdict));
        }
        Command::Discover(args) => {
            if let Some(context) = args.context {
                let data = service.discover_forward(&ForwardQuery {
                    context,
                    class: args.class,
                    tags: args.tags,
                    include_inapplicable: args.include_inapplicable,
                })?;
                let ranked: Vec<RankedCandidate> = typed(&data)?;
                emit(out, &data, show_forward(&ranked))?;
            } else {
                let action = args.action.expect("clap enforces one target");
                let data = service.discover_reverse(&action)?;
                let found: Vec<ContextVerdict> = typed(&data)?;
                emit(out, &data, show_reverse(&found))?;
            }
        }
        Command::Whatif { action_unit, context, sets, overrides, quality, at } => {
            let mut list: Vec<Assertion> = match overrides {
                Some(file) => parse_json(&read_input(&file)?)?,
                None => Vec::new(),
            };
            for set in &sets {
                let (path, value) = split_pair(set)?;
                list.push(assertion(path, value, &quality, at.as_deref(), engine_now())?);
            }
            let data = service.what_if(&WhatIfRequest {
                action_unit,
                context,
                overrides: list,
            })?;
            let diff: WhatIfDiff = typed(&data)?;
            emit(out, &data, show_what_if(&diff))?;
        }
        Command::Execute { action_unit, context, dry_run, evidence, inputs } => {
            let data = service.execute(&ExecuteRequest {
                action_unit,
                context,
                dry_run,
                evidence_on_completion: evidence,
                inputs: slot_values(&inputs)?,
            })?;
            let record: ExecutionRecord = typed(&data)?;
            emit(out, &data, show_execution(&record))?;
            return Ok(match record.status {
                ExecutionStatus::BlockedInapplicable => EXIT_INAPPLICABLE,
                ExecutionStatus::BlockedUndetermined => EXIT_UNDETERMINED,
                _ => EXIT_OK,
            });
        }
        Command::Execution { id } => {
            let data = service.get_execution(&id)?;
            let record: ExecutionRecord = typed(&data)?;
            emit(out, &data, show_execution(&record))?;
        }
        Command::Tasks(TasksCommand::List { execution }) => {
            let data = service.list_tasks(execution.as_deref())?;
            let tasks: Vec<ManualTask> = typed(&data)?;
            emit(out, &data, show_tasks(&tasks))?;
        }
        Command::Tasks(TasksCommand::Complete { execution, step, outputs, outcome }) => {
            let data = service.complete_task(
                &execution,
                &step,
                CompleteRequest {
                    outputs: slot_values(&outputs)?,
                    outcome: api::parse_name::<Outcome>("outcome", &outcome)?,
                },
            )?;
            let record: ExecutionRecord = typed(&data)?;
            emit(out, &data, show_execution(&record))?;
        }
        Command::Evidence(EvidenceCommand::Add { action_unit, context, outcome, metrics, id }) => {
            let data = service.add_evidence(EvidenceRequest {
                id,
                action_unit,
                context,
                outcome: api::parse_name("outcome", &outcome)?,
                metrics: slot_values(&metrics)?,
                recorded_at: None,
                label: None,
            })?;
            emit(out, &data, format!("recorded {}\n", str_of(&data["id"])))?;
        }
        Command::Affordances { schema } => {
            let data = service.affordances(&schema)?;
            emit(out, &data, lines(&data))?;
        }
    }
    Ok(EXIT_OK)
}

fn serve(service: Arc<Service>, port: u16) -> Result<i32, ApiError> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| ApiError::new(ErrorCode::Internal, e.to_string()))?;
    runtime
        .block_on(crate::http::serve(service, port))
        .map_err(|e| ApiError::new(ErrorCode::Internal, format!("cannot serve on port {port}: {e}")))?;
    Ok(EXIT_OK)
}

fn read_input(file: &PathBuf) -> Result<String, ApiError> {
    let mut text = String::new();
    let read = if file.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(file).map(|t| text = t)
    };
    read.map_err(|e| ApiError::invalid(format!("cannot read {}: {e}", file.display())))?;
    Ok(text)
}

fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, ApiError> {
    serde_json::from_str(text).map_err(|e| ApiError::invalid(format!("malformed JSON: {e}")))
}

fn typed<T: DeserializeOwned>(data: &Value) -> Result<T, ApiError> {
    serde_json::from_value(data.clone()).map_err(|e| ApiError::new(ErrorCode::Internal, e.to_string()))
}

fn split_pair(text: &str) -> Result<(&str, &str), ApiError> {
    text.split_once('=')
        .ok_or_else(|| ApiError::invalid(format!("expected name=value, got {text:?}")))
}

fn literal(text: &str) -> Result<SlotValue, ApiError> {
    parse_literal(text.trim()).map_err(|e| ApiError::invalid(format!("literal {text:?}: {e}")))
}

fn slot_values(pairs: &[String]) -> Result<BTreeMap<String, SlotValue>, ApiError> {
    pairs
        .iter()
        .map(|p| {
            let (k, v) = split_pair(p)?;
            Ok((k.to_string(), literal(v)?))
        })
        .collect()
}

fn assertion(path: &str, value: &str, quality: &str, at: Option<&str>, now: Timestamp) -> Result<Assertion, ApiError> {
    let (subject, attribute) = path
        .rsplit_once('.')
        .ok_or_else(|| ApiError::invalid(format!("expected subject.attribute, got {path:?}")))?;
    let observed_at = match at {
        Some(t) => chrono::DateTime::parse_from_rfc3339(t)
            .map_err(|e| ApiError::invalid(format!("timestamp {t:?}: {e}")))?
            .with_timezone(&chrono::Utc),
        None => now,
    };
    Ok(Assertion::new(
        subject,
        attribute,
        literal(value)?,
        api::parse_name::<Quality>("quality", quality)?,
        observed_at,
    ))
}

fn name<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}

fn str_of(v: &Value) -> String {
    v.as_str().map(String::from).unwrap_or_else(|| v.to_string())
}

fn lines(v: &Value) -> String {
    match v {
        Value::Array(items) => items.iter().map(|i| format!("{}\n", str_of(i))).collect(),
        Value::Object(map) => map.iter().map(|(k, v)| format!("{k}: {}\n", str_of(v))).collect(),
        other => format!("{}\n", str_of(other)),
    }
}

fn rows(v: &Value, f: impl Fn(&Value) -> String) -> String {
    v.as_array().map(|a| a.iter().map(|r| f(r) + "\n").collect()).unwrap_or_default()
}

fn show_report(r: &ApplicabilityReport) -> String {
    let mut s = format!(
        "{} in {}: {} (grade {})\n",
        r.action_unit,
        r.context,
        name(&r.verdict).to_uppercase(),
        name(&r.grade)
    );
    for c in &r.per_condition {
        s += &format!("  {:<8} {:<12} {}\n", c.value.to_string(), name(&c.kind), c.label);
    }
    if !r.gaps.is_empty() {
        s += "gaps:\n";
        for g in &r.gaps {
            s += &format!("  - {} [{}] needs {}\n", g.condition_label, name(&g.reason), g.needed);
        }
    }
    s
}

fn show_forward(ranked: &[RankedCandidate]) -> String {
    if ranked.is_empty() {
        return "no candidates\n".into();
    }
    ranked
        .iter()
        .map(|c| {
            format!(
                "{:<13} {:<12} {:>4.0}%  {:<11} {}\n",
                name(&c.report.verdict),
                name(&c.report.grade),
                c.report.sat_fraction() * 100.0,
                name(&c.level),
                c.action_unit
            )
        })
        .collect()
}

fn show_reverse(found: &[ContextVerdict]) -> String {
    if found.is_empty() {
        return "no situation contexts\n".into();
    }
    found
        .iter()
        .map(|c| format!("{:<13} {:<12} {}\n", name(&c.verdict), name(&c.grade), c.context_id))
        .collect()
}

fn show_what_if(d: &WhatIfDiff) -> String {
    let mut s = format!(
        "before: {} ({})\nafter:  {} ({})\n",
        name(&d.before.verdict),
        name(&d.before.grade),
        name(&d.after.verdict),
        name(&d.after.grade)
    );
    if d.flips.is_empty() {
        s += "no conditions changed\n";
    }
    for f in &d.flips {
        s += &format!("  {}: {} -> {}\n", f.label, f.from, f.to);
    }
    s
}

fn show_execution(r: &ExecutionRecord) -> String {
    let mut s = format!("{} {} {} in {}\n", r.base.id, name(&r.status), r.action_unit, r.context);
    if let Some(sel) = r.selection() {
        s += &format!(
            "  selection: {}{}\n",
            name(&sel.outcome),
            sel.branch_index.map(|i| format!(" {i}")).unwrap_or_default()
        );
    }
    if let Some(report) = &r.blocking_report {
        for g in &report.gaps {
            s += &format!("  gap: {} [{}] needs {}\n", g.condition_label, name(&g.reason), g.needed);
        }
    }
    for step in &r.steps {
        s += &format!("  step {:<16} {:<8} {:<9} {}\n", step.step_id, name(&step.outcome), name(&step.executor), step.action_unit);
    }
    for (role, value) in &r.outputs {
        s += &format!("  output {role} = {value}\n");
    }
    if let Some(f) = &r.failure {
        s += &format!("  failure: {f}\n");
    }
    s
}

fn show_tasks(tasks: &[ManualTask]) -> String {
    if tasks.is_empty() {
        return "no open tasks\n".into();
    }
    tasks
        .iter()
        .map(|t| {
            let roles: Vec<&str> = t.required_outputs.iter().map(|o| o.role.as_str()).collect();
            format!(
                "{} {} ({}): {}\n    outputs: {}\n",
                t.execution_id,
                t.step_id,
                t.action_unit,
                t.directive_text,
                roles.join(", ")
            )
        })
        .collect()
}
