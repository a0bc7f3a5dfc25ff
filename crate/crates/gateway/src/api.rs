//! Operations shared by the HTTP service and the command line.
//!
//! Every operation returns a JSON data object or an [`ApiError`]. Both front ends render the
//! data object through [`render`], so `aku … --json` and the HTTP `data` field agree byte for byte.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use aku_core::fixtures;
use aku_core::unit::StatementClass;
use aku_core::{
    load_bundle, save_bundle, ActionClass, Assertion, Engine, Error, EvidenceUnit, ExecuteOptions,
    ExecutorRegistry, ObjectiveClass, ObjectiveFilter, Outcome, SlotValue, Timestamp, Unit, UnitFilter, UnitId,
    UnitKind, UnitStore,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Machine-readable error category carried in the envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    NotFound,
    Conflict,
    Invalid,
    Blocked,
    Internal,
}

impl ErrorCode {
    pub fn http_status(self) -> u16 {
        match self {
            ErrorCode::NotFound => 404,
            ErrorCode::Conflict | ErrorCode::Blocked => 409,
            ErrorCode::Invalid => 400,
            ErrorCode::Internal => 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub detail: Value,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError {
            code,
            message: message.into(),
            detail: Value::Null,
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        ApiError::new(ErrorCode::Invalid, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        ApiError::new(ErrorCode::NotFound, message)
    }

    fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::NotFound(id) => ApiError::not_found(message).with_detail(json!({ "id": id })),
            Error::DuplicateIdConflict(id) | Error::PartCycle(id) => {
                ApiError::new(ErrorCode::Conflict, message).with_detail(json!({ "id": id }))
            }
            Error::DanglingReference { from, to } => {
                ApiError::new(ErrorCode::Conflict, message).with_detail(json!({ "from": from, "to": to }))
            }
            Error::NoSuchTask { execution, step } => ApiError::new(ErrorCode::Blocked, message)
                .with_detail(json!({ "execution": execution, "step": step })),
            Error::InvalidActionUnit { id, violations } => {
                ApiError::invalid(message).with_detail(json!({ "id": id, "violations": violations }))
            }
            Error::MissingOutput { role } => ApiError::invalid(message).with_detail(json!({ "role": role })),
            Error::TypeMismatch { role, reason } => {
                ApiError::invalid(message).with_detail(json!({ "role": role, "reason": reason }))
            }
            Error::Condition(parse) => ApiError::invalid(message).with_detail(json!({
                "kind": format!("{:?}", parse.kind).to_lowercase(),
                "position": parse.position,
            })),
            Error::Io(_) => ApiError::new(ErrorCode::Internal, message),
            _ => ApiError::invalid(message),
        }
    }
}

pub type ApiResult = Result<Value, ApiError>;

/// Wrapper for every HTTP response body: exactly one of `data` and `error` is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ApiError>,
}

impl From<ApiResult> for Envelope {
    fn from(result: ApiResult) -> Self {
        match result {
            Ok(data) => Envelope {
                ok: true,
                data: Some(data),
                error: None,
            },
            Err(error) => Envelope {
                ok: false,
                data: None,
                error: Some(error),
            },
        }
    }
}

/// The one JSON rendering used by both front ends.
pub fn render<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    text
}

fn to_data<T: Serialize>(value: &T) -> ApiResult {
    serde_json::to_value(value).map_err(|e| ApiError::new(ErrorCode::Internal, e.to_string()))
}

pub fn unit_id(field: &str, raw: &str) -> Result<UnitId, ApiError> {
    UnitId::new(raw).map_err(|_| ApiError::invalid(format!("{field}: invalid unit id {raw:?}")))
}

/// Reads a snake/kebab-case enum name the way it appears in JSON.
pub fn parse_name<T: DeserializeOwned>(field: &str, raw: &str) -> Result<T, ApiError> {
    serde_json::from_value(Value::String(raw.to_string()))
        .map_err(|_| ApiError::invalid(format!("{field}: unknown value {raw:?}")))
}

fn default_outcome() -> Outcome {
    Outcome::Success
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateRequest {
    pub action_unit: String,
    pub context: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfRequest {
    pub action_unit: String,
    pub context: String,
    #[serde(default)]
    pub overrides: Vec<Assertion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecuteRequest {
    pub action_unit: String,
    pub context: String,
    #[serde(default)]
    pub dry_run: bool,
    #[serde(default)]
    pub evidence_on_completion: bool,
    #[serde(default)]
    pub inputs: BTreeMap<String, SlotValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompleteRequest {
    #[serde(default)]
    pub outputs: BTreeMap<String, SlotValue>,
    #[serde(default = "default_outcome")]
    pub outcome: Outcome,
}

impl CompleteRequest {
    /// A successful completion that supplies no outputs.
    pub fn empty() -> Self {
        CompleteRequest {
            outputs: BTreeMap::new(),
            outcome: Outcome::Success,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceRequest {
    /// Assigned from the `evidence:` sequence when absent.
    #[serde(default)]
    pub id: Option<String>,
    pub action_unit: String,
    pub context: String,
    pub outcome: Outcome,
    #[serde(default)]
    pub metrics: BTreeMap<String, SlotValue>,
    #[serde(default)]
    pub recorded_at: Option<Timestamp>,
    #[serde(default)]
    pub label: Option<String>,
}

/// Query of forward discovery; `tags` is comma separated.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ForwardQuery {
    pub context: String,
    #[serde(default)]
    pub class: Option<String>,
    #[serde(default)]
    pub tags: Option<String>,
    #[serde(default)]
    pub include_inapplicable: bool,
}

/// Units submitted by `POST /units` or `aku put`: one unit or a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UnitBatch {
    Many(Vec<Unit>),
    One(Box<Unit>),
}

impl UnitBatch {
    pub fn into_units(self) -> Vec<Unit> {
        match self {
            UnitBatch::Many(units) => units,
            UnitBatch::One(unit) => vec![*unit],
        }
    }
}

/// The engine configuration used by both front ends: defaults plus the bundled executors.
pub fn default_engine() -> Engine {
    let mut registry = ExecutorRegistry::new();
    fixtures::register_fixture_executors(&mut registry);
    Engine::default().with_executors(registry)
}

/// A store behind a single-writer lock, optionally persisted to a bundle file after each mutation.
pub struct Service {
    engine: Engine,
    store: RwLock<UnitStore>,
    bundle_path: Option<PathBuf>,
    readonly: bool,
}

impl Service {
    pub fn new(engine: Engine, store: UnitStore) -> Self {
        Service {
            engine,
            store: RwLock::new(store),
            bundle_path: None,
            readonly: false,
        }
    }

    /// Loads `path` and writes every successful mutation back to it.
    pub fn open(engine: Engine, path: impl AsRef<Path>) -> Result<Self, ApiError> {
        let path = path.as_ref();
        let store = load_bundle(path).map_err(|e| match e {
            Error::Io(io) => ApiError::invalid(format!("cannot read bundle {}: {io}", path.display())),
            other => ApiError::from(other),
        })?;
        let mut service = Service::new(engine, store);
        service.bundle_path = Some(path.to_path_buf());
        Ok(service)
    }

    pub fn readonly(mut self, readonly: bool) -> Self {
        self.readonly = readonly;
        self
    }

    pub fn is_readonly(&self) -> bool {
        self.readonly
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    /// A copy of the current store.
    pub fn snapshot(&self) -> UnitStore {
        self.store.read().expect("store lock poisoned").clone()
    }

    fn read<T>(&self, f: impl FnOnce(&Engine, &UnitStore) -> Result<T, ApiError>) -> Result<T, ApiError> {
        let store = self.store.read().expect("store lock poisoned");
        f(&self.engine, &store)
    }

    /// Applies `f` to a copy of the store; the copy replaces the store (and the bundle file)
    /// only when `f` and the save both succeed.
    fn write<T>(&self, f: impl FnOnce(&Engine, &mut UnitStore) -> Result<T, ApiError>) -> Result<T, ApiError> {
        if self.readonly {
            return Err(ApiError::invalid("the service is read-only"));
        }
        let mut store = self.store.write().expect("store lock poisoned");
        let mut draft = store.clone();
        let out = f(&self.engine, &mut draft)?;
        if let Some(path) = &self.bundle_path {
            save_bundle(&draft, path)?;
        }
        *store = draft;
        Ok(out)
    }

    pub fn summary(&self) -> ApiResult {
        self.read(|_, store| {
            let mut by_kind: BTreeMap<String, usize> = BTreeMap::new();
            for unit in store.iter() {
                *by_kind.entry(unit.kind().to_string()).or_default() += 1;
            }
            Ok(json!({ "units": store.len(), "by_kind": by_kind }))
        })
    }

    pub fn get_unit(&self, id: &str) -> ApiResult {
        let id = unit_id("id", id)?;
        self.read(|_, store| to_data(store.get_unit(&id)?))
    }

    /// Units of a kind and class; `class` names a statement class or an action class.
    pub fn list_units(&self, kind: Option<&str>, class: Option<&str>) -> ApiResult {
        let mut filter = UnitFilter {
            kind: kind.map(|k| parse_name::<UnitKind>("kind", k)).transpose()?,
            ..Default::default()
        };
        let mut action_class = None;
        if let Some(class) = class {
            if let Ok(sc) = parse_name::<StatementClass>("class", class) {
                filter.statement_class = Some(sc);
            } else {
                action_class = Some(parse_name::<ActionClass>("class", class)?);
            }
        }
        self.read(|_, store| {
            let rows: Vec<Value> = store
                .list_units(&filter)
                .into_iter()
                .filter_map(|id| store.get_unit(&id).ok())
                .filter(|u| match (action_class, u) {
                    (None, _) => true,
                    (Some(c), Unit::Action(au)) => au.class == c,
                    _ => false,
                })
                .map(|u| json!({ "id": u.id(), "kind": u.kind(), "label": u.meta().label }))
                .collect();
            Ok(Value::Array(rows))
        })
    }

    pub fn put_units(&self, batch: UnitBatch) -> ApiResult {
        let units = batch.into_units();
        if units.is_empty() {
            return Err(ApiError::invalid("no units given"));
        }
        self.write(|_, store| {
            let ids = store.put_units(units)?;
            Ok(json!({ "ids": ids }))
        })
    }

    pub fn add_assertion(&self, context: &str, assertion: Assertion) -> ApiResult {
        let context = unit_id("context", context)?;
        self.write(|_, store| {
            store.add_assertion(&context, assertion.clone())?;
            to_data(&assertion)
        })
    }

    pub fn evaluate(&self, req: &EvaluateRequest) -> ApiResult {
        let (au, ctx) = (unit_id("action_unit", &req.action_unit)?, unit_id("context", &req.context)?);
        self.read(|engine, store| to_data(&engine.evaluate_action_unit(store, &au, &ctx)?))
    }

    pub fn discover_forward(&self, q: &ForwardQuery) -> ApiResult {
        let ctx = unit_id("context", &q.context)?;
        let filter = ObjectiveFilter {
            objective_class: q
                .class
                .as_deref()
                .map(|c| parse_name::<ObjectiveClass>("class", c))
                .transpose()?,
            tags: q
                .tags
                .as_deref()
                .map(|t| t.split(',').map(str::trim).filter(|t| !t.is_empty()).map(String::from).collect())
                .unwrap_or_default(),
            include_inapplicable: q.include_inapplicable,
        };
        self.read(|engine, store| to_data(&engine.discover_forward(store, &ctx, &filter)?))
    }

    pub fn discover_reverse(&self, action_unit: &str) -> ApiResult {
        let au = unit_id("action_unit", action_unit)?;
        self.read(|engine, store| to_data(&engine.discover_reverse(store, &au)?))
    }

    pub fn what_if(&self, req: &WhatIfRequest) -> ApiResult {
        let (au, ctx) = (unit_id("action_unit", &req.action_unit)?, unit_id("context", &req.context)?);
        self.read(|engine, store| to_data(&engine.what_if(store, &au, &ctx, req.overrides.clone())?))
    }

    /// Dry runs are answered from a read lock and are allowed on a read-only service.
    pub fn execute(&self, req: &ExecuteRequest) -> ApiResult {
        let (au, ctx) = (unit_id("action_unit", &req.action_unit)?, unit_id("context", &req.context)?);
        let options = ExecuteOptions {
            dry_run: req.dry_run,
            evidence_on_completion: req.evidence_on_completion,
            inputs: req.inputs.clone(),
        };
        if req.dry_run {
            return self.read(|engine, store| {
                let mut scratch = store.clone();
                to_data(&engine.execute(&mut scratch, &au, &ctx, options)?)
            });
        }
        self.write(|engine, store| to_data(&engine.execute(store, &au, &ctx, options)?))
    }

    pub fn get_execution(&self, id: &str) -> ApiResult {
        let id = unit_id("id", id)?;
        self.read(|_, store| to_data(store.execution(&id)?))
    }

    pub fn list_tasks(&self, execution: Option<&str>) -> ApiResult {
        let execution = execution.map(|e| unit_id("execution", e)).transpose()?;
        self.read(|engine, store| to_data(&engine.list_tasks(store, execution.as_ref())?))
    }

    pub fn complete_task(&self, execution: &str, step: &str, req: CompleteRequest) -> ApiResult {
        let execution = unit_id("execution", execution)?;
        self.write(|engine, store| {
            to_data(&engine.complete_manual_task(store, &execution, step, req.outputs, req.outcome)?)
        })
    }

    pub fn add_evidence(&self, req: EvidenceRequest) -> ApiResult {
        let au = unit_id("action_unit", &req.action_unit)?;
        let ctx = unit_id("context", &req.context)?;
        let given = req.id.as_deref().map(|i| unit_id("id", i)).transpose()?;
        self.write(|engine, store| {
            let id = given.unwrap_or_else(|| store.next_id("evidence:"));
            let label = req.label.unwrap_or_else(|| format!("evidence for {au} in {ctx}"));
            let evidence = EvidenceUnit {
                base: aku_core::unit::UnitMeta::new(id, label),
                action_unit: au,
                context: ctx,
                outcome: req.outcome,
                metrics: req.metrics,
                recorded_at: req.recorded_at.unwrap_or_else(|| engine.now()),
            };
            let id = engine.record_evidence(store, evidence)?;
            to_data(store.get_unit(&id)?)
        })
    }

    pub fn affordances(&self, schema: &str) -> ApiResult {
        let schema = unit_id("schema", schema)?;
        self.read(|_, store| to_data(&aku_core::schema::compatible_action_units(store, &schema)?))
    }
}
