//! A self-contained actionable-knowledge engine.
//!
//! Action units are typed plan specifications whose applicability conditions are evaluated
//! against situation contexts under three-valued logic. The crate covers the unit store and
//! bundle format, statement schemata, the condition language, applicability reports with
//! grades and gaps, the grounding ladder, discovery, and execution of composite and
//! conditional workflows with manual tasks and closed-loop feedback.
//!
//! ```
//! use aku_core::{fixtures, Engine, Verdict};
//!
//! let store = fixtures::fixture_store();
//! let engine = Engine::default();
//! let report = engine
//!     .evaluate_action_unit(&store, &fixtures::id(fixtures::MANGROVE), &fixtures::id(fixtures::SITE_A))
//!     .unwrap();
//! assert_eq!(report.verdict, Verdict::Applicable);
//! ```

pub mod action;
pub mod bundle;
pub mod condition;
pub mod engine;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod id;
pub mod orchestrate;
pub mod schema;
pub mod store;
pub mod unit;
pub mod value;

pub use action::{
    ActionClass, ActionUnit, EntityKind, EvidenceUnit, GroundingAssessment, GroundingLevel, ObjectiveClass,
    Outcome, SlotSpec, ValidationReport,
};
pub use bundle::{bundle_from_str, bundle_to_string, load_bundle, save_bundle, to_canonical_json, BUNDLE_FORMAT};
pub use condition::{parse_condition, parse_literal, ConditionExpr, ParseError, TriValue};
pub use engine::{Engine, PromotionPolicy, Settings, UnitConversions};
pub use error::{Error, Result};
pub use eval::{ApplicabilityReport, Gap, GapReason, Grade, Verdict, WhatIfDiff};
pub use id::UnitId;
pub use orchestrate::{
    BranchSelection, ExecuteOptions, ExecutionRecord, ExecutionStatus, ExecutorRegistry, ManualTask,
    ObjectiveFilter, RankedCandidate,
};
pub use store::{UnitFilter, UnitStore};
pub use unit::{Assertion, ContextUnit, Frame, Quality, Unit, UnitKind};
pub use value::{SlotValue, Timestamp};
