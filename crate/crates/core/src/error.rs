use thiserror::Error;

use crate::condition::ParseError;
use crate::id::UnitId;
use crate::unit::{Frame, UnitKind};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid unit id {0:?}")]
    InvalidId(String),

    #[error("unit {0} already exists with different content")]
    DuplicateIdConflict(UnitId),

    #[error("unit {from} references missing unit {to}")]
    DanglingReference { from: UnitId, to: UnitId },

    #[error("unit {0} would become its own part")]
    PartCycle(UnitId),

    #[error("unit {0} not found")]
    NotFound(UnitId),

    #[error("unit {id} is a {found} unit, expected {expected}")]
    WrongKind {
        id: UnitId,
        expected: UnitKind,
        found: UnitKind,
    },

    #[error("context {id} has frame {frame}, expected situation")]
    WrongFrame { id: UnitId, frame: Frame },

    #[error("invalid schema {id}: {reason}")]
    InvalidSchema { id: UnitId, reason: String },

    #[error("invalid action unit {id}: {}", violations.join("; "))]
    InvalidActionUnit { id: UnitId, violations: Vec<String> },

    #[error("binding mismatch in {action_unit}: {reason}")]
    BindingTypeMismatch { action_unit: UnitId, reason: String },

    #[error("no open manual task for step {step} of execution {execution}")]
    NoSuchTask { execution: UnitId, step: String },

    #[error("missing required output {role}")]
    MissingOutput { role: String },

    #[error("output {role}: {reason}")]
    TypeMismatch { role: String, reason: String },

    #[error("invalid request: {0}")]
    Invalid(String),

    #[error(transparent)]
    Condition(#[from] ParseError),

    #[error("bundle parse failure: {0}")]
    ParseFailure(String),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}
