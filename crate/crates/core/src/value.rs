use std::fmt;

use chrono::{DateTime, SecondsFormat, Utc};
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::id::UnitId;

pub type Timestamp = DateTime<Utc>;

/// The unit token carried by dimensionless numbers.
pub const DIMENSIONLESS: &str = "1";

/// A slot or assertion value.
///
/// Numbers always carry a unit token; `"1"` marks a dimensionless quantity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotValue {
    Number { magnitude: Decimal, unit: String },
    Text(String),
    Boolean(bool),
    Ref(UnitId),
    Timestamp(Timestamp),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Datatype {
    Number,
    Text,
    Boolean,
    Ref,
    Timestamp,
}

impl fmt::Display for Datatype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Datatype::Number => "number",
            Datatype::Text => "text",
            Datatype::Boolean => "boolean",
            Datatype::Ref => "ref",
            Datatype::Timestamp => "timestamp",
        })
    }
}

impl SlotValue {
    pub fn number(magnitude: impl Into<Decimal>, unit: &str) -> Self {
        SlotValue::Number {
            magnitude: magnitude.into(),
            unit: unit.to_string(),
        }
    }

    /// Parses a decimal magnitude such as `"0.35"`. Panics on malformed input.
    pub fn decimal(magnitude: &str, unit: &str) -> Self {
        let magnitude: Decimal = magnitude
            .parse()
            .unwrap_or_else(|_| panic!("invalid decimal literal {magnitude:?}"));
        SlotValue::Number {
            magnitude,
            unit: unit.to_string(),
        }
    }

    pub fn text(s: impl Into<String>) -> Self {
        SlotValue::Text(s.into())
    }

    pub fn datatype(&self) -> Datatype {
        match self {
            SlotValue::Number { .. } => Datatype::Number,
            SlotValue::Text(_) => Datatype::Text,
            SlotValue::Boolean(_) => Datatype::Boolean,
            SlotValue::Ref(_) => Datatype::Ref,
            SlotValue::Timestamp(_) => Datatype::Timestamp,
        }
    }
}

/// Unit tokens: `1` or `[A-Za-z][A-Za-z0-9_]*`, excluding the condition-language keywords.
pub fn is_valid_unit_token(s: &str) -> bool {
    if s == DIMENSIONLESS {
        return true;
    }
    if crate::condition::KEYWORDS.contains(&s) {
        return false;
    }
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn format_timestamp(ts: &Timestamp) -> String {
    ts.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

/// Renders the value in condition-language literal syntax, which parses back to the same value.
impl fmt::Display for SlotValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlotValue::Number { magnitude, unit } if unit == DIMENSIONLESS => write!(f, "{magnitude}"),
            SlotValue::Number { magnitude, unit } => write!(f, "{magnitude} {unit}"),
            SlotValue::Text(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
            SlotValue::Boolean(b) => write!(f, "{b}"),
            SlotValue::Ref(id) => write!(f, "<{id}>"),
            SlotValue::Timestamp(ts) => write!(f, "@{}", format_timestamp(ts)),
        }
    }
}
