use std::borrow::Borrow;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Identifier of a semantic unit, CURIE-like (`ex:site-A`).
///
/// Accepted shape: an ASCII letter followed by letters, digits, `_`, `.`, `:` or `-`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct UnitId(String);

impl UnitId {
    pub fn new(value: impl Into<String>) -> Result<Self, Error> {
        let value = value.into();
        if is_valid_id(&value) {
            Ok(UnitId(value))
        } else {
            Err(Error::InvalidId(value))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Checks the identifier grammar `[A-Za-z][A-Za-z0-9_.:-]*`.
pub fn is_valid_id(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | ':' | '-'))
}

impl TryFrom<String> for UnitId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        UnitId::new(value)
    }
}

impl TryFrom<&str> for UnitId {
    type Error = Error;

    fn try_from(value: &str) -> Result<Self, Self::Error> {
        UnitId::new(value)
    }
}

impl FromStr for UnitId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        UnitId::new(s)
    }
}

impl From<UnitId> for String {
    fn from(id: UnitId) -> Self {
        id.0
    }
}

impl Borrow<str> for UnitId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for UnitId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for UnitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Shorthand for building ids from literals known to be valid.
///
/// Panics on an invalid literal; meant for fixtures and tests.
pub fn uid(s: &str) -> UnitId {
    UnitId::new(s).unwrap_or_else(|_| panic!("invalid unit id literal {s:?}"))
}
