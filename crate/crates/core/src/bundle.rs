//! Persistent bundle format: `{ "format": "aku-bundle/1", "units": [...] }`.
//!
//! Serialization is canonical: object keys sorted, units ordered by id, two-space indentation,
//! trailing newline. Saving the same store twice yields identical bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::store::UnitStore;
use crate::unit::Unit;

pub const BUNDLE_FORMAT: &str = "aku-bundle/1";

#[derive(Debug, Serialize, Deserialize)]
struct BundleFile {
    format: String,
    units: Vec<Unit>,
}

/// Serializes any value with sorted keys (serde_json maps are ordered by key).
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let tree: Value = serde_json::to_value(value).map_err(|e| Error::ParseFailure(e.to_string()))?;
    let mut out = serde_json::to_string_pretty(&tree).map_err(|e| Error::ParseFailure(e.to_string()))?;
    out.push('\n');
    Ok(out)
}

pub fn bundle_to_string(store: &UnitStore) -> Result<String> {
    let file = BundleFile {
        format: BUNDLE_FORMAT.to_string(),
        units: store.iter().cloned().collect(),
    };
    to_canonical_json(&file)
}

pub fn bundle_from_str(text: &str) -> Result<UnitStore> {
    let file: BundleFile = serde_json::from_str(text).map_err(|e| Error::ParseFailure(e.to_string()))?;
    if file.format != BUNDLE_FORMAT {
        return Err(Error::ParseFailure(format!(
            "unsupported bundle format {:?}, expected {BUNDLE_FORMAT:?}",
            file.format
        )));
    }
    let mut store = UnitStore::new();
    store.put_units(file.units)?;
    Ok(store)
}

pub fn save_bundle(store: &UnitStore, path: impl AsRef<Path>) -> Result<()> {
    let text = bundle_to_string(store)?;
    fs::write(path, text)?;
    Ok(())
}

pub fn load_bundle(path: impl AsRef<Path>) -> Result<UnitStore> {
    let text = fs::read_to_string(path)?;
    bundle_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_store_has_empty_units_array() {
        let text = bundle_to_string(&UnitStore::new()).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["format"], BUNDLE_FORMAT);
        assert_eq!(v["units"], Value::Array(vec![]));
    }

    #[test]
    fn wrong_format_tag_is_rejected() {
        let err = bundle_from_str(r#"{"format":"other/2","units":[]}"#).unwrap_err();
        assert!(matches!(err, Error::ParseFailure(_)));
    }

    #[test]
    fn missing_schema_reference_is_dangling() {
        let text = r#"{"format":"aku-bundle/1","units":[
            {"kind":"statement","id":"ex:occ-1","statement_class":"assertional",
             "schema_id":"ex:nowhere","slots":{}}
        ]}"#;
        assert!(matches!(bundle_from_str(text), Err(Error::DanglingReference { .. })));
    }

    #[test]
    fn garbage_is_a_parse_failure() {
        assert!(matches!(bundle_from_str("{not json"), Err(Error::ParseFailure(_))));
    }
}
