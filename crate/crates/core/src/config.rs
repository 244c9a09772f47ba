//! Reading configuration structs from JSON or TOML files.

use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::{Result, RiskError};

/// Parses by extension: `.toml` as TOML, `.json` as JSON. Other extensions
/// try JSON first, then TOML.
pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let json = |t: &str| {
        serde_json::from_str(t).map_err(|e| RiskError::Parse(format!("{}: {e}", path.display())))
    };
    let toml = |t: &str| toml::from_str(t).map_err(|e| RiskError::Parse(format!("{}: {e}", path.display())));
    match ext {
        "json" => json(&text),
        "toml" => toml(&text),
        _ => json(&text).or_else(|_| toml(&text)),
    }
}
