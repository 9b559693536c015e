//! JSON config files. A file holds either a flat object of option values or
//! one object per subcommand; values given on the command line win.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

pub fn load(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let value: Value = serde_json::from_str(&text).map_err(|source| CliError::Config {
        path: path.to_path_buf(),
        source,
    })?;
    if !value.is_object() {
        return Err(CliError::Usage(format!(
            "{}: config must be a JSON object",
            path.display()
        )));
    }
    Ok(value)
}

/// Overlays the options given on the command line onto the config file's
/// values for `section`. Unset options (`null`) and unset flags (`false`)
/// leave the file's value in place.
pub fn resolve<T>(
    cli: &T,
    file: Option<&Value>,
    section: &str,
    path: Option<&PathBuf>,
) -> Result<T, CliError>
where
    T: Serialize + DeserializeOwned,
{
    let mut merged = Map::new();
    if let Some(Value::Object(top)) = file {
        let scoped = match top.get(section) {
            Some(Value::Object(s)) => s,
            _ => top,
        };
        for (k, v) in scoped {
            if !v.is_object() {
                merged.insert(k.replace('-', "_"), v.clone());
            }
        }
    }
    let Value::Object(given) = serde_json::to_value(cli).expect("arguments serialize") else {
        unreachable!("argument structs serialize to objects")
    };
    for (k, v) in given {
        if !(v.is_null() || v == Value::Bool(false)) {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|source| CliError::Config {
        path: path
            .cloned()
            .unwrap_or_else(|| PathBuf::from("<command line>")),
        source,
    })
}
