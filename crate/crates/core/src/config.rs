//! `key = value` framework configuration files.
//!
//! ```text
//! # comments start with '#'
//! schemaFile = schemas.yaml
//! extensionsDir = ext
//! scriptFile = sample.yaml
//! handlerOverride.Host = my.HostHandler
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrameworkConfig {
    pub schema_file: Option<PathBuf>,
    pub extensions_dir: Option<PathBuf>,
    pub script_file: Option<PathBuf>,
    /// Schema name to handler class name.
    pub handler_overrides: BTreeMap<String, String>,
}

const OVERRIDE_PREFIX: &str = "handlerOverride.";

impl FrameworkConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut config = Self::default();
        for (index, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |message: String| ConfigError::Syntax {
                line: index + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| syntax(format!("expected 'key = value', found '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(syntax(format!("empty value for '{key}'")));
            }
            let path = || base_dir.join(value);
            match key {
                "schemaFile" => config.schema_file = Some(path()),
                "extensionsDir" => config.extensions_dir = Some(path()),
                "scriptFile" => config.script_file = Some(path()),
                _ => match key.strip_prefix(OVERRIDE_PREFIX) {
                    Some(schema) if !schema.is_empty() => {
                        config.handler_overrides.insert(schema.to_string(), value.to_string());
                    }
                    _ => return Err(syntax(format!("unknown key '{key}'"))),
                },
            }
        }
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_relative_to_base() {
        let text = "# demo\nschemaFile = s.yaml\nextensionsDir=ext\n\nhandlerOverride.Host = x.Handler\n";
        let c = FrameworkConfig::parse(text, Path::new("/etc/csx")).unwrap();
        assert_eq!(c.schema_file, Some(PathBuf::from("/etc/csx/s.yaml")));
        assert_eq!(c.extensions_dir, Some(PathBuf::from("/etc/csx/ext")));
        assert_eq!(c.script_file, None);
        assert_eq!(c.handler_overrides["Host"], "x.Handler");
    }

    #[test]
    fn absolute_paths_kept() {
        let c = FrameworkConfig::parse("scriptFile = /tmp/a.yaml", Path::new("/etc")).unwrap();
        assert_eq!(c.script_file, Some(PathBuf::from("/tmp/a.yaml")));
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = FrameworkConfig::parse("\nbogus = 1\n", Path::new("")).unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 2, .. }));
        assert!(FrameworkConfig::parse("schemaFile", Path::new("")).is_err());
    }
}
