//! Plain-text `key = value` configuration with command-line overrides.
//!
//! Global keys (`seed`, `out_dir`, `emit_csv`) apply to the whole run; dotted
//! keys (`circle-census-mc.n_paths = 20000`) override one experiment's
//! parameters. Command-line flags beat file values; everything else falls
//! back to the built-in defaults printed by the `defaults` subcommand.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

/// Environment variable providing the default output directory.
pub const OUT_DIR_ENV: &str = "FELLER_LAB_OUT";

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::new();
        cfg.parse_str(&text)?;
        Ok(cfg)
    }

    pub fn parse_str(&mut self, text: &str) -> Result<(), ConfigError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError(format!(
                    "line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            self.set(key.trim(), value.trim());
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.values.insert(key.to_string(), value.to_string());
    }

    /// Raw lookup: exact key first, otherwise empty.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    /// Experiment-scoped lookup: `<experiment>.<key>` beats the bare key.
    pub fn get_scoped(&self, experiment: &str, key: &str) -> Option<&str> {
        self.get(&format!("{experiment}.{key}"))
            .or_else(|| self.get(key))
    }

    pub fn get_f64(&self, experiment: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get_scoped(experiment, key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| ConfigError(format!("{experiment}.{key}: `{s}` is not a number"))),
        }
    }

    pub fn get_u64(&self, experiment: &str, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.get_scoped(experiment, key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| ConfigError(format!("{experiment}.{key}: `{s}` is not an integer"))),
        }
    }

    pub fn get_bool(&self, experiment: &str, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get_scoped(experiment, key) {
            None => Ok(default),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(s) => Err(ConfigError(format!("{experiment}.{key}: `{s}` is not a boolean"))),
        }
    }

    pub fn seed(&self) -> Result<u64, ConfigError> {
        self.get_u64("", "seed", 20_240_613)
    }

    pub fn out_dir(&self) -> String {
        self.get("out_dir")
            .map(str::to_string)
            .or_else(|| std::env::var(OUT_DIR_ENV).ok())
            .unwrap_or_else(|| "reports".to_string())
    }

    /// Every key currently set, for the report's config echo.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.values.clone()
    }
}

/// The built-in defaults, printable via the `defaults` subcommand.
pub fn default_lines() -> Vec<(String, String)> {
    let mut out = vec![
        ("seed".into(), "20240613".into()),
        ("out_dir".into(), format!("reports   # or ${OUT_DIR_ENV}")),
        ("emit_csv".into(), "false".into()),
    ];
    for (exp, keys) in crate::experiments::parameter_defaults() {
        for (k, v) in keys {
            out.push((format!("{exp}.{k}"), v));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_scopes() {
        let mut c = RunConfig::new();
        c.parse_str("seed = 7\n# comment\nfoo.n_paths = 12  # trailing\nn_paths = 5\n")
            .unwrap();
        assert_eq!(c.seed().unwrap(), 7);
        assert_eq!(c.get_u64("foo", "n_paths", 1).unwrap(), 12);
        assert_eq!(c.get_u64("bar", "n_paths", 1).unwrap(), 5);
        assert_eq!(c.get_u64("bar", "missing", 3).unwrap(), 3);
    }

    #[test]
    fn rejects_malformed_lines() {
        let mut c = RunConfig::new();
        assert!(c.parse_str("this is not a pair\n").is_err());
        assert!(c.parse_str("x = nope\n").is_ok());
        assert!(c.get_f64("", "x", 0.0).is_err());
    }
}
