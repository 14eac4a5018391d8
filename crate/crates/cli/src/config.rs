//! Suite configuration files.
//!
//! A config is a flat TOML table. Every key is optional; suites fall back to
//! their own defaults and record each value they actually use, with its
//! source, in the report. Keys outside the schema are rejected when the file
//! is read, and keys the selected suite never reads are rejected before it
//! runs.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// Schema of a config file. Only used for validation; values are read
/// through [`Resolver`] so that defaults can be echoed.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
pub struct SuiteConfig {
    pub suite: Option<String>,
    pub seed: Option<u64>,
    pub metric: Option<String>,
    pub potential: Option<String>,
    pub n_points: Option<usize>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub tolerance: Option<f64>,
    pub scalar_tolerance: Option<f64>,
    pub backend_tolerance: Option<f64>,
    pub reconstruction_tolerance: Option<f64>,
    pub epsilon: Option<f64>,
    pub r0: Option<f64>,
    pub t_end: Option<f64>,
    pub a_data: Option<f64>,
    pub radii: Option<Vec<f64>>,
    pub n_theta: Option<usize>,
    pub annulus: Option<[f64; 2]>,
    pub exponent_tolerance: Option<f64>,
    pub horizon_masses: Option<Vec<f64>>,
    pub horizon_tolerance: Option<f64>,
    pub window: Option<[f64; 2]>,
    pub expected_mass: Option<f64>,
    pub n_radii: Option<usize>,
    pub basis_terms: Option<usize>,
    pub direction: Option<[f64; 3]>,
    pub expected_ratio: Option<f64>,
    pub ratio_factor: Option<f64>,
    pub y3: Option<Vec<f64>>,
    pub exponent: Option<f64>,
    pub expected_limit: Option<f64>,
    pub graph_ring: Option<f64>,
    pub n_radial: Option<usize>,
    pub sphere: Option<[usize; 2]>,
    pub budget: Option<usize>,
    pub bookkeeping: Option<bool>,
    pub bookkeeping_tolerance: Option<f64>,
    pub flux_radii: Option<Vec<f64>>,
    pub t_max: Option<f64>,
    pub r_escape: Option<f64>,
}

/// One echoed parameter.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Echo {
    pub value: Value,
    pub source: Source,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Config,
    Default,
    Cli,
}

/// Typed access to a validated config table, with an echo of every value
/// handed out.
pub struct Resolver {
    table: toml::Table,
    echo: RefCell<BTreeMap<String, Echo>>,
}

impl Resolver {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str::<SuiteConfig>(text).map_err(|e| CliError::Config(e.message().to_string()))?;
        let table = toml::from_str::<toml::Table>(text).map_err(|e| CliError::Config(e.message().to_string()))?;
        Ok(Self {
            table,
            echo: RefCell::default(),
        })
    }

    pub fn empty() -> Self {
        Self {
            table: toml::Table::new(),
            echo: RefCell::default(),
        }
    }

    fn record(&self, key: &str, value: Value, source: Source) {
        self.echo.borrow_mut().insert(key.to_string(), Echo { value, source });
    }

    fn lookup<T: for<'de> Deserialize<'de> + Serialize>(&self, key: &str, default: T) -> Result<T, CliError> {
        let (v, source) = match self.table.get(key) {
            Some(raw) => (
                raw.clone()
                    .try_into::<T>()
                    .map_err(|e| CliError::Config(format!("key '{key}': {e}")))?,
                Source::Config,
            ),
            None => (default, Source::Default),
        };
        self.record(key, serde_json::to_value(&v).unwrap_or(Value::Null), source);
        Ok(v)
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.lookup(key, default)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(CliError::Config(format!("key '{key}' must be finite")))
        }
    }

    pub fn positive(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.f64(key, default)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(CliError::Config(format!("key '{key}' must be positive, got {v}")))
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize, CliError> {
        self.lookup(key, default)
    }

    pub fn bool(&self, key: &str, default: bool) -> Result<bool, CliError> {
        self.lookup(key, default)
    }

    pub fn string(&self, key: &str, default: &str) -> Result<String, CliError> {
        self.lookup(key, default.to_string())
    }

    pub fn list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        self.lookup(key, default.to_vec())
    }

    pub fn array<const N: usize>(&self, key: &str, default: [f64; N]) -> Result<[f64; N], CliError> {
        let v: Vec<f64> = self.lookup(key, default.to_vec())?;
        v.try_into()
            .map_err(|_| CliError::Config(format!("key '{key}' needs {N} numbers")))
    }

    /// A range `[lo, hi]` with `0 < lo < hi`.
    pub fn range(&self, key: &str, default: [f64; 2]) -> Result<(f64, f64), CliError> {
        let [lo, hi] = self.array(key, default)?;
        if lo > 0.0 && hi > lo {
            Ok((lo, hi))
        } else {
            Err(CliError::Config(format!("key '{key}' needs 0 < lo < hi, got [{lo}, {hi}]")))
        }
    }

    /// Record a value that came from outside the file.
    pub fn note(&self, key: &str, value: Value, source: Source) {
        self.record(key, value, source);
    }

    pub fn raw_u64(&self, key: &str) -> Option<u64> {
        self.table.get(key).and_then(|v| v.as_integer()).map(|v| v as u64)
    }

    pub fn raw_str(&self, key: &str) -> Option<String> {
        self.table.get(key).and_then(|v| v.as_str()).map(str::to_string)
    }

    /// Keys present in the file that nothing read.
    pub fn unused(&self) -> Vec<String> {
        let echo = self.echo.borrow();
        let used: BTreeSet<&String> = echo.keys().collect();
        self.table.keys().filter(|k| !used.contains(k)).cloned().collect()
    }

    pub fn echo(&self) -> BTreeMap<String, Echo> {
        self.echo.borrow().clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = Resolver::from_toml("tolerence = 1e-3").err().unwrap();
        assert!(matches!(err, CliError::Config(ref m) if m.contains("tolerence")), "{err}");
    }

    #[test]
    fn wrong_types_are_rejected() {
        assert!(Resolver::from_toml("n_points = \"ten\"").is_err());
        assert!(Resolver::from_toml("window = [1.0]").is_err());
    }

    #[test]
    fn defaults_and_values_are_echoed() {
        let r = Resolver::from_toml("tolerance = 0.5\nradii = [1.0, 2.0]").unwrap();
        assert_eq!(r.f64("tolerance", 1.0).unwrap(), 0.5);
        assert_eq!(r.usize("n_points", 7).unwrap(), 7);
        let echo = r.echo();
        assert_eq!(echo["tolerance"].source, Source::Config);
        assert_eq!(echo["n_points"].source, Source::Default);
        assert_eq!(echo["n_points"].value, serde_json::json!(7));
        assert_eq!(r.unused(), vec!["radii".to_string()]);
    }

    #[test]
    fn ranges_are_validated() {
        let r = Resolver::from_toml("window = [400.0, 50.0]").unwrap();
        assert!(r.range("window", [1.0, 2.0]).is_err());
    }
}
