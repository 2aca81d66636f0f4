//! Experiment configuration: a flat key-value text format with section
//! headers, kept deliberately small.
//!
//! ```text
//! [experiment]
//! kind = deriv_limits
//! function = gaussian
//! weight = exp_decay(1)
//! p = 2
//! orders = 0.5, 0.9, 0.99
//!
//! [grid]
//! min = -8
//! max = 8
//! points = 257
//! dim = 1
//!
//! [quadrature]
//! n_singular = 64
//! ```

use fraclab_core::{QuadratureSpec, Substitution};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Which experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    DerivLimits,
    LapLimits,
    MaximalRatios,
    WeightScan,
    Ftfc,
    SemigroupSuite,
    OracleXcheck,
}

impl ExperimentKind {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(match text {
            "deriv_limits" => ExperimentKind::DerivLimits,
            "lap_limits" => ExperimentKind::LapLimits,
            "maximal_ratios" => ExperimentKind::MaximalRatios,
            "weight_scan" => ExperimentKind::WeightScan,
            "ftfc" => ExperimentKind::Ftfc,
            "semigroup_suite" => ExperimentKind::SemigroupSuite,
            "oracle_xcheck" => ExperimentKind::OracleXcheck,
            other => {
                return Err(ConfigError::Invalid(format!("unknown experiment `{other}`")));
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::DerivLimits => "deriv_limits",
            ExperimentKind::LapLimits => "lap_limits",
            ExperimentKind::MaximalRatios => "maximal_ratios",
            ExperimentKind::WeightScan => "weight_scan",
            ExperimentKind::Ftfc => "ftfc",
            ExperimentKind::SemigroupSuite => "semigroup_suite",
            ExperimentKind::OracleXcheck => "oracle_xcheck",
        }
    }
}

/// Grid parameters shared by the experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub dim: usize,
    pub window_min: f64,
    pub window_max: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { min: -8.0, max: 8.0, points: 129, dim: 1, window_min: -6.0, window_max: 6.0 }
    }
}

/// A fully validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub function: String,
    pub weight: String,
    pub p: f64,
    pub orders: Vec<f64>,
    pub grid: GridConfig,
    pub quadrature: QuadratureSpec,
    pub output: Option<String>,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, function: &str, orders: Vec<f64>) -> Self {
        ExperimentConfig {
            kind,
            function: function.to_string(),
            weight: "constant".to_string(),
            p: 2.0,
            orders,
            grid: GridConfig::default(),
            quadrature: QuadratureSpec::default(),
            output: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.orders.is_empty() && self.kind != ExperimentKind::SemigroupSuite {
            return Err(ConfigError::Invalid("order list is empty".into()));
        }
        if self.orders.iter().any(|&a| !(0.0 < a && a < 1.0)) {
            return Err(ConfigError::Invalid("orders must lie in (0, 1)".into()));
        }
        if !(self.p >= 1.0) {
            return Err(ConfigError::Invalid(format!("p must be >= 1, got {}", self.p)));
        }
        if self.grid.min >= self.grid.max || self.grid.points < 2 {
            return Err(ConfigError::Invalid("degenerate grid".into()));
        }
        if !(1..=3).contains(&self.grid.dim) {
            return Err(ConfigError::Invalid(format!("dimension {} outside 1..=3", self.grid.dim)));
        }
        fraclab_core::CatalogEntry::parse(&self.function)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.quadrature.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    /// Complete echo of every field, used as report metadata so a report is
    /// reproducible from its own header.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        map.insert("experiment".into(), self.kind.name().to_string());
        map.insert("function".into(), self.function.clone());
        map.insert("weight".into(), self.weight.clone());
        map.insert("p".into(), self.p.to_string());
        map.insert(
            "orders".into(),
            self.orders.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(","),
        );
        map.insert("grid.min".into(), self.grid.min.to_string());
        map.insert("grid.max".into(), self.grid.max.to_string());
        map.insert("grid.points".into(), self.grid.points.to_string());
        map.insert("grid.dim".into(), self.grid.dim.to_string());
        map.insert("grid.window_min".into(), self.grid.window_min.to_string());
        map.insert("grid.window_max".into(), self.grid.window_max.to_string());
        map.insert("quadrature.split_point".into(), self.quadrature.split_point.to_string());
        map.insert("quadrature.n_singular".into(), self.quadrature.n_singular.to_string());
        map.insert("quadrature.n_tail".into(), self.quadrature.n_tail.to_string());
        map.insert("quadrature.tail_radius".into(), self.quadrature.tail_radius.to_string());
        map.insert(
            "quadrature.pv_epsilon_schedule".into(),
            self.quadrature
                .pv_epsilon_schedule
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        map.insert(
            "quadrature.substitution".into(),
            match self.quadrature.substitution {
                Substitution::LogSubstitute => "log_substitute".to_string(),
                Substitution::TaylorSubtract => "taylor_subtract".to_string(),
            },
        );
        map.insert("seed".into(), self.seed.to_string());
        map
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut section = String::new();
        let mut kind = None;
        let mut cfg = ExperimentConfig::new(ExperimentKind::DerivLimits, "gaussian", vec![0.5]);
        cfg.orders.clear();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = idx + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = line[1..line.len() - 1].trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
                line: lineno,
                msg: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad_num = |msg: &str| ConfigError::Parse { line: lineno, msg: msg.into() };
            match (section.as_str(), key) {
                ("experiment", "kind") => kind = Some(ExperimentKind::parse(value)?),
                ("experiment", "function") => cfg.function = value.to_string(),
                ("experiment", "weight") => cfg.weight = value.to_string(),
                ("experiment", "p") => {
                    cfg.p = value.parse().map_err(|_| bad_num("p must be a number"))?;
                }
                ("experiment", "orders") => {
                    cfg.orders = value
                        .split(',')
                        .map(|v| v.trim().parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| bad_num("orders must be numbers"))?;
                }
                ("experiment", "out") => cfg.output = Some(value.to_string()),
                ("experiment", "seed") => {
                    cfg.seed = value.parse().map_err(|_| bad_num("seed must be an integer"))?;
                }
                ("grid", "min") => {
                    cfg.grid.min = value.parse().map_err(|_| bad_num("grid min"))?;
                }
                ("grid", "max") => {
                    cfg.grid.max = value.parse().map_err(|_| bad_num("grid max"))?;
                }
                ("grid", "points") => {
                    cfg.grid.points = value.parse().map_err(|_| bad_num("grid points"))?;
                }
                ("grid", "dim") => {
                    cfg.grid.dim = value.parse().map_err(|_| bad_num("grid dim"))?;
                }
                ("grid", "window_min") => {
                    cfg.grid.window_min = value.parse().map_err(|_| bad_num("window min"))?;
                }
                ("grid", "window_max") => {
                    cfg.grid.window_max = value.parse().map_err(|_| bad_num("window max"))?;
                }
                ("quadrature", "split_point") => {
                    cfg.quadrature.split_point =
                        value.parse().map_err(|_| bad_num("split_point"))?;
                }
                ("quadrature", "n_singular") => {
                    cfg.quadrature.n_singular = value.parse().map_err(|_| bad_num("n_singular"))?;
                }
                ("quadrature", "n_tail") => {
                    cfg.quadrature.n_tail = value.parse().map_err(|_| bad_num("n_tail"))?;
                }
                ("quadrature", "tail_radius") => {
                    cfg.quadrature.tail_radius =
                        value.parse().map_err(|_| bad_num("tail_radius"))?;
                }
                (sec, key) => {
                    return Err(ConfigError::Parse {
                        line: lineno,
                        msg: format!("unknown key `{key}` in section `[{sec}]`"),
                    });
                }
            }
        }
        cfg.kind = kind.ok_or_else(|| {
            ConfigError::Invalid("missing `kind` in the [experiment] section".into())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &str) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
# comment
[experiment]
kind = deriv_limits
function = gaussian
weight = exp_decay(1)
p = 2
orders = 0.5, 0.9, 0.99

[grid]
min = -8
max = 8
points = 257

[quadrature]
n_singular = 64
";

    #[test]
    fn parses_a_complete_file() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::DerivLimits);
        assert_eq!(cfg.orders, vec![0.5, 0.9, 0.99]);
        assert_eq!(cfg.grid.points, 257);
        assert_eq!(cfg.weight, "exp_decay(1)");
    }

    #[test]
    fn empty_order_list_is_invalid() {
        let text = SAMPLE.replace("orders = 0.5, 0.9, 0.99", "orders =");
        assert!(matches!(
            ExperimentConfig::parse(&text),
            Err(ConfigError::Parse { .. }) | Err(ConfigError::Invalid(_))
        ));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{SAMPLE}\nwobble = 3\n");
        assert!(ExperimentConfig::parse(&text).is_err());
    }

    #[test]
    fn echo_is_complete_enough_to_rebuild() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        let echo = cfg.echo();
        assert_eq!(echo["experiment"], "deriv_limits");
        assert_eq!(echo["orders"], "0.5,0.9,0.99");
        assert!(echo.contains_key("quadrature.n_singular"));
        assert!(echo.contains_key("seed"));
    }
}
