//! Flat `key = value` scenario files.
//!
//! ```text
//! # price sweep
//! w_w = 0.02
//! sweep_parameter = w_p
//! sweep_steps = 55
//! ```

use std::collections::HashSet;

use thiserror::Error;

use crate::model::{ModelParams, Parameter};
use crate::solver::{Bracket, SolverConfig};
use crate::statics::{SweepParameter, SweepSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given more than once")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: bad value `{value}` for `{key}`: {reason}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
        reason: String,
    },
    #[error("{0}")]
    Invalid(String),
}

/// Grids for tabulating the two inverse demand curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandGrid {
    pub p_r_min: f64,
    pub p_r_max: f64,
    pub p_r_points: usize,
    pub r_c_min: f64,
    pub r_c_max: f64,
    pub r_c_points: usize,
}

impl Default for DemandGrid {
    fn default() -> Self {
        DemandGrid {
            // stand-in for 0+, where p1 tends to the choke price
            p_r_min: 1e-6,
            p_r_max: 20.0,
            p_r_points: 201,
            r_c_min: 0.0,
            r_c_max: 20.0,
            r_c_points: 201,
        }
    }
}

impl DemandGrid {
    pub fn p_r_values(&self) -> Vec<f64> {
        linspace(self.p_r_min, self.p_r_max, self.p_r_points)
    }

    pub fn r_c_values(&self) -> Vec<f64> {
        linspace(self.r_c_min, self.r_c_max, self.r_c_points)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioConfig {
    pub params: ModelParams,
    pub solver: SolverConfig,
    pub sweep: Option<SweepSpec>,
    pub demand: DemandGrid,
}

const SOLVER_KEYS: [&str; 12] = [
    "p_r_min",
    "p_r_max",
    "p_c_min",
    "p_c_max",
    "w_c_min",
    "w_c_max",
    "rel_tol",
    "foc_tol",
    "scan_points",
    "oracle_grid",
    "oracle_grid_3d",
    "oracle_refinements",
];

const SWEEP_KEYS: [&str; 4] = [
    "sweep_parameter",
    "sweep_start",
    "sweep_stop",
    "sweep_steps",
];

const DEMAND_KEYS: [&str; 6] = [
    "demand_p_r_min",
    "demand_p_r_max",
    "demand_p_r_points",
    "demand_r_c_min",
    "demand_r_c_max",
    "demand_r_c_points",
];

/// Every key a scenario file may contain.
pub fn known_keys() -> Vec<&'static str> {
    Parameter::ALL
        .iter()
        .map(|p| p.name())
        .chain(SOLVER_KEYS)
        .chain(SWEEP_KEYS)
        .chain(DEMAND_KEYS)
        .collect()
}

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

impl Entry<'_> {
    fn bad(&self, reason: impl Into<String>) -> ConfigError {
        ConfigError::BadValue {
            line: self.line,
            key: self.key.to_string(),
            value: self.value.to_string(),
            reason: reason.into(),
        }
    }

    fn real(&self) -> Result<f64, ConfigError> {
        let v: f64 = self.value.parse().map_err(|_| self.bad("not a number"))?;
        if !v.is_finite() {
            return Err(self.bad("must be finite"));
        }
        Ok(v)
    }

    fn count(&self) -> Result<usize, ConfigError> {
        self.value
            .parse()
            .map_err(|_| self.bad("not a non-negative integer"))
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let known = known_keys();
        let mut seen = HashSet::new();
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    text: content.to_string(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    text: content.to_string(),
                });
            }
            if !known.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            if !seen.insert(key) {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.to_string(),
                });
            }
            entries.push(Entry { line, key, value });
        }

        let mut cfg = ScenarioConfig::default();
        let mut sweep_parameter = None;
        let (mut sweep_start, mut sweep_stop, mut sweep_steps) = (None, None, None);
        let mut bounds = [
            (cfg.solver.p_r_bracket.lo(), cfg.solver.p_r_bracket.hi()),
            (cfg.solver.p_c_bracket.lo(), cfg.solver.p_c_bracket.hi()),
            (cfg.solver.w_c_bracket.lo(), cfg.solver.w_c_bracket.hi()),
        ];

        for e in &entries {
            if let Some(p) = Parameter::from_name(e.key) {
                cfg.params = cfg
                    .params
                    .with(p, e.real()?)
                    .map_err(|err| e.bad(err.to_string()))?;
                continue;
            }
            match e.key {
                "p_r_min" => bounds[0].0 = e.real()?,
                "p_r_max" => bounds[0].1 = e.real()?,
                "p_c_min" => bounds[1].0 = e.real()?,
                "p_c_max" => bounds[1].1 = e.real()?,
                "w_c_min" => bounds[2].0 = e.real()?,
                "w_c_max" => bounds[2].1 = e.real()?,
                "rel_tol" => cfg.solver.rel_tol = e.real()?,
                "foc_tol" => cfg.solver.foc_tol = e.real()?,
                "scan_points" => cfg.solver.scan_points = e.count()?,
                "oracle_grid" => cfg.solver.oracle_grid = e.count()?,
                "oracle_grid_3d" => cfg.solver.oracle_grid_3d = e.count()?,
                "oracle_refinements" => cfg.solver.oracle_refinements = e.count()?,
                "sweep_parameter" => {
                    let names: Vec<_> = SweepParameter::ALL.iter().map(|p| p.name()).collect();
                    sweep_parameter =
                        Some(SweepParameter::from_name(e.value).ok_or_else(|| {
                            e.bad(format!("expected one of {}", names.join(", ")))
                        })?);
                }
                "sweep_start" => sweep_start = Some(e.real()?),
                "sweep_stop" => sweep_stop = Some(e.real()?),
                "sweep_steps" => sweep_steps = Some(e.count()?),
                "demand_p_r_min" => cfg.demand.p_r_min = e.real()?,
                "demand_p_r_max" => cfg.demand.p_r_max = e.real()?,
                "demand_p_r_points" => cfg.demand.p_r_points = e.count()?,
                "demand_r_c_min" => cfg.demand.r_c_min = e.real()?,
                "demand_r_c_max" => cfg.demand.r_c_max = e.real()?,
                "demand_r_c_points" => cfg.demand.r_c_points = e.count()?,
                _ => unreachable!("key list and match arms agree"),
            }
        }

        let brackets: Result<Vec<Bracket>, _> = bounds
            .iter()
            .map(|&(lo, hi)| Bracket::new(lo, hi))
            .collect();
        let brackets = brackets.map_err(|e| ConfigError::Invalid(e.to_string()))?;
        cfg.solver.p_r_bracket = brackets[0];
        cfg.solver.p_c_bracket = brackets[1];
        cfg.solver.w_c_bracket = brackets[2];
        cfg.solver
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;

        match sweep_parameter {
            Some(p) => {
                let (start, stop, steps) = p.default_range();
                let spec = SweepSpec::new(
                    p,
                    sweep_start.unwrap_or(start),
                    sweep_stop.unwrap_or(stop),
                    sweep_steps.unwrap_or(steps),
                    cfg.params,
                )
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
                cfg.sweep = Some(spec);
            }
            None if sweep_start.is_some() || sweep_stop.is_some() || sweep_steps.is_some() => {
                return Err(ConfigError::Invalid(
                    "sweep_start, sweep_stop and sweep_steps need sweep_parameter".into(),
                ));
            }
            None => {}
        }

        let d = &cfg.demand;
        if !(d.p_r_min > 0.0 && d.p_r_min < d.p_r_max) || d.p_r_points < 2 {
            return Err(ConfigError::Invalid(
                "demand P_r grid needs 0 < demand_p_r_min < demand_p_r_max and at least 2 points"
                    .into(),
            ));
        }
        if !(d.r_c_min >= 0.0 && d.r_c_min < d.r_c_max) || d.r_c_points < 2 {
            return Err(ConfigError::Invalid(
                "demand R_c grid needs 0 <= demand_r_c_min < demand_r_c_max and at least 2 points"
                    .into(),
            ));
        }
        Ok(cfg)
    }
}
