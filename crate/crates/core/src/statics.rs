//! One-parameter comparative statics.

use std::fmt;

use thiserror::Error;

use crate::model::{ModelError, ModelParams, Parameter};
use crate::solver::{self, Equilibrium, SolverConfig, SolverError};

/// Differences at or below this magnitude count as no change.
pub const CONSTANCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StaticsError {
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Parameters a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParameter {
    PowerPrice,
    BandwidthPrice,
    Alpha,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 3] = [
        SweepParameter::PowerPrice,
        SweepParameter::BandwidthPrice,
        SweepParameter::Alpha,
    ];

    pub fn parameter(self) -> Parameter {
        match self {
            SweepParameter::PowerPrice => Parameter::PowerPrice,
            SweepParameter::BandwidthPrice => Parameter::BandwidthPrice,
            SweepParameter::Alpha => Parameter::Alpha,
        }
    }

    pub fn name(self) -> &'static str {
        self.parameter().name()
    }

    pub fn from_name(name: &str) -> Option<SweepParameter> {
        SweepParameter::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Range and resolution used for the standard sweeps:
    /// `w_p, w_w` over `[0.001, 0.055]` with 55 points, `alpha` over `[0.1, 2]` with 39.
    pub fn default_range(self) -> (f64, f64, usize) {
        match self {
            SweepParameter::PowerPrice | SweepParameter::BandwidthPrice => (0.001, 0.055, 55),
            SweepParameter::Alpha => (0.1, 2.0, 39),
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    parameter: SweepParameter,
    start: f64,
    stop: f64,
    steps: usize,
    base: ModelParams,
}

impl SweepSpec {
    pub fn new(
        parameter: SweepParameter,
        start: f64,
        stop: f64,
        steps: usize,
        base: ModelParams,
    ) -> Result<Self, StaticsError> {
        if !(start > 0.0 && start < stop && stop.is_finite()) {
            return Err(StaticsError::InvalidSpec(format!(
                "range [{start}, {stop}] must satisfy 0 < start < stop"
            )));
        }
        if steps < 2 {
            return Err(StaticsError::InvalidSpec(format!(
                "steps must be at least 2, got {steps}"
            )));
        }
        Ok(SweepSpec {
            parameter,
            start,
            stop,
            steps,
            base,
        })
    }

    /// The standard sweep for `parameter` around `base`.
    pub fn standard(parameter: SweepParameter, base: ModelParams) -> Self {
        let (start, stop, steps) = parameter.default_range();
        SweepSpec {
            parameter,
            start,
            stop,
            steps,
            base,
        }
    }

    pub fn with_steps(self, steps: usize) -> Result<Self, StaticsError> {
        SweepSpec::new(self.parameter, self.start, self.stop, steps, self.base)
    }

    pub fn parameter(&self) -> SweepParameter {
        self.parameter
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn stop(&self) -> f64 {
        self.stop
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn base(&self) -> &ModelParams {
        &self.base
    }

    /// Linearly spaced values, endpoints exact.
    pub fn values(&self) -> Vec<f64> {
        let last = self.steps - 1;
        (0..self.steps)
            .map(|i| {
                if i == last {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / last as f64
                }
            })
            .collect()
    }
}

/// Equilibrium outputs tracked by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Output {
    PR,
    PC,
    WC,
    RC,
    P1,
    P2,
    Theta,
    Eta,
    Profit,
}

impl Output {
    pub const ALL: [Output; 9] = [
        Output::PR,
        Output::PC,
        Output::WC,
        Output::RC,
        Output::P1,
        Output::P2,
        Output::Theta,
        Output::Eta,
        Output::Profit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Output::PR => "P_r",
            Output::PC => "P_c",
            Output::WC => "W_c",
            Output::RC => "R_c",
            Output::P1 => "p1",
            Output::P2 => "p2",
            Output::Theta => "theta",
            Output::Eta => "eta",
            Output::Profit => "profit",
        }
    }

    pub fn of(self, eq: &Equilibrium) -> f64 {
        match self {
            Output::PR => eq.p_r,
            Output::PC => eq.p_c,
            Output::WC => eq.w_c,
            Output::RC => eq.r_c,
            Output::P1 => eq.p1,
            Output::P2 => eq.p2,
            Output::Theta => eq.theta,
            Output::Eta => eq.eta,
            Output::Profit => eq.profit,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Direction {
    /// Every step rises by more than the constancy tolerance.
    Increasing,
    /// Every step falls by more than the constancy tolerance.
    Decreasing,
    /// No step exceeds the tolerance.
    Constant,
    /// Never falls, but some steps are flat.
    NonDecreasing,
    /// Never rises, but some steps are flat.
    NonIncreasing,
    /// Changes sign; lists the parameter values where it turns.
    NonMonotone { turning_points: Vec<f64> },
}

impl Direction {
    /// Name of the shape without turning points.
    pub fn label(&self) -> &'static str {
        match self {
            Direction::Increasing => "increasing",
            Direction::Decreasing => "decreasing",
            Direction::Constant => "constant",
            Direction::NonDecreasing => "non-decreasing",
            Direction::NonIncreasing => "non-increasing",
            Direction::NonMonotone { .. } => "non-monotone",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::NonMonotone { turning_points } => {
                f.write_str("non-monotone (turns at")?;
                for t in turning_points {
                    write!(f, " {t}")?;
                }
                f.write_str(")")
            }
            other => f.write_str(other.label()),
        }
    }
}

/// Classifies a series from its consecutive differences.
pub fn classify(xs: &[f64], ys: &[f64]) -> Direction {
    debug_assert_eq!(xs.len(), ys.len());
    let signs: Vec<i8> = ys
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            if d > CONSTANCY_TOL {
                1
            } else if d < -CONSTANCY_TOL {
                -1
            } else {
                0
            }
        })
        .collect();
    let rises = signs.iter().any(|&s| s > 0);
    let falls = signs.iter().any(|&s| s < 0);
    let flats = signs.contains(&0);
    match (rises, falls, flats) {
        (false, false, _) => Direction::Constant,
        (true, false, false) => Direction::Increasing,
        (false, true, false) => Direction::Decreasing,
        (true, false, true) => Direction::NonDecreasing,
        (false, true, true) => Direction::NonIncreasing,
        (true, true, _) => {
            let mut turning_points = Vec::new();
            let mut last_sign = 0;
            for (i, &s) in signs.iter().enumerate() {
                if s == 0 {
                    continue;
                }
                if last_sign != 0 && s != last_sign {
                    // the turn happens at the point shared by the two steps
                    turning_points.push(xs[i]);
                }
                last_sign = s;
            }
            Direction::NonMonotone { turning_points }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub outcome: Result<Equilibrium, SolverError>,
}

impl SweepPoint {
    /// The equilibrium, if it was solved and is not degenerate.
    pub fn usable(&self) -> Option<&Equilibrium> {
        self.outcome.as_ref().ok().filter(|eq| !eq.is_degenerate())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityTable {
    pub rows: Vec<(Output, Direction)>,
    /// Points skipped because they failed or were degenerate.
    pub gaps: usize,
}

impl MonotonicityTable {
    pub fn direction(&self, output: Output) -> &Direction {
        &self
            .rows
            .iter()
            .find(|(o, _)| *o == output)
            .expect("every output is classified")
            .1
    }
}

impl fmt::Display for MonotonicityTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (output, direction) in &self.rows {
            writeln!(f, "{:<8} {direction}", output.name())?;
        }
        write!(f, "gaps     {}", self.gaps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    /// Ascending in `value`.
    pub points: Vec<SweepPoint>,
    pub monotonicity: MonotonicityTable,
    /// Parameter values whose equilibrium failed the sensing demand check.
    pub validity_violations: Vec<f64>,
}

impl SweepResult {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// Output column over the usable points, as `(value, output)` pairs.
    pub fn column(&self, output: Output) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter_map(|p| p.usable().map(|eq| (p.value, output.of(eq))))
            .collect()
    }
}

/// Direction of each output over the usable points of a sweep.
pub fn summarize_monotonicity(points: &[SweepPoint]) -> MonotonicityTable {
    let usable: Vec<(f64, &Equilibrium)> = points
        .iter()
        .filter_map(|p| p.usable().map(|eq| (p.value, eq)))
        .collect();
    let xs: Vec<f64> = usable.iter().map(|(x, _)| *x).collect();
    let rows = Output::ALL
        .into_iter()
        .map(|output| {
            let ys: Vec<f64> = usable.iter().map(|(_, eq)| output.of(eq)).collect();
            (output, classify(&xs, &ys))
        })
        .collect();
    MonotonicityTable {
        rows,
        gaps: points.len() - usable.len(),
    }
}

/// Solves the market at every grid value of the swept parameter.
pub fn run_sweep(spec: &SweepSpec, cfg: &SolverConfig) -> Result<SweepResult, StaticsError> {
    cfg.validate()
        .map_err(|e| StaticsError::InvalidSpec(e.to_string()))?;
    let parameter = spec.parameter.parameter();
    let mut points = Vec::with_capacity(spec.steps);
    for value in spec.values() {
        let params = spec.base.with(parameter, value)?;
        points.push(SweepPoint {
            value,
            outcome: solver::solve_equilibrium(&params, cfg),
        });
    }
    let validity_violations = points
        .iter()
        .filter(|p| !matches!(&p.outcome, Ok(eq) if eq.sensing_demand_valid))
        .map(|p| p.value)
        .collect();
    let monotonicity = summarize_monotonicity(&points);
    Ok(SweepResult {
        parameter: spec.parameter,
        points,
        monotonicity,
        validity_violations,
    })
}
