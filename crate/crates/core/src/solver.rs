//! Profit maximization for the monopolist.
//!
//! Total profit separates into a sensing part over `P_r` and a communication
//! part over `(P_c, W_c)`, so the two blocks are solved independently:
//!
//! - sensing: `Π_r` can have several stationary points, so a log-spaced scan
//!   brackets every local maximum and each is polished by golden-section
//!   search;
//! - communication: multi-start downhill simplex in log coordinates.
//!
//! [`brute_force_oracle`] is an exhaustive grid search over the unseparated
//! profit used to verify both.

use thiserror::Error;

use crate::model::{self, Allocation, ModelError, ModelParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Closed search interval `[lo, hi]` with `0 < lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    lo: f64,
    hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self, SolverError> {
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(SolverError::Config(format!(
                "bracket [{lo}, {hi}] must satisfy 0 < lo < hi < inf"
            )));
        }
        Ok(Bracket { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// `n >= 2` log-spaced points from `lo` to `hi`, endpoints exact.
    pub fn log_grid(&self, n: usize) -> Vec<f64> {
        let (a, b) = (self.lo.ln(), self.hi.ln());
        (0..n)
            .map(|i| match i {
                0 => self.lo,
                i if i == n - 1 => self.hi,
                i => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
            })
            .collect()
    }

    fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    fn near_edge(&self, x: f64, rel_tol: f64) -> bool {
        let slack = EDGE_SLACK * rel_tol;
        x <= self.lo * (1.0 + slack) || x >= self.hi * (1.0 - slack)
    }
}

/// Multiples of `rel_tol` within which a point counts as sitting on an edge.
const EDGE_SLACK: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub p_r_bracket: Bracket,
    pub p_c_bracket: Bracket,
    pub w_c_bracket: Bracket,
    /// Convergence tolerance on (relative) arguments.
    pub rel_tol: f64,
    /// Largest acceptable first-order residual at an interior optimum.
    pub foc_tol: f64,
    /// Log-spaced scan points used to bracket sensing maxima.
    pub scan_points: usize,
    /// Points per axis for the 1-D and 2-D verification grids.
    pub oracle_grid: usize,
    /// Points per axis of the coarse 3-D verification grid.
    pub oracle_grid_3d: usize,
    /// Zoom rounds applied around the 3-D grid argmax.
    pub oracle_refinements: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            p_r_bracket: Bracket {
                lo: 1e-3,
                hi: 200.0,
            },
            p_c_bracket: Bracket {
                lo: 1e-4,
                hi: 500.0,
            },
            w_c_bracket: Bracket {
                lo: 1e-4,
                hi: 500.0,
            },
            rel_tol: 1e-9,
            foc_tol: 1e-6,
            scan_points: 1000,
            oracle_grid: 200,
            oracle_grid_3d: 40,
            oracle_refinements: 8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        for (name, v) in [("rel_tol", self.rel_tol), ("foc_tol", self.foc_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SolverError::Config(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        for (name, n) in [
            ("scan_points", self.scan_points),
            ("oracle_grid", self.oracle_grid),
            ("oracle_grid_3d", self.oracle_grid_3d),
        ] {
            if n < 3 {
                return Err(SolverError::Config(format!(
                    "{name} must be at least 3, got {n}"
                )));
            }
        }
        for b in [self.p_r_bracket, self.p_c_bracket, self.w_c_bracket] {
            Bracket::new(b.lo, b.hi)?;
        }
        Ok(())
    }
}

/// How a sub-problem optimum relates to its search region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BlockStatus {
    /// The optimum lies on (within tolerance of) a bracket edge.
    pub boundary: bool,
    /// No point with strictly positive profit exists in the bracket.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensingSolution {
    pub p_r: f64,
    pub profit: f64,
    pub status: BlockStatus,
    /// `|dΠ_r/dP_r|` at `p_r` from a Richardson central difference.
    pub foc_residual: f64,
    /// Local maxima found by the scan and refined.
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommSolution {
    pub p_c: f64,
    pub w_c: f64,
    pub rate: f64,
    pub profit: f64,
    pub status: BlockStatus,
    /// `|∂Π_c/∂P_c|`, `|∂Π_c/∂W_c|` from the analytic gradient.
    pub foc_residuals: [f64; 2],
    /// Simplex starts that met the diameter tolerance.
    pub converged_starts: usize,
}

/// Solved market outcome.
///
/// A degenerate block is reported as no trade: zero quantities and profit,
/// with the price at its choke value.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub p_r: f64,
    pub p_c: f64,
    pub w_c: f64,
    pub r_c: f64,
    pub p1: f64,
    pub p2: f64,
    pub theta: f64,
    pub eta: f64,
    pub profit_r: f64,
    pub profit_c: f64,
    pub profit: f64,
    /// The user's interior demand at `(p1, P_r)` is also its global optimum.
    pub sensing_demand_valid: bool,
    /// `|∂Π_r/∂P_r|`, `|∂Π_c/∂P_c|`, `|∂Π_c/∂W_c|` at the optimum.
    pub foc_residuals: [f64; 3],
    pub sensing_status: BlockStatus,
    pub comm_status: BlockStatus,
}

impl Equilibrium {
    pub fn is_degenerate(&self) -> bool {
        self.sensing_status.degenerate || self.comm_status.degenerate
    }

    pub fn on_boundary(&self) -> bool {
        self.sensing_status.boundary || self.comm_status.boundary
    }

    /// Non-degenerate and passing the user-side optimality check.
    pub fn is_valid(&self) -> bool {
        !self.is_degenerate() && self.sensing_demand_valid
    }

    pub fn allocation(&self) -> Allocation {
        Allocation {
            p_r: self.p_r,
            p_c: self.p_c,
            w_c: self.w_c,
        }
    }
}

/// Richardson-extrapolated central difference.
pub fn richardson_derivative<F>(f: F, x: f64, h: f64) -> Result<f64, ModelError>
where
    F: Fn(f64) -> Result<f64, ModelError>,
{
    let central = |h: f64| -> Result<f64, ModelError> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

fn sensing_foc_residual(p_r: f64, params: &ModelParams) -> Result<f64, ModelError> {
    let d = richardson_derivative(|x| model::profit_r(x, params), p_r, 1e-3 * p_r)?;
    Ok(d.abs())
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization on `[lo, hi]`; returns `(argmax, max)`.
fn golden_section_max<F>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
) -> Result<(f64, f64), ModelError>
where
    F: Fn(f64) -> Result<f64, ModelError>,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..200 {
        if hi - lo <= rel_tol * 0.5 * (lo.abs() + hi.abs()) {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Maximizes `Π_r` over the configured `P_r` bracket.
pub fn maximize_profit_r(
    params: &ModelParams,
    cfg: &SolverConfig,
) -> Result<SensingSolution, SolverError> {
    cfg.validate()?;
    let bracket = cfg.p_r_bracket;
    let grid = bracket.log_grid(cfg.scan_points);
    let values = grid
        .iter()
        .map(|&p| model::profit_r(p, params))
        .collect::<Result<Vec<_>, _>>()?;

    let last = grid.len() - 1;
    let mut best: Option<(f64, f64)> = None;
    let mut candidates = 0;
    for i in 0..=last {
        let left = if i == 0 {
            f64::NEG_INFINITY
        } else {
            values[i - 1]
        };
        let right = if i == last {
            f64::NEG_INFINITY
        } else {
            values[i + 1]
        };
        if values[i] < left || values[i] < right {
            continue;
        }
        // skip the flat right shoulder of a plateau already bracketed
        if i > 0 && values[i] == left {
            continue;
        }
        candidates += 1;
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(last)];
        let (x, fx) = golden_section_max(|p| model::profit_r(p, params), lo, hi, cfg.rel_tol)?;
        let (x, fx) = if values[i] > fx {
            (grid[i], values[i])
        } else {
            (x, fx)
        };
        best = match best {
            Some((bx, bf)) if bf > fx || (bf == fx && bx <= x) => Some((bx, bf)),
            _ => Some((x, fx)),
        };
    }
    let (p_r, profit) = best.expect("scan grid has at least one local maximum");
    let status = BlockStatus {
        boundary: bracket.near_edge(p_r, cfg.rel_tol),
        degenerate: profit.is_nan() || profit <= 0.0,
    };
    Ok(SensingSolution {
        p_r,
        profit,
        status,
        foc_residual: sensing_foc_residual(p_r, params)?,
        candidates,
    })
}

fn comm_foc_residuals(p_c: f64, w_c: f64, params: &ModelParams) -> Result<[f64; 2], ModelError> {
    let rate = model::comm_rate(p_c, w_c, params)?;
    let (d_power, d_bandwidth) = model::comm_rate_gradient(p_c, w_c, params)?;
    let marginal_revenue = params.beta() / ((1.0 + rate) * (1.0 + rate));
    Ok([
        (marginal_revenue * d_power - params.w_p()).abs(),
        (marginal_revenue * d_bandwidth - params.w_w()).abs(),
    ])
}

struct SimplexOutcome {
    point: [f64; 2],
    value: f64,
    converged: bool,
}

const SIMPLEX_MAX_ITERATIONS: usize = 20_000;

/// Nelder-Mead minimization of `f` inside the box `lower..upper`; trial
/// points are projected onto the box.
fn nelder_mead<F>(
    f: &F,
    start: [f64; 2],
    step: [f64; 2],
    lower: [f64; 2],
    upper: [f64; 2],
    tol: f64,
) -> Result<SimplexOutcome, ModelError>
where
    F: Fn([f64; 2]) -> Result<f64, ModelError>,
{
    let project = |p: [f64; 2]| {
        [
            p[0].clamp(lower[0], upper[0]),
            p[1].clamp(lower[1], upper[1]),
        ]
    };
    let eval = |p: [f64; 2]| -> Result<(f64, [f64; 2]), ModelError> {
        let p = project(p);
        Ok((f(p)?, p))
    };

    let mut simplex: Vec<(f64, [f64; 2])> = vec![
        eval(start)?,
        eval([start[0] + step[0], start[1]])?,
        eval([start[0], start[1] + step[1]])?,
    ];
    let mut converged = false;
    for _ in 0..SIMPLEX_MAX_ITERATIONS {
        simplex.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then(a.1[0].total_cmp(&b.1[0]))
                .then(a.1[1].total_cmp(&b.1[1]))
        });
        let diameter = simplex
            .iter()
            .flat_map(|a| {
                simplex
                    .iter()
                    .map(move |b| (a.1[0] - b.1[0]).abs().max((a.1[1] - b.1[1]).abs()))
            })
            .fold(0.0, f64::max);
        if diameter <= tol {
            converged = true;
            break;
        }
        let (best, second, worst) = (simplex[0], simplex[1], simplex[2]);
        let centroid = [
            (best.1[0] + second.1[0]) * 0.5,
            (best.1[1] + second.1[1]) * 0.5,
        ];
        let along = |t: f64| {
            [
                centroid[0] + t * (worst.1[0] - centroid[0]),
                centroid[1] + t * (worst.1[1] - centroid[1]),
            ]
        };

        let reflected = eval(along(-1.0))?;
        if reflected.0 < best.0 {
            let expanded = eval(along(-2.0))?;
            simplex[2] = if expanded.0 < reflected.0 {
                expanded
            } else {
                reflected
            };
        } else if reflected.0 < second.0 {
            simplex[2] = reflected;
        } else {
            let contracted = if reflected.0 < worst.0 {
                eval(along(-0.5))?
            } else {
                eval(along(0.5))?
            };
            if contracted.0 < worst.0.min(reflected.0) {
                simplex[2] = contracted;
            } else {
                for vertex in simplex.iter_mut().skip(1) {
                    let p = [
                        best.1[0] + 0.5 * (vertex.1[0] - best.1[0]),
                        best.1[1] + 0.5 * (vertex.1[1] - best.1[1]),
                    ];
                    *vertex = eval(p)?;
                }
            }
        }
    }
    simplex.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1[0].total_cmp(&b.1[0]))
            .then(a.1[1].total_cmp(&b.1[1]))
    });
    Ok(SimplexOutcome {
        point: simplex[0].1,
        value: simplex[0].0,
        converged,
    })
}

/// Maximizes `Π_c` over the `(P_c, W_c)` rectangle.
///
/// Nine simplex starts on a 3x3 log grid; the best result wins, ties going to
/// the lexicographically smaller `(P_c, W_c)`.
pub fn maximize_profit_c(
    params: &ModelParams,
    cfg: &SolverConfig,
) -> Result<CommSolution, SolverError> {
    cfg.validate()?;
    let (pb, wb) = (cfg.p_c_bracket, cfg.w_c_bracket);
    let lower = [pb.lo.ln(), wb.lo.ln()];
    let upper = [pb.hi.ln(), wb.hi.ln()];
    let neg_profit = |u: [f64; 2]| -> Result<f64, ModelError> {
        Ok(-model::profit_c(u[0].exp(), u[1].exp(), params)?)
    };
    let spans = [upper[0] - lower[0], upper[1] - lower[1]];
    let step = [0.1 * spans[0], 0.1 * spans[1]];

    let mut best: Option<([f64; 2], f64)> = None;
    let mut converged_starts = 0;
    for i in 1..=3 {
        for j in 1..=3 {
            let start = [
                lower[0] + spans[0] * i as f64 / 4.0,
                lower[1] + spans[1] * j as f64 / 4.0,
            ];
            let outcome = nelder_mead(&neg_profit, start, step, lower, upper, cfg.rel_tol)?;
            converged_starts += usize::from(outcome.converged);
            let point = [
                pb.clamp(outcome.point[0].exp()),
                wb.clamp(outcome.point[1].exp()),
            ];
            let profit = -outcome.value;
            best = match best {
                Some((bp, bf))
                    if bf > profit || (bf == profit && (bp[0], bp[1]) <= (point[0], point[1])) =>
                {
                    Some((bp, bf))
                }
                _ => Some((point, profit)),
            };
        }
    }
    let ([p_c, w_c], _) = best.expect("nine starts");
    // recompute at the reported point so profit and rate are consistent with it
    let profit = model::profit_c(p_c, w_c, params)?;
    let rate = model::comm_rate(p_c, w_c, params)?;
    let status = BlockStatus {
        boundary: pb.near_edge(p_c, cfg.rel_tol) || wb.near_edge(w_c, cfg.rel_tol),
        degenerate: profit.is_nan() || profit <= 0.0,
    };
    Ok(CommSolution {
        p_c,
        w_c,
        rate,
        profit,
        status,
        foc_residuals: comm_foc_residuals(p_c, w_c, params)?,
        converged_starts,
    })
}

/// The user prefers buying `p_r_star` at its inverse-demand price to buying
/// nothing: `α θ(P*) - p1(P*) P* >= α θ(0)`.
pub fn check_sensing_demand_validity(
    p_r_star: f64,
    params: &ModelParams,
) -> Result<bool, ModelError> {
    let p1 = model::inverse_demand_p1(p_r_star, params)?;
    let surplus = params.alpha() * model::detection_probability(p_r_star, params)? - p1 * p_r_star;
    let outside_option = params.alpha() * model::detection_probability(0.0, params)?;
    Ok(surplus >= outside_option)
}

/// Solves both blocks and assembles the market outcome.
pub fn solve_equilibrium(
    params: &ModelParams,
    cfg: &SolverConfig,
) -> Result<Equilibrium, SolverError> {
    let sensing = maximize_profit_r(params, cfg)?;
    let comm = maximize_profit_c(params, cfg)?;

    let (p_r, p1, theta, profit_r, valid) = if sensing.status.degenerate {
        (
            0.0,
            model::sensing_choke_price(params),
            model::detection_probability(0.0, params)?,
            0.0,
            false,
        )
    } else {
        (
            sensing.p_r,
            model::inverse_demand_p1(sensing.p_r, params)?,
            model::detection_probability(sensing.p_r, params)?,
            sensing.profit,
            check_sensing_demand_validity(sensing.p_r, params)?,
        )
    };
    let (p_c, w_c, r_c, profit_c) = if comm.status.degenerate {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        (comm.p_c, comm.w_c, comm.rate, comm.profit)
    };

    Ok(Equilibrium {
        p_r,
        p_c,
        w_c,
        r_c,
        p1,
        p2: model::inverse_demand_p2(r_c, params)?,
        theta,
        eta: model::comm_utility(r_c)?,
        profit_r,
        profit_c,
        profit: profit_r + profit_c,
        sensing_demand_valid: valid,
        foc_residuals: [
            sensing.foc_residual,
            comm.foc_residuals[0],
            comm.foc_residuals[1],
        ],
        sensing_status: sensing.status,
        comm_status: comm.status,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub allocation: Allocation,
    pub profit: f64,
    /// Log-width of the final grid cell along each axis (`P_r`, `P_c`, `W_c`).
    pub cell_log_width: [f64; 3],
}

/// Zoom grid: after each round the search interval shrinks to the cells
/// adjacent to the current argmax on every axis.
fn zoom_search<F>(
    brackets: &[Bracket],
    coarse: usize,
    refinements: usize,
    mut f: F,
) -> Result<(Vec<f64>, f64, Vec<f64>), ModelError>
where
    F: FnMut(&[f64]) -> Result<f64, ModelError>,
{
    let dims = brackets.len();
    let mut lo: Vec<f64> = brackets.iter().map(|b| b.lo.ln()).collect();
    let mut hi: Vec<f64> = brackets.iter().map(|b| b.hi.ln()).collect();
    let mut best_point = vec![0.0; dims];
    let mut best_value = f64::NEG_INFINITY;
    let mut widths = vec![0.0; dims];
    let fine = ZOOM_POINTS;

    for round in 0..=refinements {
        let n = if round == 0 { coarse } else { fine };
        let axes: Vec<Vec<f64>> = (0..dims)
            .map(|d| {
                (0..n)
                    .map(|i| lo[d] + (hi[d] - lo[d]) * i as f64 / (n - 1) as f64)
                    .collect()
            })
            .collect();
        for d in 0..dims {
            widths[d] = (hi[d] - lo[d]) / (n - 1) as f64;
        }
        let mut index = vec![0usize; dims];
        let mut round_best = (vec![0usize; dims], f64::NEG_INFINITY);
        let mut point = vec![0.0; dims];
        loop {
            for d in 0..dims {
                point[d] = axes[d][index[d]].exp();
            }
            let v = f(&point)?;
            if v > round_best.1 {
                round_best = (index.clone(), v);
            }
            // odometer increment, last axis fastest
            let mut d = dims;
            loop {
                if d == 0 {
                    break;
                }
                d -= 1;
                index[d] += 1;
                if index[d] < n {
                    break;
                }
                index[d] = 0;
            }
            if index.iter().all(|&i| i == 0) {
                break;
            }
        }
        if round_best.1 > best_value {
            best_value = round_best.1;
            for d in 0..dims {
                best_point[d] = axes[d][round_best.0[d]].exp();
            }
        }
        for d in 0..dims {
            let k = round_best.0[d];
            let (l, h) = (axes[d][k.saturating_sub(1)], axes[d][(k + 1).min(n - 1)]);
            lo[d] = l;
            hi[d] = h;
        }
    }
    Ok((best_point, best_value, widths))
}

/// Points per axis in every zoom round after the coarse one.
const ZOOM_POINTS: usize = 11;

/// Exhaustive search of the unseparated total profit over the three brackets:
/// a coarse `oracle_grid_3d`-per-axis log grid followed by
/// `oracle_refinements` zoom rounds.
pub fn brute_force_oracle(
    params: &ModelParams,
    cfg: &SolverConfig,
) -> Result<OracleResult, SolverError> {
    cfg.validate()?;
    let brackets = [cfg.p_r_bracket, cfg.p_c_bracket, cfg.w_c_bracket];
    let (point, profit, widths) =
        zoom_search(&brackets, cfg.oracle_grid_3d, cfg.oracle_refinements, |x| {
            model::profit_total(
                &Allocation {
                    p_r: x[0],
                    p_c: x[1],
                    w_c: x[2],
                },
                params,
            )
        })?;
    Ok(OracleResult {
        allocation: Allocation {
            p_r: point[0],
            p_c: point[1],
            w_c: point[2],
        },
        profit,
        cell_log_width: [widths[0], widths[1], widths[2]],
    })
}

/// Sensing-only grid search on the same axis and zoom schedule as the 3-D oracle.
pub fn brute_force_sensing(
    params: &ModelParams,
    cfg: &SolverConfig,
    points: usize,
    refinements: usize,
) -> Result<(f64, f64, f64), SolverError> {
    cfg.validate()?;
    let (point, profit, widths) = zoom_search(&[cfg.p_r_bracket], points, refinements, |x| {
        model::profit_r(x[0], params)
    })?;
    Ok((point[0], profit, widths[0]))
}

/// Communication-only grid search; returns `((P_c, W_c), profit, cell log-widths)`.
pub fn brute_force_comm(
    params: &ModelParams,
    cfg: &SolverConfig,
    points: usize,
    refinements: usize,
) -> Result<([f64; 2], f64, [f64; 2]), SolverError> {
    cfg.validate()?;
    let (point, profit, widths) = zoom_search(
        &[cfg.p_c_bracket, cfg.w_c_bracket],
        points,
        refinements,
        |x| model::profit_c(x[0], x[1], params),
    )?;
    Ok(([point[0], point[1]], profit, [widths[0], widths[1]]))
}
