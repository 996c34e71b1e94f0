mod support;

use isac_market::model::{self, Allocation, ModelParams};
use isac_market::solver::{self, SolverConfig};

#[test]
fn sensing_optimum_matches_dense_grid() {
    let params = ModelParams::default();
    let cfg = SolverConfig::default();
    let (lo, hi) = (cfg.p_r_bracket.lo().ln(), cfg.p_r_bracket.hi().ln());
    let n = 100_000;
    let step = (hi - lo) / (n - 1) as f64;
    let (mut best_x, mut best) = (0.0, f64::NEG_INFINITY);
    for i in 0..n {
        let x = (lo + step * i as f64).exp();
        let v = model::profit_r(x, &params).unwrap();
        if v > best {
            best = v;
            best_x = x;
        }
    }
    let s = solver::maximize_profit_r(&params, &cfg).unwrap();
    assert!(
        (s.p_r.ln() - best_x.ln()).abs() <= step,
        "{} vs grid {}",
        s.p_r,
        best_x
    );
    assert!(s.profit >= best);
}

#[test]
fn comm_optimum_matches_grid_and_closed_form() {
    let params = ModelParams::default();
    let cfg = SolverConfig::default();
    let c = solver::maximize_profit_c(&params, &cfg).unwrap();
    let ([p_c, w_c], profit, widths) =
        solver::brute_force_comm(&params, &cfg, cfg.oracle_grid, 6).unwrap();
    assert!((c.p_c.ln() - p_c.ln()).abs() <= widths[0].max(1e-6));
    assert!((c.w_c.ln() - w_c.ln()).abs() <= widths[1].max(1e-6));
    assert!(c.profit >= profit - 1e-12);

    // at the optimum the rate solves (beta / (1 + rho))^2 = cost per unit rate, so
    // rho = sqrt(beta / c) - 1, and the SNR x solves (1 + x) ln(1 + x) - x = (w_w / w_p) gamma_C
    let k = params.w_w() / params.w_p() * params.gamma_c();
    let (mut lo, mut hi) = (0.0f64, 100.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (1.0 + mid) * (1.0 + mid).ln() - mid < k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let cost_per_rate = (params.w_p() * x / params.gamma_c() + params.w_w())
        * std::f64::consts::LN_2
        / (1.0 + x).ln();
    let rho = (params.beta() / cost_per_rate).sqrt() - 1.0;
    assert!((c.rate - rho).abs() <= 1e-6 * rho, "{} vs {rho}", c.rate);
    assert!((c.p_c * params.gamma_c() / c.w_c - x).abs() <= 1e-6 * x);
}

#[test]
fn p1_vanishes_far_out() {
    let params = ModelParams::default();
    assert!(model::inverse_demand_p1(1e3, &params).unwrap() < 1e-100);
    assert_eq!(model::inverse_demand_p1(1e5, &params).unwrap(), 0.0);
}

fn independent_profit(p_r: f64, p_c: f64, w_c: f64) -> f64 {
    // defaults: gamma = 5, gamma_T = gamma_C = alpha = beta = 1, w_p = w_w = 0.01
    let a = (2.0 * p_r).sqrt();
    let b = 10f64.sqrt();
    let p1 = support::marcum_q(2, a, b) - support::marcum_q(1, a, b);
    let rho = w_c * (1.0 + p_c / w_c).log2();
    p1 * p_r + rho / (1.0 + rho) - 0.01 * (p_r + p_c) - 0.01 * w_c
}

#[test]
fn profit_surfaces_match_reimplementation() {
    let params = ModelParams::default();
    let axis = [0.5, 2.0, 5.0, 10.0, 20.0, 40.0];
    for &u in &axis {
        for &v in &axis {
            for (p_r, p_c, w_c) in [(u, v, 1.0), (10.0, u, v)] {
                let got =
                    model::profit_total(&Allocation::new(p_r, p_c, w_c).unwrap(), &params).unwrap();
                let want = independent_profit(p_r, p_c, w_c);
                assert!(
                    (got - want).abs() <= 1e-10,
                    "({p_r}, {p_c}, {w_c}): {got} vs {want}"
                );
            }
        }
    }
}
