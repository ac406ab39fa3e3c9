//! Monte Carlo oracles for the analytic channel statistics.
//!
//! The mean response and autocorrelation formulas are checked against
//! brute-force averages of the impulse response over sampled white-wind
//! realizations. The oracle goes through the Green's-function route
//! (sampled path -> window displacement -> image-pair kernel) and never
//! touches the quadratic-form machinery it validates.
//!
//! Window endpoints are kept on the sampling grid so the discrete white
//! noise reproduces the continuous integrated-wind statistics exactly.

use diffadv_core::kernel::{impulse_response, Geometry, Medium};
use diffadv_core::stats::{autocorrelation, mean_response};
use diffadv_core::wind::{CovarianceKernel, TimeGrid, WindModel};
use diffadv_core::Scenario;

const D_PAPER: f64 = 6.7698e-6;
const ORACLE_DT: f64 = 0.05;

fn scenario(sv2: f64) -> Scenario {
    let s = 0.5f64.sqrt();
    Scenario::new(
        Geometry::new([0.0, 0.0, 1.0], [s, s, 1.0]).unwrap(),
        Medium::new(D_PAPER).unwrap(),
        WindModel::new(0.5, CovarianceKernel::White { intensity: sv2 }).unwrap(),
    )
    .unwrap()
}

struct McEstimate {
    mean: f64,
    se: f64,
}

/// Average `f(h(tau1, t1), h(tau2, t2))` over `n_paths` white-wind
/// realizations.
fn monte_carlo<F: Fn(f64, f64) -> f64>(
    sc: &Scenario,
    taus: (f64, f64),
    ts: (f64, f64),
    n_paths: usize,
    seed0: u64,
    f: F,
) -> McEstimate {
    let horizon = ts.0.max(ts.1) + ORACLE_DT;
    let grid = TimeGrid { t0: 0.0, dt: ORACLE_DT, len: (horizon / ORACLE_DT).ceil() as usize };
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for p in 0..n_paths {
        let path = sc.sample_wind(grid, seed0 + p as u64).unwrap();
        let h1 = impulse_response(&sc.geometry, &sc.medium, &path, taus.0, ts.0).unwrap();
        let h2 = impulse_response(&sc.geometry, &sc.medium, &path, taus.1, ts.1).unwrap();
        let v = f(h1, h2);
        sum += v;
        sum_sq += v * v;
    }
    let n = n_paths as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    McEstimate { mean, se: (var / n).sqrt() }
}

#[test]
fn mean_response_matches_monte_carlo_at_aligned_delay() {
    let sc = scenario(3e-5);
    let (tau, t) = (2.0, 10.0);
    let mc = monte_carlo(&sc, (tau, tau), (t, t), 20_000, 1, |h1, _| h1);
    let analytic = mean_response(tau, t, &sc).unwrap();
    assert!(mc.se > 0.0);
    assert!(
        (analytic - mc.mean).abs() <= 3.0 * mc.se,
        "analytic {analytic} vs MC {} (se {})",
        mc.mean,
        mc.se
    );
}

#[test]
fn mean_response_matches_monte_carlo_off_peak() {
    let sc = scenario(5e-5);
    let (tau, t) = (1.95, 8.0); // one sigma_X off the aligned delay
    let mc = monte_carlo(&sc, (tau, tau), (t, t), 20_000, 2, |h1, _| h1);
    let analytic = mean_response(tau, t, &sc).unwrap();
    assert!(
        (analytic - mc.mean).abs() <= 3.0 * mc.se,
        "analytic {analytic} vs MC {} (se {})",
        mc.mean,
        mc.se
    );
}

#[test]
fn mean_response_matches_monte_carlo_at_reference_operating_point() {
    // Advection-dominated reference point: tiny white intensity, where the
    // response is nearly deterministic.
    let sc = scenario(1e-6);
    let (tau, t) = (2.0, 10.0);
    let mc = monte_carlo(&sc, (tau, tau), (t, t), 10_000, 3, |h1, _| h1);
    let analytic = mean_response(tau, t, &sc).unwrap();
    let tol = 3.0 * mc.se + 1e-9 * analytic.abs();
    assert!(
        (analytic - mc.mean).abs() <= tol,
        "analytic {analytic} vs MC {} (se {})",
        mc.mean,
        mc.se
    );
}

#[test]
fn autocorrelation_singular_branch_matches_second_moment() {
    // Coincident windows route through the rank-one MGF branch.
    let sc = scenario(3e-5);
    let (tau, t) = (2.0, 10.0);
    let mc = monte_carlo(&sc, (tau, tau), (t, t), 20_000, 4, |h1, _| h1 * h1);
    let analytic = autocorrelation(tau, tau, t, t, &sc).unwrap();
    assert!(
        (analytic - mc.mean).abs() <= 3.0 * mc.se,
        "analytic {analytic} vs MC {} (se {})",
        mc.mean,
        mc.se
    );
}

#[test]
fn autocorrelation_full_rank_branch_matches_cross_moment() {
    // Overlapping but distinct windows keep the covariance full rank.
    let sc = scenario(3e-5);
    let (tau1, tau2) = (2.0, 2.05);
    let (t1, t2) = (10.0, 10.5);
    let mc = monte_carlo(&sc, (tau1, tau2), (t1, t2), 20_000, 5, |h1, h2| h1 * h2);
    let analytic = autocorrelation(tau1, tau2, t1, t2, &sc).unwrap();
    assert!(
        (analytic - mc.mean).abs() <= 3.0 * mc.se,
        "analytic {analytic} vs MC {} (se {})",
        mc.mean,
        mc.se
    );
}

#[test]
fn quadrature_sigma_x_matches_path_variance_for_smooth_kernel() {
    // Cross-check the nested trapezoid rule against the empirical variance
    // of the integrated wind for the exponential kernel.
    let kernel = CovarianceKernel::WssExponential { variance: 0.04, correlation_time: 10.0 };
    let model = WindModel::new(0.0, kernel).unwrap();
    let grid = TimeGrid { t0: 0.0, dt: 0.05, len: 100 };
    let n_paths = 100_000;
    let mut vals = Vec::with_capacity(n_paths);
    for p in 0..n_paths {
        let path = diffadv_core::wind::sample_wind_path(&model, [0.0, 0.0], grid, p as u64)
            .unwrap();
        vals.push(path.displacement(0.0, 4.0).unwrap()[0]);
    }
    let n = n_paths as f64;
    let mean: f64 = vals.iter().sum::<f64>() / n;
    let var: f64 = vals.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let analytic = diffadv_core::wind::sigma_x_squared(&kernel, 4.0, 4.0).unwrap();
    // Sample variance of a Gaussian: se ~ var * sqrt(2/(n-1)); allow a small
    // extra term for the discrete-grid covariance bias at dt = 0.05.
    let se = var * (2.0 / (n - 1.0)).sqrt();
    let grid_bias = 0.002 * analytic;
    assert!(
        (var - analytic).abs() <= 3.0 * se + grid_bias,
        "quadrature {analytic} vs sampled {var} (se {se})"
    );
}
