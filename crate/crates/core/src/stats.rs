//! Analytic channel statistics.
//!
//! The impulse response factors as `h(tau, t) = beta(tau) *
//! exp(-alpha(tau) * (X1^2 + X2^2))` where `beta` collects the vertical
//! image pair, `alpha = 1/(4 D tau)`, and `X_i` are independent Gaussians
//! built from the horizontal offsets and the integrated wind. Means and
//! autocorrelations of `h` therefore reduce to moment generating functions
//! of Gaussian quadratic forms evaluated at `t = -1/(4D)`:
//!
//! - mean response: one-dimensional Gaussian integral per axis,
//! - autocorrelation: per-axis 2x2 quadratic form `Q = X^T A X` with
//!   `A = diag(1/tau1, 1/tau2)`, handled by the full-rank determinant
//!   formula, or by the reduced rank-one expansion when the window
//!   covariance matrix becomes singular (coincident windows),
//! - power delay profile: closed form for white wind, with `D + sigma_v^2`
//!   acting as an effective diffusion coefficient.
//!
//! The Peclet number `L mu / (D + sigma_v^2)` decides whether advection or
//! diffusion dominates, and for advection-dominated channels the dispersion
//! time `T_d = sqrt(L^2 (D + sigma_v^2) / (2 sqrt(2) mu^3))` gives the delay
//! spread that a symbol period must cover for the channel to be
//! non-dispersive.

use alloc::vec::Vec;
use core::fmt;

use crate::kernel::{Geometry, Medium};
use crate::mat2::{dot2, SymMat2};
use crate::math;
use crate::scenario::Scenario;
use crate::wind::{self, WindError, WindModel};

/// Relative eigenvalue ratio below which the window covariance is treated
/// as singular and routed to the rank-one MGF branch.
pub const SINGULAR_EIGENVALUE_RATIO: f64 = 1e-10;

/// Default steady-state reference time (s) for WSS autocorrelations.
pub const WSS_REFERENCE_TIME: f64 = 120.0;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum StatsError {
    NonPositiveDelay { tau: f64 },
    /// `1 - 2 t lambda <= 0` for some quadratic-form eigenvalue; cannot
    /// happen at `t = -1/(4D)` with a PSD covariance.
    DivergentMgf,
    /// Operation requires a wide-sense stationary wind kernel.
    RequiresWssWind,
    /// Closed-form power delay profile is derived for white wind.
    RequiresWhiteWind,
    /// Dispersion time is defined for advection-dominated channels.
    ZeroMeanWind,
    NonUniformGrid,
    Wind(WindError),
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonPositiveDelay { tau } => write!(f, "delay must be > 0, got {tau}"),
            Self::DivergentMgf => write!(f, "divergent MGF: 1 - 2 t lambda <= 0"),
            Self::RequiresWssWind => write!(f, "operation requires a WSS wind kernel"),
            Self::RequiresWhiteWind => write!(f, "closed-form PDP requires a white wind model"),
            Self::ZeroMeanWind => write!(f, "dispersion time requires mean wind speed > 0"),
            Self::NonUniformGrid => write!(f, "delay grid must be uniform"),
            Self::Wind(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for StatsError {}

impl From<WindError> for StatsError {
    fn from(e: WindError) -> Self {
        Self::Wind(e)
    }
}

// ---------------------------------------------------------------------------
// Envelope
// ---------------------------------------------------------------------------

/// Delay-dependent deterministic factors of the impulse response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeTerms {
    /// Vertical image-pair envelope (1/m^3).
    pub beta: f64,
    /// Horizontal Gaussian sharpness `1/(4 D tau)` (1/m^2).
    pub alpha: f64,
}

/// Evaluate the envelope at delay `tau`.
pub fn envelope(tau: f64, geometry: &Geometry, medium: &Medium) -> Result<EnvelopeTerms, StatsError> {
    if !(tau > 0.0) {
        return Err(StatsError::NonPositiveDelay { tau });
    }
    let four_dt = 4.0 * medium.diffusion * tau;
    let log_pref = -1.5 * math::ln(core::f64::consts::PI * four_dt);
    let dm = geometry.receiver[2] - geometry.source[2];
    let dp = geometry.receiver[2] + geometry.source[2];
    let beta = math::exp_flushed(log_pref - dm * dm / four_dt)
        - math::exp_flushed(log_pref - dp * dp / four_dt);
    Ok(EnvelopeTerms { beta, alpha: 1.0 / four_dt })
}

// ---------------------------------------------------------------------------
// Quadratic-form MGFs
// ---------------------------------------------------------------------------

/// MGF of `Q = X^T A X`, `X ~ N(mu, Sigma)` with full-rank `Sigma`:
///
/// ```text
/// M(t) = |I - 2 t R|^(-1/2) exp(t mu' S^-1 R (I - 2tR)^-1 S^-1 mu),
/// R = S A S,  S = Sigma^(1/2).
/// ```
///
/// Evaluated through the algebraically identical square-root-free form
/// `|I - 2 t Sigma A|^(-1/2) exp(t mu' A (I - 2 t Sigma A)^(-1) mu)`
/// (conjugating by `S` maps one onto the other), which stays accurate as
/// `Sigma` approaches rank one where the explicit `Sigma^(±1/2)` factors
/// would cancel catastrophically.
pub fn mgf_full_rank(a: &SymMat2, mu: [f64; 2], sigma: &SymMat2, t: f64) -> Result<f64, StatsError> {
    // G = I - 2t Sigma A (general 2x2; Sigma A is similar to the symmetric
    // S A S, so its spectrum is real and the determinant test is exact).
    let g = [
        [1.0 - 2.0 * t * (sigma.a * a.a + sigma.b * a.b), -2.0 * t * (sigma.a * a.b + sigma.b * a.c)],
        [-2.0 * t * (sigma.b * a.a + sigma.c * a.b), 1.0 - 2.0 * t * (sigma.b * a.b + sigma.c * a.c)],
    ];
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    if det <= 0.0 || g[0][0] + g[1][1] <= 0.0 {
        return Err(StatsError::DivergentMgf);
    }
    let ginv_mu = [
        (g[1][1] * mu[0] - g[0][1] * mu[1]) / det,
        (-g[1][0] * mu[0] + g[0][0] * mu[1]) / det,
    ];
    let quad = dot2(a.mul_vec(mu), ginv_mu);
    Ok(math::exp_flushed(-0.5 * math::ln(det) + t * quad))
}

/// MGF of `Q = X^T A X` when `Cov(X) = B B^T` has rank one:
///
/// ```text
/// ln M(t) = -1/2 ln(1 - 2 t l1) + t mu' A mu + 2 t^2 b^2 / (1 - 2 t l1),
/// l1 = B' A B,  b = B' A mu.
/// ```
///
/// `B` is recovered from the dominant eigenpair of `sigma`; a vanishing
/// covariance degrades gracefully to the deterministic `exp(t mu' A mu)`.
pub fn mgf_singular(a: &SymMat2, mu: [f64; 2], sigma: &SymMat2, t: f64) -> Result<f64, StatsError> {
    let (_, hi) = sigma.eigenvalues();
    let v = sigma.max_eigenvector();
    let scale = math::sqrt(hi.max(0.0));
    let b_col = [scale * v[0], scale * v[1]];
    let lambda1 = dot2(b_col, a.mul_vec(b_col));
    let denom = 1.0 - 2.0 * t * lambda1;
    if denom <= 0.0 {
        return Err(StatsError::DivergentMgf);
    }
    let alpha_q = dot2(mu, a.mul_vec(mu));
    let b_scalar = dot2(b_col, a.mul_vec(mu));
    let ln_m = -0.5 * math::ln(denom) + t * alpha_q + 2.0 * t * t * b_scalar * b_scalar / denom;
    Ok(math::exp_flushed(ln_m))
}

/// Dispatch on the conditioning of `sigma`.
fn mgf(a: &SymMat2, mu: [f64; 2], sigma: &SymMat2, t: f64) -> Result<f64, StatsError> {
    let (lo, hi) = sigma.eigenvalues();
    if hi <= 0.0 || lo < SINGULAR_EIGENVALUE_RATIO * hi {
        mgf_singular(a, mu, sigma, t)
    } else {
        mgf_full_rank(a, mu, sigma, t)
    }
}

// ---------------------------------------------------------------------------
// Mean response and autocorrelation
// ---------------------------------------------------------------------------

/// Mean offset along one horizontal axis at delay `tau`:
/// receiver offset minus the mean-wind displacement.
fn mean_offset(scenario: &Scenario, axis: usize, tau: f64) -> f64 {
    let offset = scenario.geometry.horizontal_offset();
    let vel = scenario.mean_velocity();
    offset[axis] - vel[axis] * tau
}

/// Expected impulse response `E[h(tau, t)]`:
///
/// ```text
/// beta(tau) / (1 + 2 alpha sigma_X^2)
///   * exp(-alpha (m1^2 + m2^2) / (1 + 2 alpha sigma_X^2))
/// ```
pub fn mean_response(tau: f64, t: f64, scenario: &Scenario) -> Result<f64, StatsError> {
    let env = envelope(tau, &scenario.geometry, &scenario.medium)?;
    let sig_x2 = wind::sigma_x_squared(&scenario.wind.kernel, tau, t)?;
    let denom = 1.0 + 2.0 * env.alpha * sig_x2;
    let m1 = mean_offset(scenario, 0, tau);
    let m2 = mean_offset(scenario, 1, tau);
    if env.beta == 0.0 {
        return Ok(0.0);
    }
    Ok(math::exp_flushed(
        math::ln(env.beta) - math::ln(denom) - env.alpha * (m1 * m1 + m2 * m2) / denom,
    ))
}

/// Channel autocorrelation `E[h(tau1, t1) h(tau2, t2)]`.
///
/// Each horizontal axis contributes the MGF of a 2x2 Gaussian quadratic
/// form with `A = diag(1/tau1, 1/tau2)`, means from the per-axis offsets,
/// and window covariance built from the integrated-wind statistics,
/// evaluated at `t = -1/(4D)`.
pub fn autocorrelation(
    tau1: f64,
    tau2: f64,
    t1: f64,
    t2: f64,
    scenario: &Scenario,
) -> Result<f64, StatsError> {
    let env1 = envelope(tau1, &scenario.geometry, &scenario.medium)?;
    let env2 = envelope(tau2, &scenario.geometry, &scenario.medium)?;
    if env1.beta == 0.0 || env2.beta == 0.0 {
        return Ok(0.0);
    }
    let kernel = &scenario.wind.kernel;
    let sigma = SymMat2 {
        a: wind::sigma_x_squared(kernel, tau1, t1)?,
        b: wind::big_l(kernel, tau1, tau2, t1, t2)?,
        c: wind::sigma_x_squared(kernel, tau2, t2)?,
    };
    let a = SymMat2::diag(1.0 / tau1, 1.0 / tau2);
    let t_mgf = -1.0 / (4.0 * scenario.medium.diffusion);
    let mut result = env1.beta * env2.beta;
    for axis in 0..2 {
        let mu = [mean_offset(scenario, axis, tau1), mean_offset(scenario, axis, tau2)];
        result *= mgf(&a, mu, &sigma, t_mgf)?;
    }
    Ok(result)
}

/// WSS channel autocorrelation `R_h(tau1, tau2; dt)` at the default
/// steady-state reference time.
pub fn wss_autocorrelation(
    tau1: f64,
    tau2: f64,
    dt: f64,
    scenario: &Scenario,
) -> Result<f64, StatsError> {
    wss_autocorrelation_at(tau1, tau2, dt, scenario, WSS_REFERENCE_TIME)
}

/// Same as [`wss_autocorrelation`] with an explicit reference time; the
/// result is independent of the reference for WSS kernels.
pub fn wss_autocorrelation_at(
    tau1: f64,
    tau2: f64,
    dt: f64,
    scenario: &Scenario,
    reference: f64,
) -> Result<f64, StatsError> {
    if !scenario.wind.kernel.is_wss() {
        return Err(StatsError::RequiresWssWind);
    }
    autocorrelation(tau1, tau2, reference, reference + dt, scenario)
}

// ---------------------------------------------------------------------------
// Power delay profile
// ---------------------------------------------------------------------------

/// Power delay profile with dispersion metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct PdpCurve {
    /// Delay grid (s).
    pub taus: Vec<f64>,
    /// `R_h(tau)` samples (squared concentration units).
    pub values: Vec<f64>,
    /// Peclet number of the scenario.
    pub peclet: f64,
    /// Dispersion time (s); `None` for zero mean wind.
    pub dispersion_time: Option<f64>,
}

/// Closed-form PDP for white wind:
///
/// ```text
/// R_h(tau) = beta^2(tau) * D / (D + sv2)
///   * exp(-(m1^2 + m2^2) / (2 tau (D + sv2)))
/// ```
///
/// with `sv2` the white intensity acting as extra diffusivity.
pub fn pdp(taus: &[f64], scenario: &Scenario) -> Result<PdpCurve, StatsError> {
    if !matches!(scenario.wind.kernel, wind::CovarianceKernel::White { .. }) {
        return Err(StatsError::RequiresWhiteWind);
    }
    let d = scenario.medium.diffusion;
    let sv2 = scenario.wind.sigma_v_squared();
    let d_eff = d + sv2;
    let mut values = Vec::with_capacity(taus.len());
    for &tau in taus {
        if tau < 0.0 {
            return Err(StatsError::NonPositiveDelay { tau });
        }
        if tau == 0.0 {
            values.push(0.0);
            continue;
        }
        let env = envelope(tau, &scenario.geometry, &scenario.medium)?;
        if env.beta == 0.0 {
            values.push(0.0);
            continue;
        }
        let m1 = mean_offset(scenario, 0, tau);
        let m2 = mean_offset(scenario, 1, tau);
        let ln_v = 2.0 * math::ln(env.beta) + math::ln(d / d_eff)
            - (m1 * m1 + m2 * m2) / (2.0 * tau * d_eff);
        values.push(math::exp_flushed(ln_v));
    }
    let pe = peclet(&scenario.geometry, &scenario.medium, &scenario.wind);
    let td = dispersion_time(&scenario.geometry, &scenario.medium, &scenario.wind).ok();
    Ok(PdpCurve { taus: taus.to_vec(), values, peclet: pe, dispersion_time: td })
}

/// Agreement between the closed-form PDP and the general autocorrelation
/// path (`R_h(tau, tau; dt = 0)` through the singular MGF branch).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdpCrossCheck {
    /// Largest relative deviation over the compared grid points.
    pub max_rel_deviation: f64,
    /// Delay where the largest deviation occurred.
    pub worst_tau: f64,
    /// Number of grid points compared (those carrying significant mass).
    pub compared: usize,
}

/// Cross-validate the closed form against the quadratic-form route.
///
/// Only delays carrying at least `1e-12` of the peak value are compared,
/// so the check is not dominated by 0/0 noise in the far tails.
pub fn pdp_cross_check(taus: &[f64], scenario: &Scenario) -> Result<PdpCrossCheck, StatsError> {
    let curve = pdp(taus, scenario)?;
    let peak = curve.values.iter().cloned().fold(0.0f64, f64::max);
    let mut check = PdpCrossCheck { max_rel_deviation: 0.0, worst_tau: f64::NAN, compared: 0 };
    if peak == 0.0 {
        return Ok(check);
    }
    for (&tau, &closed) in curve.taus.iter().zip(&curve.values) {
        if tau <= 0.0 {
            continue;
        }
        let general = wss_autocorrelation(tau, tau, 0.0, scenario)?;
        if closed.max(general) < 1e-12 * peak {
            continue;
        }
        let rel = (closed - general).abs() / closed.max(general);
        check.compared += 1;
        if rel > check.max_rel_deviation {
            check.max_rel_deviation = rel;
            check.worst_tau = tau;
        }
    }
    Ok(check)
}

// ---------------------------------------------------------------------------
// Spectrum
// ---------------------------------------------------------------------------

/// One-sided discrete Fourier transform magnitude of a PDP.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Frequencies (Hz), `k / (N dtau)` for `k = 0..=N/2`.
    pub freqs: Vec<f64>,
    /// `|dtau * sum_n v[n] exp(-2 pi i k n / N)|`.
    pub magnitudes: Vec<f64>,
}

/// DFT magnitude of the PDP samples; the DC bin equals the grid step times
/// the sample sum.
pub fn pdp_spectrum(curve: &PdpCurve) -> Result<Spectrum, StatsError> {
    let n = curve.taus.len();
    if n < 2 {
        return Err(StatsError::NonUniformGrid);
    }
    let dtau = curve.taus[1] - curve.taus[0];
    if !(dtau > 0.0) {
        return Err(StatsError::NonUniformGrid);
    }
    for i in 1..n {
        let step = curve.taus[i] - curve.taus[i - 1];
        if (step - dtau).abs() > 1e-9 * dtau {
            return Err(StatsError::NonUniformGrid);
        }
    }
    let half = n / 2;
    let mut freqs = Vec::with_capacity(half + 1);
    let mut magnitudes = Vec::with_capacity(half + 1);
    let w0 = -2.0 * core::f64::consts::PI / n as f64;
    for k in 0..=half {
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for (idx, &v) in curve.values.iter().enumerate() {
            let ang = w0 * (k as f64) * (idx as f64);
            re += v * math::cos(ang);
            im += v * math::sin(ang);
        }
        freqs.push(k as f64 / (n as f64 * dtau));
        magnitudes.push(dtau * math::hypot(re, im));
    }
    Ok(Spectrum { freqs, magnitudes })
}

// ---------------------------------------------------------------------------
// Dispersion characterization
// ---------------------------------------------------------------------------

/// Peclet number `L mu / (D + sigma_v^2)`: advection rate over diffusion
/// rate. `Pe >> 10` marks advection dominance.
pub fn peclet(geometry: &Geometry, medium: &Medium, wind: &WindModel) -> f64 {
    geometry.horizontal_distance() * wind.mean_speed
        / (medium.diffusion + wind.sigma_v_squared())
}

/// Channel dispersion time
/// `T_d = sqrt(L^2 (D + sigma_v^2) / (2 sqrt(2) mu^3))`, the delay spread a
/// symbol period must cover. Defined for advection-dominated channels
/// (`mu > 0`).
pub fn dispersion_time(
    geometry: &Geometry,
    medium: &Medium,
    wind: &WindModel,
) -> Result<f64, StatsError> {
    if !(wind.mean_speed > 0.0) {
        return Err(StatsError::ZeroMeanWind);
    }
    let l = geometry.horizontal_distance();
    let mu = wind.mean_speed;
    let d_eff = medium.diffusion + wind.sigma_v_squared();
    Ok(math::sqrt(l * l * d_eff / (2.0 * math::sqrt(2.0) * mu * mu * mu)))
}

/// Dispersion classification of a symbol period against the channel
/// dispersion time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelClass {
    NonDispersive,
    Dispersive,
}

impl fmt::Display for ChannelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonDispersive => write!(f, "non-dispersive"),
            Self::Dispersive => write!(f, "dispersive"),
        }
    }
}

/// `T_sym >= T_d` is non-dispersive; shorter symbols are dispersive.
pub fn classify(t_sym: f64, t_d: f64) -> ChannelClass {
    debug_assert!(t_sym > 0.0 && t_d > 0.0);
    if t_sym >= t_d {
        ChannelClass::NonDispersive
    } else {
        ChannelClass::Dispersive
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wind::CovarianceKernel;
    use alloc::vec;

    const D_PAPER: f64 = 6.7698e-6;

    fn paper_scenario(mean_speed: f64, kernel: CovarianceKernel) -> Scenario {
        let s = math::sqrt(0.5);
        Scenario::new(
            Geometry::new([0.0, 0.0, 1.0], [s, s, 1.0]).unwrap(),
            Medium::new(D_PAPER).unwrap(),
            WindModel::new(mean_speed, kernel).unwrap(),
        )
        .unwrap()
    }

    fn white(intensity: f64) -> CovarianceKernel {
        CovarianceKernel::White { intensity }
    }

    // -- envelope ---------------------------------------------------------

    #[test]
    fn alpha_at_paper_point() {
        let sc = paper_scenario(0.5, white(1e-6));
        let env = envelope(4.0, &sc.geometry, &sc.medium).unwrap();
        let expected = 1.0 / (4.0 * D_PAPER * 4.0); // ~9232.15 1/m^2
        assert!((env.alpha - expected).abs() < 1e-9 * expected);
        assert!((env.alpha - 9232.0).abs() < 1.0);
    }

    #[test]
    fn beta_at_equal_heights() {
        let sc = paper_scenario(0.5, white(1e-6));
        let env = envelope(4.0, &sc.geometry, &sc.medium).unwrap();
        let four_dt = 4.0 * D_PAPER * 4.0;
        let expected =
            math::powf(core::f64::consts::PI * four_dt, -1.5) * (1.0 - math::exp(-4.0 / four_dt));
        assert!((env.beta - expected).abs() <= 1e-12 * expected, "{} vs {expected}", env.beta);
    }

    #[test]
    fn beta_vanishes_at_the_boundary() {
        let geo = Geometry::new([0.0, 0.0, 1.0], [1.0, 0.0, 1e-12]).unwrap();
        let med = Medium::new(D_PAPER).unwrap();
        let env = envelope(1.0, &geo, &med).unwrap();
        assert!(env.beta.abs() < 1e-20);
    }

    #[test]
    fn envelope_rejects_nonpositive_delay() {
        let sc = paper_scenario(0.5, white(1e-6));
        assert!(envelope(0.0, &sc.geometry, &sc.medium).is_err());
        assert!(envelope(-1.0, &sc.geometry, &sc.medium).is_err());
    }

    // -- mean response ------------------------------------------------------

    #[test]
    fn mean_response_with_zero_variance_is_deterministic() {
        let sc = paper_scenario(0.5, white(0.0));
        let tau = 1.7;
        let env = envelope(tau, &sc.geometry, &sc.medium).unwrap();
        let vel = sc.mean_velocity();
        let off = sc.geometry.horizontal_offset();
        let m1 = off[0] - vel[0] * tau;
        let m2 = off[1] - vel[1] * tau;
        let expected = env.beta * math::exp(-env.alpha * (m1 * m1 + m2 * m2));
        let got = mean_response(tau, 10.0, &sc).unwrap();
        assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1e-300));
    }

    #[test]
    fn mean_response_peaks_near_transit_delay() {
        // With the mean wind aimed at the receiver, the expected response
        // peaks where the mean displacement covers the horizontal distance.
        let sc = paper_scenario(0.5, white(1e-6));
        let mut best = (0.0, 0.0);
        let mut tau = 1.5;
        while tau < 2.5 {
            let v = mean_response(tau, 10.0, &sc).unwrap();
            if v > best.1 {
                best = (tau, v);
            }
            tau += 0.001;
        }
        assert!((best.0 - 2.0).abs() < 0.02, "peak at {}", best.0);
    }

    // -- quadratic-form MGFs -----------------------------------------------

    /// Verbatim evaluation through the symmetric square root of Sigma:
    /// `|I - 2tR|^(-1/2) exp(t mu' S^-1 R (I - 2tR)^-1 S^-1 mu)`, `R = SAS`.
    /// Independent route used to pin the production form on well-conditioned
    /// inputs.
    fn mgf_full_rank_reference(a: &SymMat2, mu: [f64; 2], sigma: &SymMat2, t: f64) -> f64 {
        let s = sigma.sqrt_psd();
        let r = s.sandwich(a);
        let m = SymMat2 { a: 1.0 - 2.0 * t * r.a, b: -2.0 * t * r.b, c: 1.0 - 2.0 * t * r.c };
        let m_inv = m.inverse().unwrap();
        let w = s.inverse().unwrap().mul_vec(mu);
        // R and (I - 2tR)^-1 commute, so R M^-1 is symmetric.
        let quad = dot2(w, r.mul_vec(m_inv.mul_vec(w)));
        math::powf(m.det(), -0.5) * math::exp(t * quad)
    }

    #[test]
    fn full_rank_mgf_matches_algebraic_reference() {
        let a = SymMat2::diag(1.0 / 1.5, 1.0 / 2.5);
        let cases = [
            (SymMat2 { a: 0.02, b: 0.005, c: 0.03 }, [0.1, -0.2]),
            (SymMat2 { a: 1.0, b: -0.3, c: 0.5 }, [0.0, 0.0]),
            (SymMat2 { a: 0.004, b: 0.0039, c: 0.004 }, [0.05, 0.04]),
        ];
        for (sigma, mu) in cases {
            for t in [-0.1, -10.0, -1.0 / (4.0 * D_PAPER)] {
                let reference = mgf_full_rank_reference(&a, mu, &sigma, t);
                let got = mgf_full_rank(&a, mu, &sigma, t).unwrap();
                assert!(
                    (got - reference).abs() <= 1e-10 * reference.abs().max(1e-300),
                    "{got} vs {reference} (t={t})"
                );
            }
        }
    }

    #[test]
    fn branches_agree_approaching_rank_one() {
        // Family Sigma(rho) with off-diagonal rho * sqrt(s1 s2); the
        // full-rank branch must converge to the rank-one branch before the
        // switch threshold.
        let a = SymMat2::diag(1.0 / 2.0, 1.0 / 2.0);
        let mu = [0.01, -0.015];
        let (s1, s2) = (2e-5, 2e-5);
        let t = -1.0 / (4.0 * D_PAPER);
        let limit = {
            let sigma = SymMat2 { a: s1, b: math::sqrt(s1 * s2), c: s2 };
            mgf_singular(&a, mu, &sigma, t).unwrap()
        };
        let mut last_dev = f64::INFINITY;
        for one_minus_rho in [1e-6, 1e-7, 1e-8, 1e-9] {
            let rho: f64 = 1.0 - one_minus_rho;
            let sigma = SymMat2 { a: s1, b: rho * math::sqrt(s1 * s2), c: s2 };
            let (lo, hi) = sigma.eigenvalues();
            assert!(lo >= SINGULAR_EIGENVALUE_RATIO * hi, "family crossed the switch threshold");
            let full = mgf_full_rank(&a, mu, &sigma, t).unwrap();
            let dev = (full - limit).abs() / limit;
            assert!(dev <= last_dev * 1.001, "deviation not shrinking at rho={rho}");
            last_dev = dev;
            if one_minus_rho <= 1e-7 {
                assert!(dev <= 1e-6, "rho={rho}: {full} vs {limit} (dev {dev})");
            }
        }
    }

    #[test]
    fn degenerate_covariance_reduces_to_deterministic_product() {
        let sc = paper_scenario(0.5, white(0.0));
        let (tau1, tau2, t1, t2) = (1.8, 2.2, 10.0, 12.0);
        let r = autocorrelation(tau1, tau2, t1, t2, &sc).unwrap();
        let product =
            mean_response(tau1, t1, &sc).unwrap() * mean_response(tau2, t2, &sc).unwrap();
        assert!(
            (r - product).abs() <= 1e-10 * product.abs().max(1e-300),
            "{r} vs {product}"
        );
    }

    #[test]
    fn autocorrelation_symmetric_under_relabeling() {
        let sc = paper_scenario(0.5, white(3e-5));
        let a = autocorrelation(1.9, 2.1, 10.0, 11.0, &sc).unwrap();
        let b = autocorrelation(2.1, 1.9, 11.0, 10.0, &sc).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "{a} vs {b}");
    }

    #[test]
    fn autocorrelation_cauchy_schwarz_on_grid() {
        let sc = paper_scenario(0.5, white(3e-5));
        let taus: Vec<f64> = (1..=10).map(|i| 1.6 + 0.08 * i as f64).collect();
        for &tau1 in &taus {
            for &tau2 in &taus {
                let r12 = autocorrelation(tau1, tau2, 10.0, 10.5, &sc).unwrap();
                let r11 = autocorrelation(tau1, tau1, 10.0, 10.0, &sc).unwrap();
                let r22 = autocorrelation(tau2, tau2, 10.5, 10.5, &sc).unwrap();
                assert!(
                    r12 * r12 <= r11 * r22 * (1.0 + 1e-9) + 1e-300,
                    "CS violated at ({tau1}, {tau2})"
                );
            }
        }
    }

    #[test]
    fn wss_autocorrelation_independent_of_reference() {
        let exp_kernel =
            CovarianceKernel::WssExponential { variance: 0.04, correlation_time: 10.0 };
        for kernel in [white(3e-5), exp_kernel] {
            let sc = paper_scenario(0.5, kernel);
            let a = wss_autocorrelation_at(2.0, 2.2, 1.0, &sc, 120.0).unwrap();
            let b = wss_autocorrelation_at(2.0, 2.2, 1.0, &sc, 500.0).unwrap();
            assert!(
                (a - b).abs() <= 1e-10 * a.abs().max(1e-300),
                "{} reference dependence: {a} vs {b}",
                sc.wind.kernel.kind_name()
            );
        }
    }

    #[test]
    fn wss_autocorrelation_rejects_nonstationary_kernels() {
        let k = CovarianceKernel::NonstationaryExponential {
            variance: 0.04,
            correlation_time: 10.0,
            envelope_center: 5.0,
            envelope_width: 30.0,
        };
        let sc = paper_scenario(0.5, k);
        assert_eq!(
            wss_autocorrelation(2.0, 2.0, 0.0, &sc),
            Err(StatsError::RequiresWssWind)
        );
    }

    #[test]
    fn distant_windows_factorize_for_white_wind() {
        let sc = paper_scenario(0.5, white(3e-5));
        let (tau1, tau2) = (2.0, 2.1);
        let dt = 100.0; // far beyond any window overlap
        let joint = wss_autocorrelation(tau1, tau2, dt, &sc).unwrap();
        let product = mean_response(tau1, WSS_REFERENCE_TIME, &sc).unwrap()
            * mean_response(tau2, WSS_REFERENCE_TIME + dt, &sc).unwrap();
        assert!(
            (joint - product).abs() <= 1e-6 * product.abs().max(1e-300),
            "{joint} vs {product}"
        );
    }

    // -- PDP ---------------------------------------------------------------

    #[test]
    fn pdp_requires_white_wind() {
        let sc = paper_scenario(
            0.5,
            CovarianceKernel::WssExponential { variance: 0.04, correlation_time: 10.0 },
        );
        assert_eq!(pdp(&[1.0], &sc), Err(StatsError::RequiresWhiteWind));
    }

    #[test]
    fn pdp_at_exponent_zero_delay() {
        let sc = paper_scenario(0.5, white(3e-5));
        let l = sc.geometry.horizontal_distance();
        let tau_star = l / sc.wind.mean_speed;
        let curve = pdp(&[tau_star], &sc).unwrap();
        let env = envelope(tau_star, &sc.geometry, &sc.medium).unwrap();
        let d = sc.medium.diffusion;
        let expected = env.beta * env.beta * d / (d + 3e-5);
        assert!(
            (curve.values[0] - expected).abs() <= 1e-9 * expected,
            "{} vs {expected}",
            curve.values[0]
        );
    }

    #[test]
    fn pdp_vanishes_at_zero_delay() {
        let sc = paper_scenario(0.5, white(3e-5));
        let curve = pdp(&[0.0, 1e-6], &sc).unwrap();
        assert_eq!(curve.values[0], 0.0);
        assert_eq!(curve.values[1], 0.0); // essential singularity flushes
    }

    #[test]
    fn pdp_peak_tracks_distance_over_speed() {
        for (dist, expected) in [(1.0, 2.0), (5.0, 10.0), (10.0, 20.0)] {
            let s = dist * math::sqrt(0.5);
            let sc = Scenario::new(
                Geometry::new([0.0, 0.0, 1.0], [s, s, 1.0]).unwrap(),
                Medium::new(D_PAPER).unwrap(),
                WindModel::new(0.5, white(1e-6)).unwrap(),
            )
            .unwrap();
            let taus: Vec<f64> = (1..=4000).map(|i| expected * i as f64 / 2000.0).collect();
            let curve = pdp(&taus, &sc).unwrap();
            let (mut best_tau, mut best) = (0.0, 0.0);
            for (&tau, &v) in curve.taus.iter().zip(&curve.values) {
                if v > best {
                    best = v;
                    best_tau = tau;
                }
            }
            assert!(
                (best_tau - expected).abs() <= 0.1 * expected,
                "distance {dist}: peak at {best_tau}, expected ~{expected}"
            );
        }
    }

    #[test]
    fn closed_form_pdp_matches_quadratic_form_route() {
        let sc = paper_scenario(0.5, white(3e-5));
        let taus: Vec<f64> = (1..=200).map(|i| 1.5 + i as f64 * 0.005).collect();
        let check = pdp_cross_check(&taus, &sc).unwrap();
        assert!(check.compared > 50, "only {} points compared", check.compared);
        assert!(
            check.max_rel_deviation < 1e-9,
            "closed form deviates by {} at tau {}",
            check.max_rel_deviation,
            check.worst_tau
        );
    }

    // -- spectrum ------------------------------------------------------------

    fn curve_from(taus: Vec<f64>, values: Vec<f64>) -> PdpCurve {
        PdpCurve { taus, values, peclet: 0.0, dispersion_time: None }
    }

    #[test]
    fn spectrum_of_zero_curve_is_zero() {
        let taus: Vec<f64> = (0..64).map(|i| i as f64 * 0.1).collect();
        let spec = pdp_spectrum(&curve_from(taus, vec![0.0; 64])).unwrap();
        assert!(spec.magnitudes.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn dc_bin_equals_step_times_sum() {
        let taus: Vec<f64> = (0..128).map(|i| i as f64 * 0.05).collect();
        let values: Vec<f64> = (0..128).map(|i| math::exp(-(i as f64 - 40.0).powi(2) / 50.0)).collect();
        let total: f64 = values.iter().sum();
        let spec = pdp_spectrum(&curve_from(taus, values)).unwrap();
        let expected = 0.05 * total;
        assert!((spec.magnitudes[0] - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn spectrum_rejects_nonuniform_grid() {
        let curve = curve_from(vec![0.0, 0.1, 0.3], vec![1.0, 1.0, 1.0]);
        assert_eq!(pdp_spectrum(&curve), Err(StatsError::NonUniformGrid));
    }

    #[test]
    fn wider_pdp_gives_narrower_spectrum() {
        // -3 dB width of the spectrum must shrink as the white intensity
        // (and hence the PDP spread) grows.
        let half_width_hz = |sv2: f64| -> f64 {
            let sc = paper_scenario(0.5, white(sv2));
            let taus: Vec<f64> = (0..6000).map(|i| i as f64 * 0.005).collect();
            let spec = pdp_spectrum(&pdp(&taus, &sc).unwrap()).unwrap();
            let dc = spec.magnitudes[0];
            let target = dc / math::sqrt(2.0);
            for (f, m) in spec.freqs.iter().zip(&spec.magnitudes) {
                if *m < target {
                    return *f;
                }
            }
            *spec.freqs.last().unwrap()
        };
        let narrow_pdp = half_width_hz(1e-4);
        let wide_pdp = half_width_hz(1e-2);
        assert!(
            wide_pdp < narrow_pdp,
            "spectral width did not shrink: {wide_pdp} vs {narrow_pdp}"
        );
    }

    // -- Peclet and dispersion time -----------------------------------------

    #[test]
    fn peclet_reproduces_reference_points() {
        let cases = [
            (0.07, 0.0025, 27.92, 0.01),
            (0.5, 1e-6, 64351.0, 1.0),
            (0.5, 0.16, 3.12, 0.01),
        ];
        for (mu, sv2, expected, tol) in cases {
            let sc = paper_scenario(mu, white(sv2));
            let pe = peclet(&sc.geometry, &sc.medium, &sc.wind);
            assert!(
                (pe - expected).abs() <= tol,
                "mu={mu} sv2={sv2}: Pe {pe} vs {expected}"
            );
        }
    }

    #[test]
    fn dispersion_time_at_reference_point() {
        let sc = paper_scenario(0.07, white(0.0025));
        let td = dispersion_time(&sc.geometry, &sc.medium, &sc.wind).unwrap();
        assert!((td - 1.607).abs() < 0.005, "Td {td}");
    }

    #[test]
    fn dispersion_time_scalings() {
        let base = paper_scenario(0.07, white(0.0025));
        let td = dispersion_time(&base.geometry, &base.medium, &base.wind).unwrap();

        // Doubling the distance doubles Td.
        let s = 2.0 * math::sqrt(0.5);
        let far = Scenario::new(
            Geometry::new([0.0, 0.0, 1.0], [s, s, 1.0]).unwrap(),
            base.medium,
            base.wind,
        )
        .unwrap();
        let td_far = dispersion_time(&far.geometry, &far.medium, &far.wind).unwrap();
        assert!((td_far - 2.0 * td).abs() <= 1e-12 * td_far);

        // Quadrupling the speed divides Td by 8.
        let fast = paper_scenario(0.28, white(0.0025));
        let td_fast = dispersion_time(&fast.geometry, &fast.medium, &fast.wind).unwrap();
        assert!((td_fast - td / 8.0).abs() <= 1e-12 * td, "{td_fast} vs {}", td / 8.0);
    }

    #[test]
    fn dispersion_time_requires_mean_wind() {
        let sc = paper_scenario(0.0, white(0.0025));
        assert_eq!(
            dispersion_time(&sc.geometry, &sc.medium, &sc.wind),
            Err(StatsError::ZeroMeanWind)
        );
    }

    #[test]
    fn classification_matches_reference_symbol_periods() {
        assert_eq!(classify(2.0, 1.607), ChannelClass::NonDispersive);
        assert_eq!(classify(1.0, 1.607), ChannelClass::Dispersive);
        assert_eq!(classify(1.607, 1.607), ChannelClass::NonDispersive);
    }

    #[test]
    fn classification_is_scale_invariant() {
        for scale in [1e-3, 1.0, 1e3] {
            assert_eq!(classify(2.0 * scale, 1.6 * scale), ChannelClass::NonDispersive);
            assert_eq!(classify(1.0 * scale, 1.6 * scale), ChannelClass::Dispersive);
        }
    }
}
