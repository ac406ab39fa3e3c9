//! Wind mean/covariance models, integrated-wind statistics and path sampling.
//!
//! The horizontal wind is a pair of iid jointly Gaussian processes. The two
//! statistics every channel formula needs are the variance of the wind
//! integrated over one delay window,
//!
//! ```text
//! sigma_X^2(tau, t) = integral over [t-tau, t]^2 of Cov(v(l1), v(l2)) dl1 dl2
//! ```
//!
//! and the cross-covariance of the integrals over two windows,
//!
//! ```text
//! L(tau1, tau2; t1, t2) = integral over [t1-tau1, t1] x [t2-tau2, t2] of Cov dl1 dl2.
//! ```
//!
//! For the white model (`Cov = sigma_v^2 * delta(l1 - l2)`, intensity in
//! m^2/s) both reduce to `sigma_v^2` times the window overlap length; finite
//! kernels are integrated by a nested trapezoid rule.
//!
//! Note on white-noise units: the white intensity `sigma_v^2` carries m^2/s
//! so that it adds to the diffusion coefficient as an effective diffusivity
//! and `sigma_X^2 = sigma_v^2 * tau`. Discrete sampling uses a per-sample
//! standard deviation of `sigma_v / sqrt(dt)`, which reproduces exactly that
//! integrated variance on the grid.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::math;
use crate::seed;

/// Default trapezoid step (s) for the double integrals; the actual step for
/// a window of length `tau` is `min(DEFAULT_QUAD_STEP, tau / 64)`.
pub const DEFAULT_QUAD_STEP: f64 = 0.05;

/// Largest grid accepted by the dense covariance-factorization sampler.
pub const MAX_DENSE_GRID: usize = 8192;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum WindError {
    /// A delta covariance has no pointwise value; use the integrated
    /// statistics instead.
    PointwiseWhiteCovariance,
    /// Negative window length.
    NegativeDelay { tau: f64 },
    /// Kernel parameters violate positivity requirements.
    InvalidKernel { reason: &'static str },
    /// Covariance matrix failed to factorize even after jitter.
    NotPositiveDefinite { kind: &'static str, size: usize },
    /// Path sampling needs at least two grid points and a positive step.
    InvalidGrid,
    /// Finite-kernel sampling builds a dense matrix; refuse huge grids.
    GridTooLargeForDenseSampling { len: usize },
    /// Displacement query outside the sampled extent.
    OutOfGrid {
        query: (f64, f64),
        valid: (f64, f64),
    },
}

impl fmt::Display for WindError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PointwiseWhiteCovariance => {
                write!(f, "white covariance is a delta; it has no pointwise value")
            }
            Self::NegativeDelay { tau } => write!(f, "window length must be >= 0, got {tau}"),
            Self::InvalidKernel { reason } => write!(f, "invalid kernel: {reason}"),
            Self::NotPositiveDefinite { kind, size } => write!(
                f,
                "covariance matrix ({kind}, {size}x{size}) is not positive definite after jitter"
            ),
            Self::InvalidGrid => write!(f, "grid needs len >= 2 and dt > 0"),
            Self::GridTooLargeForDenseSampling { len } => write!(
                f,
                "grid of {len} points exceeds the dense sampling limit of {MAX_DENSE_GRID}"
            ),
            Self::OutOfGrid { query, valid } => write!(
                f,
                "interval [{}, {}] outside sampled extent [{}, {}]",
                query.0, query.1, valid.0, valid.1
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for WindError {}

// ---------------------------------------------------------------------------
// Covariance kernels
// ---------------------------------------------------------------------------

/// Covariance function of one horizontal wind component.
///
/// All times in seconds; variances in m^2/s^2 except the white intensity,
/// which is m^2/s.
#[derive(Debug, Clone, Copy, PartialEq)]
#[allow(unpredictable_function_pointer_comparisons)] // Custom compares by fn address
pub enum CovarianceKernel {
    /// `Cov(t1, t2) = intensity * delta(t1 - t2)`.
    White { intensity: f64 },
    /// `variance * exp(-|t1 - t2| / correlation_time)`.
    WssExponential { variance: f64, correlation_time: f64 },
    /// `variance * exp(-((t1 - t2) / correlation_time)^2)`.
    WssGaussian { variance: f64, correlation_time: f64 },
    /// Exponential kernel tapered by a Gaussian envelope in mean time
    /// `(t1 + t2) / 2`.
    NonstationaryExponential {
        variance: f64,
        correlation_time: f64,
        envelope_center: f64,
        envelope_width: f64,
    },
    /// Cosine-modulated exponential kernel with a slow sinusoidal
    /// amplitude modulation in mean time.
    NonstationaryOscillatory {
        variance: f64,
        correlation_time: f64,
        oscillation_period: f64,
        modulation_depth: f64,
        modulation_time: f64,
    },
    /// Arbitrary user-supplied covariance function.
    Custom(fn(f64, f64) -> f64),
}

impl CovarianceKernel {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::White { .. } => "white",
            Self::WssExponential { .. } => "wss-exponential",
            Self::WssGaussian { .. } => "wss-gaussian",
            Self::NonstationaryExponential { .. } => "nonstationary-exponential",
            Self::NonstationaryOscillatory { .. } => "nonstationary-oscillatory",
            Self::Custom(_) => "custom",
        }
    }

    /// Wide-sense stationary kernels depend on `t1 - t2` only.
    pub fn is_wss(&self) -> bool {
        matches!(
            self,
            Self::White { .. } | Self::WssExponential { .. } | Self::WssGaussian { .. }
        )
    }

    pub fn validate(&self) -> Result<(), WindError> {
        let bad = |reason| Err(WindError::InvalidKernel { reason });
        match *self {
            Self::White { intensity } => {
                if !(intensity >= 0.0) {
                    return bad("white intensity must be >= 0");
                }
            }
            Self::WssExponential { variance, correlation_time }
            | Self::WssGaussian { variance, correlation_time } => {
                if !(variance >= 0.0) {
                    return bad("variance must be >= 0");
                }
                if !(correlation_time > 0.0) {
                    return bad("correlation time must be > 0");
                }
            }
            Self::NonstationaryExponential { variance, correlation_time, envelope_width, .. } => {
                if !(variance >= 0.0) {
                    return bad("variance must be >= 0");
                }
                if !(correlation_time > 0.0) {
                    return bad("correlation time must be > 0");
                }
                if !(envelope_width > 0.0) {
                    return bad("envelope width must be > 0");
                }
            }
            Self::NonstationaryOscillatory {
                variance,
                correlation_time,
                oscillation_period,
                modulation_depth,
                modulation_time,
            } => {
                if !(variance >= 0.0) {
                    return bad("variance must be >= 0");
                }
                if !(correlation_time > 0.0) {
                    return bad("correlation time must be > 0");
                }
                if !(oscillation_period > 0.0) {
                    return bad("oscillation period must be > 0");
                }
                if !(modulation_depth >= 0.0 && modulation_depth < 1.0) {
                    return bad("modulation depth must be in [0, 1)");
                }
                if !(modulation_time > 0.0) {
                    return bad("modulation time scale must be > 0");
                }
            }
            Self::Custom(_) => {}
        }
        Ok(())
    }

    /// Pointwise covariance value. Rejected for the white kernel, whose
    /// delta has no pointwise value.
    pub fn cov(&self, t1: f64, t2: f64) -> Result<f64, WindError> {
        match *self {
            Self::White { .. } => Err(WindError::PointwiseWhiteCovariance),
            _ => Ok(self.cov_finite(t1, t2)),
        }
    }

    /// Pointwise value for finite kernels; panics on the white kernel.
    fn cov_finite(&self, t1: f64, t2: f64) -> f64 {
        let dt = t1 - t2;
        let mid = 0.5 * (t1 + t2);
        match *self {
            Self::White { .. } => unreachable!("white kernel has no pointwise value"),
            Self::WssExponential { variance, correlation_time } => {
                variance * math::exp(-dt.abs() / correlation_time)
            }
            Self::WssGaussian { variance, correlation_time } => {
                let r = dt / correlation_time;
                variance * math::exp(-r * r)
            }
            Self::NonstationaryExponential {
                variance,
                correlation_time,
                envelope_center,
                envelope_width,
            } => {
                let e = mid - envelope_center;
                variance
                    * math::exp(-dt.abs() / correlation_time)
                    * math::exp(-e * e / (2.0 * envelope_width * envelope_width))
            }
            Self::NonstationaryOscillatory {
                variance,
                correlation_time,
                oscillation_period,
                modulation_depth,
                modulation_time,
            } => {
                variance
                    * math::cos(2.0 * core::f64::consts::PI * dt / oscillation_period)
                    * math::exp(-dt.abs() / correlation_time)
                    * (1.0 + modulation_depth * math::sin(mid / modulation_time))
            }
            Self::Custom(f) => f(t1, t2),
        }
    }

    /// Stationary variance scale: white intensity, or `cov(t, t)` for
    /// finite kernels (evaluated at t = 0).
    pub fn variance_scale(&self) -> f64 {
        match *self {
            Self::White { intensity } => intensity,
            _ => self.cov_finite(0.0, 0.0),
        }
    }
}

// ---------------------------------------------------------------------------
// Integrated-wind statistics
// ---------------------------------------------------------------------------

/// Variance of the wind integrated over `[t - tau, t]`.
pub fn sigma_x_squared(kernel: &CovarianceKernel, tau: f64, t: f64) -> Result<f64, WindError> {
    big_l(kernel, tau, tau, t, t)
}

/// Cross-covariance of the wind integrals over `[t1 - tau1, t1]` and
/// `[t2 - tau2, t2]`.
pub fn big_l(
    kernel: &CovarianceKernel,
    tau1: f64,
    tau2: f64,
    t1: f64,
    t2: f64,
) -> Result<f64, WindError> {
    if tau1 < 0.0 {
        return Err(WindError::NegativeDelay { tau: tau1 });
    }
    if tau2 < 0.0 {
        return Err(WindError::NegativeDelay { tau: tau2 });
    }
    kernel.validate()?;
    if tau1 == 0.0 || tau2 == 0.0 {
        return Ok(0.0);
    }
    if let CovarianceKernel::White { intensity } = *kernel {
        let lo = (t1 - tau1).max(t2 - tau2);
        let hi = t1.min(t2);
        return Ok(intensity * (hi - lo).max(0.0));
    }
    Ok(trapezoid_2d(kernel, t1 - tau1, t1, t2 - tau2, t2))
}

/// Nested trapezoid rule over `[a1, b1] x [a2, b2]`.
fn trapezoid_2d(kernel: &CovarianceKernel, a1: f64, b1: f64, a2: f64, b2: f64) -> f64 {
    let (n1, h1) = quad_steps(b1 - a1);
    let (n2, h2) = quad_steps(b2 - a2);
    let mut total = 0.0;
    for i in 0..=n1 {
        let w1 = if i == 0 || i == n1 { 0.5 } else { 1.0 };
        let x = a1 + h1 * i as f64;
        let mut row = 0.0;
        for j in 0..=n2 {
            let w2 = if j == 0 || j == n2 { 0.5 } else { 1.0 };
            row += w2 * kernel.cov_finite(x, a2 + h2 * j as f64);
        }
        total += w1 * row;
    }
    total * h1 * h2
}

fn quad_steps(len: f64) -> (usize, f64) {
    let target = DEFAULT_QUAD_STEP.min(len / 64.0);
    let n = math::ceil(len / target) as usize;
    let n = n.max(1);
    (n, len / n as f64)
}

// ---------------------------------------------------------------------------
// Wind model and sampled paths
// ---------------------------------------------------------------------------

/// Mean wind plus fluctuation covariance.
///
/// `mean_speed` is applied along the horizontal unit vector from the source
/// to the receiver (positive = toward the receiver); the orthogonal
/// horizontal component has zero mean. Both components fluctuate
/// independently with the same covariance kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindModel {
    pub mean_speed: f64,
    pub kernel: CovarianceKernel,
}

impl WindModel {
    pub fn new(mean_speed: f64, kernel: CovarianceKernel) -> Result<Self, WindError> {
        kernel.validate()?;
        if !(mean_speed >= 0.0) {
            return Err(WindError::InvalidKernel {
                reason: "mean speed must be >= 0 (positive = source toward receiver)",
            });
        }
        Ok(Self { mean_speed, kernel })
    }

    /// White intensity or stationary variance, used where the formulas call
    /// for `sigma_v^2`.
    pub fn sigma_v_squared(&self) -> f64 {
        self.kernel.variance_scale()
    }
}

/// Uniform time grid `t0 + i * dt`, `i = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub len: usize,
}

impl TimeGrid {
    pub fn from_duration(duration: f64, rate_hz: f64) -> Self {
        let dt = 1.0 / rate_hz;
        Self { t0: 0.0, dt, len: math::round(duration * rate_hz) as usize }
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + self.dt * i as f64
    }

    /// End of the extent covered by the samples (each sample covers
    /// `[t_i, t_i + dt)`).
    pub fn end(&self) -> f64 {
        self.t0 + self.dt * self.len as f64
    }
}

/// One sampled realization of the horizontal wind on a uniform grid.
///
/// Stores per-axis samples and their running rectangle-rule integral, so
/// displacement queries are exact differences of the cumulative array and
/// additivity holds bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct WindPath {
    grid: TimeGrid,
    samples: [Vec<f64>; 2],
    cumulative: [Vec<f64>; 2],
}

impl WindPath {
    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn samples(&self, axis: usize) -> &[f64] {
        &self.samples[axis]
    }

    /// Running integral of axis samples; `cumulative[i]` is the displacement
    /// accumulated over `[t0, t_i]`, with `cumulative[0] = 0`.
    pub fn cumulative(&self, axis: usize) -> &[f64] {
        &self.cumulative[axis]
    }

    fn from_samples(grid: TimeGrid, samples: [Vec<f64>; 2]) -> Self {
        let cumulative = [
            cumulative_rectangle(&samples[0], grid.dt),
            cumulative_rectangle(&samples[1], grid.dt),
        ];
        Self { grid, samples, cumulative }
    }

    /// Integral of the sampled wind over `[a, b]` (rectangle rule with the
    /// sample value held over `[t_i, t_i + dt)`).
    pub fn displacement(&self, a: f64, b: f64) -> Result<[f64; 2], WindError> {
        let valid = (self.grid.t0, self.grid.end());
        if a > b || a < valid.0 - 1e-12 || b > valid.1 + 1e-12 {
            return Err(WindError::OutOfGrid { query: (a, b), valid });
        }
        Ok([self.integral_to(0, b) - self.integral_to(0, a),
            self.integral_to(1, b) - self.integral_to(1, a)])
    }

    /// Piecewise-linear cumulative integral evaluated at an arbitrary time.
    fn integral_to(&self, axis: usize, t: f64) -> f64 {
        let rel = ((t - self.grid.t0) / self.grid.dt).clamp(0.0, self.grid.len as f64);
        let idx = (rel as usize).min(self.grid.len.saturating_sub(1));
        let frac = rel - idx as f64;
        self.cumulative[axis][idx] + frac * self.grid.dt * self.samples[axis][idx]
    }
}

fn cumulative_rectangle(samples: &[f64], dt: f64) -> Vec<f64> {
    let mut cum = Vec::with_capacity(samples.len() + 1);
    let mut acc = 0.0;
    cum.push(0.0);
    for &v in samples {
        acc += v * dt;
        cum.push(acc);
    }
    cum
}

/// Sample one wind realization.
///
/// `mean_direction` is the horizontal unit vector the mean speed acts along
/// (zero vector for no preferred direction). White kernels draw independent
/// per-sample values with standard deviation `sigma_v / sqrt(dt)`; finite
/// kernels factorize the dense grid covariance with a diagonal jitter of
/// `1e-10` times the largest diagonal entry. Axis 1 is drawn completely
/// before axis 2, so results are reproducible for a given seed.
pub fn sample_wind_path(
    model: &WindModel,
    mean_direction: [f64; 2],
    grid: TimeGrid,
    seed_value: u64,
) -> Result<WindPath, WindError> {
    model.kernel.validate()?;
    if grid.len < 2 || !(grid.dt > 0.0) {
        return Err(WindError::InvalidGrid);
    }
    let means = [
        model.mean_speed * mean_direction[0],
        model.mean_speed * mean_direction[1],
    ];
    let mut rng = seed::rng_for(seed_value, &[seed::STREAM_WIND]);

    let samples = match model.kernel {
        CovarianceKernel::White { intensity } => {
            let sd = math::sqrt(intensity / grid.dt);
            let mut draw_axis = |mean: f64| -> Vec<f64> {
                (0..grid.len)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        mean + sd * z
                    })
                    .collect()
            };
            [draw_axis(means[0]), draw_axis(means[1])]
        }
        ref kernel => {
            if grid.len > MAX_DENSE_GRID {
                return Err(WindError::GridTooLargeForDenseSampling { len: grid.len });
            }
            let chol = dense_cholesky(kernel, grid)?;
            let mut draw_axis = |mean: f64| -> Vec<f64> {
                let z: Vec<f64> = (0..grid.len).map(|_| rng.sample(StandardNormal)).collect();
                let mut out = vec![mean; grid.len];
                for i in 0..grid.len {
                    let row = &chol[i * grid.len..i * grid.len + i + 1];
                    let mut acc = 0.0;
                    for (j, &l) in row.iter().enumerate() {
                        acc += l * z[j];
                    }
                    out[i] += acc;
                }
                out
            };
            [draw_axis(means[0]), draw_axis(means[1])]
        }
    };
    Ok(WindPath::from_samples(grid, samples))
}

/// Lower Cholesky factor of the grid covariance matrix (row-major, lower
/// triangle meaningful).
fn dense_cholesky(kernel: &CovarianceKernel, grid: TimeGrid) -> Result<Vec<f64>, WindError> {
    let n = grid.len;
    let mut m = vec![0.0f64; n * n];
    let mut max_diag = 0.0f64;
    for i in 0..n {
        for j in 0..=i {
            let v = kernel.cov_finite(grid.time(i), grid.time(j));
            m[i * n + j] = v;
            if i == j {
                max_diag = max_diag.max(v);
            }
        }
    }
    let jitter = 1e-10 * max_diag;
    for i in 0..n {
        m[i * n + i] += jitter;
    }
    // In-place lower Cholesky.
    for i in 0..n {
        for j in 0..=i {
            let mut sum = m[i * n + j];
            for k in 0..j {
                sum -= m[i * n + k] * m[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    if max_diag == 0.0 {
                        // Identically zero kernel: valid degenerate case.
                        m[i * n + i] = 0.0;
                        continue;
                    }
                    return Err(WindError::NotPositiveDefinite {
                        kind: kernel.kind_name(),
                        size: n,
                    });
                }
                m[i * n + i] = math::sqrt(sum);
            } else {
                let d = m[j * n + j];
                m[i * n + j] = if d == 0.0 { 0.0 } else { sum / d };
            }
        }
    }
    Ok(m)
}
