//! Diffusion Green's functions and the time-varying impulse response.
//!
//! The concentration field obeys a diffusion-advection equation with a
//! spatially uniform, time-varying horizontal wind and a perfectly absorbing
//! plane at `x3 = 0`. Substituting the moving frame `y = x - r(t)` (with
//! `r(t)` the integrated wind) removes the advection term, leaving a heat
//! equation whose free-space kernel is
//!
//! ```text
//! Phi(y, t) = (4 pi D t)^(-3/2) exp(-|y|^2 / (4 D t)),   t > 0,
//! ```
//!
//! and whose half-space solution follows by subtracting a mirrored source
//! (method of images). For a point source the impulse response at delay
//! `tau` and observation time `t` is the image pair evaluated at the
//! receiver offset shifted by the wind displacement accumulated over
//! `[t - tau, t]`; it depends on the wind only through that window integral,
//! so constant wind reduces the channel to linear time-invariant.

use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::wind::{WindError, WindPath};

// ---------------------------------------------------------------------------
// Geometry and medium
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    /// Source and receiver must sit strictly above the absorbing plane.
    BelowAbsorbingPlane { which: &'static str, x3: f64 },
    /// Coincident source and receiver make the zero-delay limit singular.
    CoincidentEndpoints,
    /// Nonpositive diffusion coefficient.
    InvalidDiffusion { d: f64 },
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BelowAbsorbingPlane { which, x3 } => {
                write!(f, "{which} must satisfy x3 > 0 (absorbing plane), got {x3}")
            }
            Self::CoincidentEndpoints => write!(f, "source and receiver must differ"),
            Self::InvalidDiffusion { d } => write!(f, "diffusion coefficient must be > 0, got {d}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for GeometryError {}

/// Source and receiver positions (m) above the absorbing plane `x3 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub source: [f64; 3],
    pub receiver: [f64; 3],
}

impl Geometry {
    pub fn new(source: [f64; 3], receiver: [f64; 3]) -> Result<Self, GeometryError> {
        if !(source[2] > 0.0) {
            return Err(GeometryError::BelowAbsorbingPlane { which: "source", x3: source[2] });
        }
        if !(receiver[2] > 0.0) {
            return Err(GeometryError::BelowAbsorbingPlane { which: "receiver", x3: receiver[2] });
        }
        if source == receiver {
            return Err(GeometryError::CoincidentEndpoints);
        }
        Ok(Self { source, receiver })
    }

    /// Horizontal receiver-minus-source offset (m).
    pub fn horizontal_offset(&self) -> [f64; 2] {
        [self.receiver[0] - self.source[0], self.receiver[1] - self.source[1]]
    }

    /// Horizontal source-to-receiver distance (m).
    pub fn horizontal_distance(&self) -> f64 {
        let o = self.horizontal_offset();
        math::hypot(o[0], o[1])
    }

    /// Horizontal unit vector from source toward receiver; zero when the
    /// two share a horizontal position.
    pub fn wind_direction(&self) -> [f64; 2] {
        let o = self.horizontal_offset();
        let n = math::hypot(o[0], o[1]);
        if n == 0.0 {
            [0.0, 0.0]
        } else {
            [o[0] / n, o[1] / n]
        }
    }
}

/// Propagation medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    /// Diffusion coefficient (m^2/s).
    pub diffusion: f64,
}

impl Medium {
    pub fn new(diffusion: f64) -> Result<Self, GeometryError> {
        if !(diffusion > 0.0) {
            return Err(GeometryError::InvalidDiffusion { d: diffusion });
        }
        Ok(Self { diffusion })
    }
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

/// Free-space heat kernel `(4 pi D t)^(-3/2) exp(-|y|^2 / (4 D t))` for
/// `t > 0`, zero for `t <= 0`. Units 1/m^3 per unit released mass.
pub fn heat_kernel(offset: [f64; 3], t: f64, diffusion: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let r2 = offset[0] * offset[0] + offset[1] * offset[1] + offset[2] * offset[2];
    let four_dt = 4.0 * diffusion * t;
    math::exp_flushed(-1.5 * math::ln(core::f64::consts::PI * four_dt) - r2 / four_dt)
}

/// Half-space kernel: direct heat kernel minus the image mirrored in the
/// absorbing plane (`z3 -> -z3`). Vanishes identically at `y3 = 0`.
pub fn image_kernel(
    horizontal: [f64; 2],
    y3: f64,
    source_horizontal: [f64; 2],
    z3: f64,
    t: f64,
    diffusion: f64,
) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let dx = horizontal[0] - source_horizontal[0];
    let dy = horizontal[1] - source_horizontal[1];
    let h2 = dx * dx + dy * dy;
    let four_dt = 4.0 * diffusion * t;
    let log_pref = -1.5 * math::ln(core::f64::consts::PI * four_dt) - h2 / four_dt;
    let dm = y3 - z3;
    let dp = y3 + z3;
    math::exp_flushed(log_pref - dm * dm / four_dt) - math::exp_flushed(log_pref - dp * dp / four_dt)
}

/// Image-pair impulse response for a given horizontal wind displacement
/// accumulated over the delay window (m).
///
/// This is the pure evaluation shared by [`impulse_response`] and the
/// simulation engines; `h(0, t)` is defined as 0 (the continuous limit for
/// distinct endpoints).
pub fn impulse_response_shifted(
    geometry: &Geometry,
    medium: &Medium,
    window_displacement: [f64; 2],
    tau: f64,
) -> f64 {
    if tau <= 0.0 {
        return 0.0;
    }
    let offset = geometry.horizontal_offset();
    let dx = offset[0] - window_displacement[0];
    let dy = offset[1] - window_displacement[1];
    let h2 = dx * dx + dy * dy;
    let four_dt = 4.0 * medium.diffusion * tau;
    let log_pref = -1.5 * math::ln(core::f64::consts::PI * four_dt) - h2 / four_dt;
    let dm = geometry.receiver[2] - geometry.source[2];
    let dp = geometry.receiver[2] + geometry.source[2];
    math::exp_flushed(log_pref - dm * dm / four_dt) - math::exp_flushed(log_pref - dp * dp / four_dt)
}

/// Time-varying impulse response `h(tau, t)` for one wind realization:
/// concentration at the receiver at time `t` due to a unit impulse released
/// `tau` seconds earlier.
pub fn impulse_response(
    geometry: &Geometry,
    medium: &Medium,
    path: &WindPath,
    tau: f64,
    t: f64,
) -> Result<f64, WindError> {
    if tau < 0.0 {
        return Err(WindError::NegativeDelay { tau });
    }
    if tau == 0.0 {
        // Continuous limit for receiver != source; avoids querying an
        // empty window at the grid edge.
        return Ok(0.0);
    }
    let disp = path.displacement(t - tau, t)?;
    Ok(impulse_response_shifted(geometry, medium, disp, tau))
}

// ---------------------------------------------------------------------------
// Source propagation
// ---------------------------------------------------------------------------

/// Propagate a sampled source waveform through the channel.
///
/// `source[j]` is the emission rate (unit mass per second) held over
/// `[t_j, t_j + dt)` on the wind path's grid. The output has one entry per
/// source sample: `c[k] = sum_j h(t_k - t_j, t_k) * source[j] * dt` over
/// `t_j` in `[t_k - t_mem, t_k)` (left-endpoint rectangle rule). Linear in
/// the source and nonnegative for nonnegative sources.
pub fn propagate(
    source: &[f64],
    geometry: &Geometry,
    medium: &Medium,
    path: &WindPath,
    t_mem: f64,
) -> Result<Vec<f64>, WindError> {
    let grid = path.grid();
    if source.len() > grid.len {
        return Err(WindError::OutOfGrid {
            query: (grid.t0, grid.t0 + grid.dt * source.len() as f64),
            valid: (grid.t0, grid.end()),
        });
    }
    if !(t_mem > 0.0) {
        return Err(WindError::NegativeDelay { tau: t_mem });
    }
    let mem = math::floor(t_mem / grid.dt) as usize;
    let mut out = Vec::with_capacity(source.len());
    for k in 0..source.len() {
        let t_k = grid.time(k);
        let j_lo = k.saturating_sub(mem);
        let mut acc = 0.0;
        for (j, &q) in source.iter().enumerate().take(k).skip(j_lo) {
            if q == 0.0 {
                continue;
            }
            acc += impulse_response(geometry, medium, path, t_k - grid.time(j), t_k)? * q;
        }
        out.push(acc * grid.dt);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wind::{sample_wind_path, CovarianceKernel, TimeGrid, WindModel};
    use alloc::vec;
    use core::f64::consts::PI;

    const D_PAPER: f64 = 6.7698e-6;

    fn paper_geometry() -> Geometry {
        let s = math::sqrt(0.5);
        Geometry::new([0.0, 0.0, 1.0], [s, s, 1.0]).unwrap()
    }

    fn constant_wind_path(speed: f64, dir: [f64; 2], duration: f64, dt: f64) -> WindPath {
        let model = WindModel::new(speed, CovarianceKernel::White { intensity: 0.0 }).unwrap();
        let grid = TimeGrid { t0: 0.0, dt, len: (duration / dt).round() as usize };
        sample_wind_path(&model, dir, grid, 0).unwrap()
    }

    #[test]
    fn heat_kernel_zero_for_nonpositive_time() {
        assert_eq!(heat_kernel([1.0, 0.0, 0.0], -1.0, 1.0), 0.0);
        assert_eq!(heat_kernel([1.0, 0.0, 0.0], 0.0, 1.0), 0.0);
    }

    #[test]
    fn heat_kernel_peak_value() {
        let v = heat_kernel([0.0, 0.0, 0.0], 1.0, 1.0);
        let expected = math::powf(4.0 * PI, -1.5);
        assert!((v - expected).abs() < 1e-15 * expected, "{v} vs {expected}");
    }

    #[test]
    fn heat_kernel_normalizes_by_quadrature() {
        // Tensor-product Simpson rule over a box of +-8 standard deviations.
        let (t, d) = (0.7, 1.3);
        let sd = math::sqrt(2.0 * d * t);
        let half = 8.0 * sd;
        let n = 160; // even
        let h = 2.0 * half / n as f64;
        let w1 = |i: usize| -> f64 {
            if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            }
        };
        let mut total = 0.0;
        for i in 0..=n {
            let x = -half + h * i as f64;
            let mut plane = 0.0;
            for j in 0..=n {
                let y = -half + h * j as f64;
                let mut line = 0.0;
                for k in 0..=n {
                    let z = -half + h * k as f64;
                    line += w1(k) * heat_kernel([x, y, z], t, d);
                }
                plane += w1(j) * line;
            }
            total += w1(i) * plane;
        }
        total *= (h / 3.0) * (h / 3.0) * (h / 3.0);
        assert!((total - 1.0).abs() < 1e-6, "integral {total}");
    }

    #[test]
    fn image_kernel_vanishes_on_absorbing_plane() {
        for x in [-3.0f64, 0.0, 2.0] {
            let v = image_kernel([x, 0.3], 0.0, [0.0, 0.0], 1.0, 1.0, 1.0);
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn image_kernel_matches_free_kernel_far_from_boundary() {
        // With the source 1000 m up, the image term underflows.
        let z3 = 1000.0;
        let y3 = z3 + 0.5;
        let v = image_kernel([0.2, 0.1], y3, [0.0, 0.0], z3, 1.0, 1.0);
        let free = heat_kernel([0.2, 0.1, 0.5], 1.0, 1.0);
        assert!((v - free).abs() <= 1e-12 * free, "{v} vs {free}");
    }

    #[test]
    fn image_kernel_coincident_height() {
        let z3 = 1.0;
        let v = image_kernel([0.0, 0.0], z3, [0.0, 0.0], z3, 1.0, 1.0);
        let expected = math::powf(4.0 * PI, -1.5) * (1.0 - math::exp(-z3 * z3));
        assert!((v - expected).abs() < 1e-15, "{v} vs {expected}");
    }

    #[test]
    fn constant_wind_gives_time_invariant_response() {
        let geo = paper_geometry();
        let med = Medium::new(D_PAPER).unwrap();
        let path = constant_wind_path(0.5, geo.wind_direction(), 600.0, 0.01);
        for tau in [0.5, 2.0, 10.0] {
            let base = impulse_response(&geo, &med, &path, tau, 12.0).unwrap();
            for t in [50.0, 500.0] {
                let v = impulse_response(&geo, &med, &path, tau, t).unwrap();
                assert!(
                    (v - base).abs() <= 1e-12 * base.abs().max(1e-300),
                    "tau {tau}: {v} vs {base}"
                );
            }
        }
    }

    #[test]
    fn zero_wind_peak_delay_matches_free_diffusion() {
        // Without boundary effects the peak of the free 3-D kernel in tau
        // sits at d^2 / (6 D). Use a geometry far from the plane.
        let d_off = 0.05;
        let geo = Geometry::new([0.0, 0.0, 50.0], [d_off, 0.0, 50.0]).unwrap();
        let med = Medium::new(1e-4).unwrap();
        let expected = d_off * d_off / (6.0 * med.diffusion);
        let path = constant_wind_path(0.0, [0.0, 0.0], 3.0 * expected, expected / 2000.0);
        let mut best = (0.0, 0.0);
        let mut tau = expected / 10.0;
        while tau < 2.5 * expected {
            let v = impulse_response(&geo, &med, &path, tau, 2.5 * expected).unwrap();
            if v > best.1 {
                best = (tau, v);
            }
            tau += expected / 2000.0;
        }
        assert!(
            (best.0 - expected).abs() <= 0.01 * expected,
            "peak at {} vs {expected}",
            best.0
        );
    }

    #[test]
    fn tiny_delay_flushes_to_zero() {
        let geo = paper_geometry();
        let med = Medium::new(D_PAPER).unwrap();
        let path = constant_wind_path(0.0, [0.0, 0.0], 1.0, 1e-3);
        let v = impulse_response(&geo, &med, &path, 1e-6, 0.5).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn delay_outside_grid_rejected() {
        let geo = paper_geometry();
        let med = Medium::new(D_PAPER).unwrap();
        let path = constant_wind_path(0.5, geo.wind_direction(), 10.0, 0.01);
        assert!(matches!(
            impulse_response(&geo, &med, &path, 5.0, 3.0),
            Err(WindError::OutOfGrid { .. })
        ));
    }

    #[test]
    fn geometry_validation() {
        assert!(matches!(
            Geometry::new([0.0, 0.0, 0.0], [1.0, 0.0, 1.0]),
            Err(GeometryError::BelowAbsorbingPlane { .. })
        ));
        assert!(matches!(
            Geometry::new([0.0, 0.0, 1.0], [0.0, 0.0, 1.0]),
            Err(GeometryError::CoincidentEndpoints)
        ));
        assert!(Medium::new(0.0).is_err());
    }

    // -- propagate -------------------------------------------------------

    #[test]
    fn propagate_zero_source_is_zero() {
        let geo = paper_geometry();
        let med = Medium::new(D_PAPER).unwrap();
        let path = constant_wind_path(0.5, geo.wind_direction(), 20.0, 0.01);
        let out = propagate(&vec![0.0; 1000], &geo, &med, &path, 5.0).unwrap();
        assert!(out.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn propagate_unit_impulse_recovers_impulse_response() {
        let geo = paper_geometry();
        let med = Medium::new(D_PAPER).unwrap();
        let dt = 0.01;
        let path = constant_wind_path(0.5, geo.wind_direction(), 20.0, dt);
        let mut q = vec![0.0; 1500];
        q[0] = 1.0 / dt; // unit mass in one sample
        let out = propagate(&q, &geo, &med, &path, 30.0).unwrap();
        for k in [150, 190, 200, 210, 400] {
            let t = dt * k as f64;
            let h = impulse_response(&geo, &med, &path, t, t).unwrap();
            assert!(
                (out[k] - h).abs() <= 1e-12 * h.abs().max(1e-300),
                "k={k}: {} vs {h}",
                out[k]
            );
        }
    }

    #[test]
    fn propagate_superposition_exact() {
        let geo = paper_geometry();
        let med = Medium::new(D_PAPER).unwrap();
        let dt = 0.02;
        let model = WindModel::new(0.5, CovarianceKernel::White { intensity: 1e-4 }).unwrap();
        let grid = TimeGrid { t0: 0.0, dt, len: 800 };
        let path = sample_wind_path(&model, geo.wind_direction(), grid, 3).unwrap();
        let q1: Vec<f64> = (0..800).map(|i| if i < 100 { 1.0 } else { 0.0 }).collect();
        let q2: Vec<f64> = (0..800).map(|i| if (200..300).contains(&i) { 0.7 } else { 0.0 }).collect();
        let sum: Vec<f64> = q1.iter().zip(&q2).map(|(a, b)| a + b).collect();
        let c1 = propagate(&q1, &geo, &med, &path, 10.0).unwrap();
        let c2 = propagate(&q2, &geo, &med, &path, 10.0).unwrap();
        let cs = propagate(&sum, &geo, &med, &path, 10.0).unwrap();
        for k in 0..800 {
            let lin = c1[k] + c2[k];
            assert!(
                (cs[k] - lin).abs() <= 1e-12 * lin.abs().max(1e-300),
                "k={k}"
            );
        }
    }

    #[test]
    fn boundary_suppresses_concentration() {
        // Response just above the absorbing plane is far below the response
        // at 1 m for the same horizontal geometry.
        let med = Medium::new(D_PAPER).unwrap();
        let s = math::sqrt(0.5);
        let geo_high = paper_geometry();
        let geo_low = Geometry::new([0.0, 0.0, 1.0], [s, s, 1e-9]).unwrap();
        let dt = 0.01;
        let path = constant_wind_path(0.5, geo_high.wind_direction(), 40.0, dt);
        let mut q = vec![0.0; 1200];
        for slot in q.iter_mut().take(100) {
            *slot = 1.0;
        }
        let c_high = propagate(&q, &geo_high, &med, &path, 30.0).unwrap();
        let c_low = propagate(&q, &geo_low, &med, &path, 30.0).unwrap();
        let peak_high = c_high.iter().cloned().fold(0.0f64, f64::max);
        let peak_low = c_low.iter().cloned().fold(0.0f64, f64::max);
        assert!(peak_high > 0.0);
        assert!(
            peak_low < 1e-6 * peak_high,
            "boundary not suppressing: {peak_low} vs {peak_high}"
        );
    }
}
