//! Total pulse leakage: how much the channel bleeds each transmit pulse
//! into the other matched-filter branches.
//!
//! For each pulse `p_i` transmitted alone, the channel output is matched
//! filtered against every pulse; the receiver would sample branch `j` at
//! the decision instant an ideal synchronizer picks, namely the peak of
//! the own-branch output. The leakage is the summed energy of the
//! cross-branch samples at those instants,
//!
//! ```text
//! leakage = sum_i sum_{j != i} (c_i x p_j^MF)(t_i*)^2,
//! t_i* = argmax_t (c_i x p_i^MF)(t),
//! ```
//!
//! a structural separability measure independent of noise and symbol
//! sequencing. It is zero for a single dimension and scales with the
//! square of the source amplitude.

use diffadv_core::pulse::{upconvert, PulseSet};
use diffadv_core::rx::matched_filter_bank;
use diffadv_core::stats::mean_response;
use diffadv_core::Scenario;

use crate::engine::{propagate_decimated, SimParams};
use crate::SimError;

/// Which channel stands in for the propagation medium.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeakageMode {
    /// Expected impulse response as the effective channel; deterministic.
    MeanResponse,
    /// One seeded wind realization shared by all pulses.
    SeededRealization,
}

impl LeakageMode {
    pub fn label(&self) -> &'static str {
        match self {
            Self::MeanResponse => "mean",
            Self::SeededRealization => "realization",
        }
    }
}

/// One leakage evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageReport {
    pub n_dim: usize,
    pub t_sym: f64,
    pub leakage: f64,
    pub mode: LeakageMode,
    /// Wind seed for [`LeakageMode::SeededRealization`].
    pub seed: Option<u64>,
}

/// Compute the total pulse leakage for one `(N, T_sym)` cell.
///
/// `amplitude` scales the transmitted pulses (leakage scales with its
/// square). The observation window is `T_sym + t_mem` per pulse.
pub fn pulse_leakage(
    n_dim: usize,
    t_sym: f64,
    scenario: &Scenario,
    sim: &SimParams,
    mode: LeakageMode,
    seed: u64,
    amplitude: f64,
) -> Result<LeakageReport, SimError> {
    sim.validate()?;
    let pulses = PulseSet::build(n_dim, t_sym, sim.symbol_rate_hz)?;
    let window_rx = ((t_sym + sim.t_mem) * sim.symbol_rate_hz as f64).round() as usize;
    let stride = sim.stride();

    // Precompute whatever channel the mode calls for.
    let mean_channel = match mode {
        LeakageMode::MeanResponse => Some(mean_channel_taps(scenario, sim)?),
        LeakageMode::SeededRealization => None,
    };
    let path = match mode {
        LeakageMode::SeededRealization => {
            let grid = sim.channel_grid(window_rx * stride);
            Some(scenario.sample_wind(grid, seed)?)
        }
        LeakageMode::MeanResponse => None,
    };

    let mut leakage = 0.0;
    for i in 0..n_dim {
        let mut tx = vec![0.0; window_rx];
        for (k, &v) in pulses.waveform(i).iter().enumerate() {
            tx[k] = amplitude * v;
        }
        let received = match mode {
            LeakageMode::MeanResponse => {
                let up = upconvert(&tx, sim.symbol_rate_hz, sim.channel_rate_hz)?;
                convolve_decimated(&up, mean_channel.as_ref().unwrap(), sim)
            }
            LeakageMode::SeededRealization => {
                let up = upconvert(&tx, sim.symbol_rate_hz, sim.channel_rate_hz)?;
                propagate_decimated(&up, scenario, path.as_ref().unwrap(), stride, sim.t_mem)?
            }
        };
        let mf = matched_filter_bank(&received, &pulses);
        // Ideal decision instant: own-branch peak, earliest on ties.
        let mut best = (0usize, f64::NEG_INFINITY);
        for (n, &v) in mf[i].iter().enumerate() {
            if v > best.1 {
                best = (n, v);
            }
        }
        for (j, branch) in mf.iter().enumerate() {
            if j != i {
                let v = branch[best.0];
                leakage += v * v;
            }
        }
    }
    Ok(LeakageReport {
        n_dim,
        t_sym,
        leakage,
        mode,
        seed: matches!(mode, LeakageMode::SeededRealization).then_some(seed),
    })
}

/// Full Cartesian sweep over dimensions and symbol periods.
pub fn leakage_sweep(
    n_dims: &[usize],
    t_syms: &[f64],
    scenario: &Scenario,
    sim: &SimParams,
    mode: LeakageMode,
    seed: u64,
) -> Result<Vec<LeakageReport>, SimError> {
    if n_dims.is_empty() || t_syms.is_empty() {
        return Err(SimError::Invalid("leakage sweep needs nonempty dimension and period lists".into()));
    }
    let mut reports = Vec::with_capacity(n_dims.len() * t_syms.len());
    for &n in n_dims {
        for &t in t_syms {
            reports.push(pulse_leakage(n, t, scenario, sim, mode, seed, 1.0)?);
        }
    }
    Ok(reports)
}

/// Expected impulse response tabulated at the channel rate over the
/// memory window; the release-at-zero window `[0, tau]` fixes the
/// observation time for nonstationary kernels.
fn mean_channel_taps(scenario: &Scenario, sim: &SimParams) -> Result<Vec<f64>, SimError> {
    let dt = 1.0 / sim.channel_rate_hz as f64;
    let n = (sim.t_mem * sim.channel_rate_hz as f64).floor() as usize;
    let mut taps = vec![0.0f64; n + 1];
    for (lag, slot) in taps.iter_mut().enumerate().skip(1) {
        let tau = dt * lag as f64;
        *slot = mean_response(tau, tau, scenario)?;
    }
    Ok(taps)
}

/// Rectangle-rule convolution with the tabulated mean channel, evaluated
/// at the receiver sampling instants. Only the nonzero tap span is walked.
fn convolve_decimated(source: &[f64], taps: &[f64], sim: &SimParams) -> Vec<f64> {
    let dt = 1.0 / sim.channel_rate_hz as f64;
    let stride = sim.stride();
    let first = taps.iter().position(|&g| g > 0.0).unwrap_or(taps.len());
    let last = taps.iter().rposition(|&g| g > 0.0).unwrap_or(0);
    let n_out = source.len().div_ceil(stride);
    (0..n_out)
        .map(|k| {
            let c = k * stride;
            let hi = last.min(c);
            let mut acc = 0.0;
            for lag in first..=hi {
                let q = source[c - lag];
                if q != 0.0 {
                    acc += taps[lag] * q;
                }
            }
            acc * dt
        })
        .collect()
}
