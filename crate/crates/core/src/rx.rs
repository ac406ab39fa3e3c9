//! Receiver primitives: noise injection, matched filtering, symbol timing
//! recovery, pilot-trained equalization and minimum-distance detection.
//!
//! The receiver samples the concentration at a fixed rate, correlates
//! against each transmit pulse in the digital domain, finds the symbol
//! timing in two steps (cumulative-energy onset, then pilot-shape
//! correlation), corrects the channel scale with an MMSE equalizer trained
//! on the pilots, and decides by minimum Euclidean distance in signal
//! space.

use alloc::vec::Vec;
use core::fmt;

use rand_distr::{Distribution, StandardNormal};

use crate::math;
use crate::pulse::{ModulationScheme, PulseSet};
use crate::seed;

/// Fraction of total matched-filter energy that marks the signal onset in
/// the first synchronization step.
pub const SYNC_ENERGY_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub enum RxError {
    /// All-zero matched filter outputs: nothing to synchronize on.
    NoSignal,
    /// The record is too short to hold the pilot decision instants.
    RecordTooShort { needed: usize, len: usize },
    TooFewPilots { got: usize, need: usize },
    /// Equalizer normal equations could not be solved.
    SingularSystem,
}

impl fmt::Display for RxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoSignal => write!(f, "matched filter outputs carry no energy"),
            Self::RecordTooShort { needed, len } => {
                write!(f, "record of {len} samples cannot hold decision instants up to {needed}")
            }
            Self::TooFewPilots { got, need } => {
                write!(f, "equalizer training needs >= {need} pilots, got {got}")
            }
            Self::SingularSystem => write!(f, "equalizer normal equations are singular"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for RxError {}

// ---------------------------------------------------------------------------
// Noise
// ---------------------------------------------------------------------------

/// Noise level specification.
///
/// Both dB conventions reference the transmitter's average constellation
/// energy: `sigma_n^2 = E_s_avg / (n_sps * 10^(SNR_dB / 10))` with `n_sps`
/// the receiver samples per symbol, and `SNR_dB = EbN0_dB +
/// 10 log10(bits_per_symbol)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    Noiseless,
    SnrDb(f64),
    EbN0Db(f64),
}

/// Transmitter-side reference quantities the noise conventions use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseReference {
    pub avg_symbol_energy: f64,
    pub bits_per_symbol: u32,
    pub samples_per_symbol: usize,
}

impl NoiseReference {
    pub fn for_scheme(scheme: ModulationScheme, samples_per_symbol: usize) -> Self {
        Self {
            avg_symbol_energy: scheme.average_energy(),
            bits_per_symbol: scheme.bits_per_symbol(),
            samples_per_symbol,
        }
    }
}

/// Per-sample noise standard deviation for the declared convention.
pub fn noise_sigma(spec: NoiseSpec, reference: &NoiseReference) -> f64 {
    let snr_db = match spec {
        NoiseSpec::Noiseless => return 0.0,
        NoiseSpec::SnrDb(db) => db,
        NoiseSpec::EbN0Db(db) => db + 10.0 * math::log10(reference.bits_per_symbol as f64),
    };
    if snr_db.is_infinite() && snr_db > 0.0 {
        return 0.0;
    }
    let snr = math::powf(10.0, snr_db / 10.0);
    math::sqrt(reference.avg_symbol_energy / (reference.samples_per_symbol as f64 * snr))
}

/// Add seeded iid zero-mean Gaussian noise. A zero sigma (noiseless or
/// infinite SNR) returns the input unchanged.
pub fn add_awgn(
    samples: &[f64],
    spec: NoiseSpec,
    reference: &NoiseReference,
    seed_value: u64,
) -> Vec<f64> {
    let sigma = noise_sigma(spec, reference);
    if sigma == 0.0 {
        return samples.to_vec();
    }
    let mut rng = seed::rng_for(seed_value, &[seed::STREAM_NOISE]);
    samples
        .iter()
        .map(|&s| {
            let z: f64 = StandardNormal.sample(&mut rng);
            s + sigma * z
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Matched filtering
// ---------------------------------------------------------------------------

/// Correlate the record with each pulse: `y_j[n] = sum_k x[n+k] p_j[k] dt`,
/// with the record zero-extended past its end. Output length matches the
/// input length per branch.
///
/// Segment-indicator pulses make each branch a scaled sliding-window sum,
/// computed through a prefix sum of the record.
pub fn matched_filter_bank(samples: &[f64], pulses: &PulseSet) -> Vec<Vec<f64>> {
    let n = samples.len();
    let mut prefix = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    prefix.push(0.0);
    for &s in samples {
        acc += s;
        prefix.push(acc);
    }
    let seg = pulses.samples_per_segment();
    let scale = pulses.amplitude() * pulses.dt();
    (0..pulses.n_dim())
        .map(|j| {
            let start = j * seg;
            let stop = (j + 1) * seg;
            (0..n)
                .map(|i| {
                    let lo = (i + start).min(n);
                    let hi = (i + stop).min(n);
                    scale * (prefix[hi] - prefix[lo])
                })
                .collect()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Timing synchronization
// ---------------------------------------------------------------------------

/// Two-step symbol timing recovery on the matched-filter outputs.
///
/// Step 1 scans the cumulative matched-filter energy over the first
/// `onset_scan` samples (the channel-memory window, within which the first
/// pilot response must arrive) and takes the first index crossing
/// [`SYNC_ENERGY_FRACTION`] of that window's total. Step 2 tests every
/// candidate decision start within one symbol period of that index and
/// keeps the one maximizing the inner product between the observed outputs
/// at the pilot decision instants and the expected pilot amplitudes, ties
/// breaking to the earliest index.
pub fn synchronize(
    outputs: &[Vec<f64>],
    expected_pilots: &[(f64, f64)],
    samples_per_symbol: usize,
    onset_scan: usize,
) -> Result<usize, RxError> {
    assert_eq!(outputs.len(), 2, "synchronization expects a two-branch bank");
    let len = outputs[0].len();
    let n_pilots = expected_pilots.len();
    let scan = onset_scan.clamp(1, len);
    let total: f64 = outputs.iter().flat_map(|b| b.iter().take(scan)).map(|y| y * y).sum();
    if !(total > 0.0) {
        return Err(RxError::NoSignal);
    }
    let threshold = SYNC_ENERGY_FRACTION * total;
    let mut cum = 0.0;
    let mut onset = scan - 1;
    'scan: for i in 0..scan {
        for branch in outputs {
            cum += branch[i] * branch[i];
        }
        if cum >= threshold {
            onset = i;
            break 'scan;
        }
    }
    let last_instant = (n_pilots.max(1) - 1) * samples_per_symbol;
    if last_instant >= len {
        return Err(RxError::RecordTooShort { needed: last_instant, len });
    }
    let max_start = len - 1 - last_instant;
    let lo = onset.saturating_sub(samples_per_symbol);
    let hi = (onset + samples_per_symbol).min(max_start);
    if lo > hi {
        return Err(RxError::RecordTooShort { needed: lo + last_instant, len });
    }
    let mut best = (lo, f64::NEG_INFINITY);
    for start in lo..=hi {
        let mut score = 0.0;
        for (m, &(a1, a2)) in expected_pilots.iter().enumerate() {
            let at = start + m * samples_per_symbol;
            score += a1 * outputs[0][at] + a2 * outputs[1][at];
        }
        if score > best.1 {
            best = (start, score);
        }
    }
    Ok(best.0)
}

// ---------------------------------------------------------------------------
// MMSE equalization
// ---------------------------------------------------------------------------

/// Affine signal-space equalizer `s_hat = W y + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equalizer {
    pub weights: [[f64; 2]; 2],
    pub bias: [f64; 2],
}

impl Equalizer {
    pub fn apply(&self, y: (f64, f64)) -> (f64, f64) {
        (
            self.weights[0][0] * y.0 + self.weights[0][1] * y.1 + self.bias[0],
            self.weights[1][0] * y.0 + self.weights[1][1] * y.1 + self.bias[1],
        )
    }

    pub fn identity() -> Self {
        Self { weights: [[1.0, 0.0], [0.0, 1.0]], bias: [0.0, 0.0] }
    }
}

/// Equalizer structure trained from pilots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EqualizerForm {
    /// Full 2x2 matrix with bias (least squares with a small ridge).
    Affine,
    /// Independent per-dimension gains, no bias.
    Diagonal,
}

/// Ridge factor relative to the mean observation power.
const RIDGE_SCALE: f64 = 1e-8;

/// Least-squares affine fit `min sum |W y_k + b - s_k|^2` over the pilots,
/// with a ridge of `1e-8` times the mean observation power on the linear
/// part to keep collinear pilot sets solvable.
pub fn train_mmse(
    observations: &[(f64, f64)],
    targets: &[(f64, f64)],
) -> Result<Equalizer, RxError> {
    if observations.len() < 3 {
        return Err(RxError::TooFewPilots { got: observations.len(), need: 3 });
    }
    assert_eq!(observations.len(), targets.len());
    // Normal equations over z = [y1, y2, 1].
    let mut g = [[0.0f64; 3]; 3];
    let mut rhs = [[0.0f64; 2]; 3];
    for (&(y1, y2), &(s1, s2)) in observations.iter().zip(targets) {
        let z = [y1, y2, 1.0];
        for r in 0..3 {
            for c in 0..3 {
                g[r][c] += z[r] * z[c];
            }
            rhs[r][0] += z[r] * s1;
            rhs[r][1] += z[r] * s2;
        }
    }
    let ridge = RIDGE_SCALE * 0.5 * (g[0][0] + g[1][1]);
    g[0][0] += ridge;
    g[1][1] += ridge;
    let m = solve3(g, rhs).ok_or(RxError::SingularSystem)?;
    Ok(Equalizer {
        weights: [[m[0][0], m[1][0]], [m[0][1], m[1][1]]],
        bias: [m[2][0], m[2][1]],
    })
}

/// Per-dimension gain fit `w_j = sum y s / (sum y^2 + ridge)`, no bias.
pub fn train_diagonal(
    observations: &[(f64, f64)],
    targets: &[(f64, f64)],
) -> Result<Equalizer, RxError> {
    if observations.is_empty() {
        return Err(RxError::TooFewPilots { got: 0, need: 1 });
    }
    assert_eq!(observations.len(), targets.len());
    let mut num = [0.0f64; 2];
    let mut den = [0.0f64; 2];
    for (&(y1, y2), &(s1, s2)) in observations.iter().zip(targets) {
        num[0] += y1 * s1;
        num[1] += y2 * s2;
        den[0] += y1 * y1;
        den[1] += y2 * y2;
    }
    let d0 = den[0] * (1.0 + RIDGE_SCALE);
    let d1 = den[1] * (1.0 + RIDGE_SCALE);
    if d0 == 0.0 || d1 == 0.0 {
        return Err(RxError::SingularSystem);
    }
    Ok(Equalizer {
        weights: [[num[0] / d0, 0.0], [0.0, num[1] / d1]],
        bias: [0.0, 0.0],
    })
}

/// Solve the 3x3 system `G M = R` for two right-hand sides by Gaussian
/// elimination with partial pivoting.
fn solve3(mut g: [[f64; 3]; 3], mut r: [[f64; 2]; 3]) -> Option<[[f64; 2]; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| g[a][col].abs().total_cmp(&g[b][col].abs()))?;
        if g[pivot][col].abs() < 1e-300 {
            return None;
        }
        g.swap(col, pivot);
        r.swap(col, pivot);
        for row in (col + 1)..3 {
            let f = g[row][col] / g[col][col];
            for c in col..3 {
                g[row][c] -= f * g[col][c];
            }
            for c in 0..2 {
                r[row][c] -= f * r[col][c];
            }
        }
    }
    let mut m = [[0.0f64; 2]; 3];
    for row in (0..3).rev() {
        for c in 0..2 {
            let mut acc = r[row][c];
            for k in (row + 1)..3 {
                acc -= g[row][k] * m[k][c];
            }
            m[row][c] = acc / g[row][row];
        }
    }
    Some(m)
}

// ---------------------------------------------------------------------------
// Detection
// ---------------------------------------------------------------------------

/// Minimum-Euclidean-distance detection; ties break to the lowest registry
/// index.
pub fn detect(point: (f64, f64), scheme: ModulationScheme) -> usize {
    let mut best = (0usize, f64::INFINITY);
    for (i, &(a1, a2)) in scheme.points().iter().enumerate() {
        let d = (point.0 - a1) * (point.0 - a1) + (point.1 - a2) * (point.1 - a2);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}
