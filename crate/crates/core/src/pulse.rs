//! Orthonormal rectangular pulse sets and nonnegative constellations.
//!
//! Concentrations cannot go negative, so orthogonal pulses are built by
//! splitting the symbol period into `N` disjoint segments, one per signal
//! dimension, each scaled to unit discrete energy (`sum p^2 dt = 1`, i.e.
//! amplitude `sqrt(N / T_sym)`). Symbols are nonnegative amplitude pairs on
//! the first two pulses.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub enum PulseError {
    /// `T_sym * rate` must be a whole number of samples.
    NonIntegerSymbolLength { t_sym: f64, rate_hz: u32 },
    /// The symbol must split into `N` equal segments.
    NonIntegerSegmentLength { samples_per_symbol: usize, n_dim: usize },
    InvalidDimension { n_dim: usize },
    /// Up/down conversion needs an integer rate ratio.
    NonIntegerRateRatio { from_hz: u32, to_hz: u32 },
    SymbolIndexOutOfRange { index: usize, cardinality: usize },
    /// Amplitude-pair constellations need a two-dimensional pulse set.
    DimensionMismatch { n_dim: usize },
}

impl fmt::Display for PulseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonIntegerSymbolLength { t_sym, rate_hz } => {
                write!(f, "T_sym = {t_sym} s at {rate_hz} Hz is not a whole number of samples")
            }
            Self::NonIntegerSegmentLength { samples_per_symbol, n_dim } => write!(
                f,
                "{samples_per_symbol} samples per symbol do not split into {n_dim} equal segments"
            ),
            Self::InvalidDimension { n_dim } => write!(f, "need n_dim >= 1, got {n_dim}"),
            Self::NonIntegerRateRatio { from_hz, to_hz } => {
                write!(f, "rate ratio {to_hz}/{from_hz} is not an integer")
            }
            Self::SymbolIndexOutOfRange { index, cardinality } => {
                write!(f, "symbol index {index} out of range for {cardinality}-point constellation")
            }
            Self::DimensionMismatch { n_dim } => {
                write!(f, "amplitude-pair modulation needs a 2-dimensional pulse set, got {n_dim}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PulseError {}

// ---------------------------------------------------------------------------
// Pulse sets
// ---------------------------------------------------------------------------

/// `N` orthonormal segment-indicator pulses over one symbol period.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSet {
    n_dim: usize,
    t_sym: f64,
    rate_hz: u32,
    amplitude: f64,
    waveforms: Vec<Vec<f64>>,
}

impl PulseSet {
    /// Build the pulse set; `T_sym * rate` must be divisible into `N`
    /// equal segments of whole samples.
    pub fn build(n_dim: usize, t_sym: f64, rate_hz: u32) -> Result<Self, PulseError> {
        if n_dim == 0 {
            return Err(PulseError::InvalidDimension { n_dim });
        }
        let exact = t_sym * rate_hz as f64;
        let sps = math::round(exact);
        if sps < 1.0 || (exact - sps).abs() > 1e-9 {
            return Err(PulseError::NonIntegerSymbolLength { t_sym, rate_hz });
        }
        let sps = sps as usize;
        if sps % n_dim != 0 {
            return Err(PulseError::NonIntegerSegmentLength { samples_per_symbol: sps, n_dim });
        }
        let seg = sps / n_dim;
        let amplitude = math::sqrt(n_dim as f64 / t_sym);
        let waveforms = (0..n_dim)
            .map(|k| {
                let mut p = vec![0.0; sps];
                p[k * seg..(k + 1) * seg].fill(amplitude);
                p
            })
            .collect();
        Ok(Self { n_dim, t_sym, rate_hz, amplitude, waveforms })
    }

    pub fn n_dim(&self) -> usize {
        self.n_dim
    }

    pub fn t_sym(&self) -> f64 {
        self.t_sym
    }

    pub fn rate_hz(&self) -> u32 {
        self.rate_hz
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.rate_hz as f64
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.waveforms[0].len()
    }

    pub fn samples_per_segment(&self) -> usize {
        self.samples_per_symbol() / self.n_dim
    }

    pub fn waveform(&self, k: usize) -> &[f64] {
        &self.waveforms[k]
    }

    /// Discrete inner product `sum p_i p_j dt`.
    pub fn inner_product(&self, i: usize, j: usize) -> f64 {
        self.waveforms[i]
            .iter()
            .zip(&self.waveforms[j])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.dt()
    }
}

// ---------------------------------------------------------------------------
// Constellations
// ---------------------------------------------------------------------------

/// The six nonnegative amplitude-pair modulation schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModulationScheme {
    Two,
    Four,
    EightSymmetric,
    EightWide,
    EightTall,
    Sixteen,
}

impl ModulationScheme {
    pub const ALL: [Self; 6] = [
        Self::Two,
        Self::Four,
        Self::EightSymmetric,
        Self::EightWide,
        Self::EightTall,
        Self::Sixteen,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Two => "two",
            Self::Four => "four",
            Self::EightSymmetric => "eight-symmetric",
            Self::EightWide => "eight-wide",
            Self::EightTall => "eight-tall",
            Self::Sixteen => "sixteen",
        }
    }

    /// Constellation points, in registry order (ties in detection break to
    /// the lowest index here).
    pub fn points(&self) -> &'static [(f64, f64)] {
        match self {
            Self::Two => &[(1.0, 0.0), (0.0, 1.0)],
            Self::Four => &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)],
            Self::EightSymmetric => &[
                (0.0, 0.0),
                (1.0, 0.0),
                (2.0, 0.0),
                (0.0, 1.0),
                (1.0, 1.0),
                (2.0, 1.0),
                (0.0, 2.0),
                (1.0, 2.0),
            ],
            Self::EightWide => &[
                (0.0, 0.0),
                (1.0, 0.0),
                (2.0, 0.0),
                (3.0, 0.0),
                (0.0, 1.0),
                (1.0, 1.0),
                (2.0, 1.0),
                (3.0, 1.0),
            ],
            Self::EightTall => &[
                (0.0, 0.0),
                (1.0, 0.0),
                (0.0, 1.0),
                (1.0, 1.0),
                (0.0, 2.0),
                (1.0, 2.0),
                (0.0, 3.0),
                (1.0, 3.0),
            ],
            Self::Sixteen => &[
                (0.0, 0.0),
                (1.0, 0.0),
                (2.0, 0.0),
                (3.0, 0.0),
                (0.0, 1.0),
                (1.0, 1.0),
                (2.0, 1.0),
                (3.0, 1.0),
                (0.0, 2.0),
                (1.0, 2.0),
                (2.0, 2.0),
                (3.0, 2.0),
                (0.0, 3.0),
                (1.0, 3.0),
                (2.0, 3.0),
                (3.0, 3.0),
            ],
        }
    }

    pub fn cardinality(&self) -> usize {
        self.points().len()
    }

    pub fn bits_per_symbol(&self) -> u32 {
        match self {
            Self::Two => 1,
            Self::Four => 2,
            Self::EightSymmetric | Self::EightWide | Self::EightTall => 3,
            Self::Sixteen => 4,
        }
    }

    /// Bit label for a symbol index.
    ///
    /// Grid schemes (Two, Four, Sixteen) use per-coordinate Gray labels so
    /// spatially adjacent points differ in one bit; the three 8-point
    /// schemes use the binary-reflected Gray code of the registry index.
    pub fn bits(&self, index: usize) -> u32 {
        let gray = |v: u32| v ^ (v >> 1);
        match self {
            Self::Two => index as u32,
            Self::Four => {
                let (a1, a2) = self.points()[index];
                (a1 as u32) | ((a2 as u32) << 1)
            }
            Self::Sixteen => {
                let (a1, a2) = self.points()[index];
                gray(a1 as u32) | (gray(a2 as u32) << 2)
            }
            _ => gray(index as u32),
        }
    }

    /// Pilot symbol cycle: the extreme (convex-hull) constellation points,
    /// energetic corners first and the origin last. Corners maximize
    /// equalizer excitation, and a nonzero first pilot gives the timing
    /// onset detector energy from the very first symbol.
    pub fn pilot_cycle(&self) -> &'static [usize] {
        match self {
            Self::Two => &[0, 1],
            Self::Four => &[1, 2, 3, 0],
            Self::EightSymmetric => &[2, 5, 6, 7, 0],
            Self::EightWide => &[3, 4, 7, 0],
            Self::EightTall => &[1, 6, 7, 0],
            Self::Sixteen => &[3, 12, 15, 0],
        }
    }

    /// Mean constellation energy `E[a1^2 + a2^2]` over a uniform symbol
    /// distribution.
    pub fn average_energy(&self) -> f64 {
        let pts = self.points();
        pts.iter().map(|&(a, b)| a * a + b * b).sum::<f64>() / pts.len() as f64
    }

    /// Pilot indices for a preamble of the given length.
    pub fn pilot_indices(&self, n_pilots: usize) -> Vec<usize> {
        let cycle = self.pilot_cycle();
        (0..n_pilots).map(|i| cycle[i % cycle.len()]).collect()
    }
}

// ---------------------------------------------------------------------------
// Modulation and rate conversion
// ---------------------------------------------------------------------------

/// Map symbol indices to the transmit waveform at the pulse rate.
pub fn modulate(
    indices: &[usize],
    scheme: ModulationScheme,
    pulses: &PulseSet,
) -> Result<Vec<f64>, PulseError> {
    if pulses.n_dim() != 2 {
        return Err(PulseError::DimensionMismatch { n_dim: pulses.n_dim() });
    }
    let points = scheme.points();
    let sps = pulses.samples_per_symbol();
    let seg = pulses.samples_per_segment();
    let amp = pulses.amplitude();
    let mut wave = vec![0.0; indices.len() * sps];
    for (m, &idx) in indices.iter().enumerate() {
        let &(a1, a2) = points
            .get(idx)
            .ok_or(PulseError::SymbolIndexOutOfRange { index: idx, cardinality: points.len() })?;
        let base = m * sps;
        wave[base..base + seg].fill(a1 * amp);
        wave[base + seg..base + 2 * seg].fill(a2 * amp);
    }
    Ok(wave)
}

/// Zero-order-hold upconversion (sample repetition).
pub fn upconvert(wave: &[f64], from_hz: u32, to_hz: u32) -> Result<Vec<f64>, PulseError> {
    if from_hz == 0 || to_hz % from_hz != 0 {
        return Err(PulseError::NonIntegerRateRatio { from_hz, to_hz });
    }
    let k = (to_hz / from_hz) as usize;
    let mut out = Vec::with_capacity(wave.len() * k);
    for &v in wave {
        out.extend(core::iter::repeat_n(v, k));
    }
    Ok(out)
}

/// Phase-0 decimation (every k-th sample, no anti-alias filter).
pub fn downconvert(wave: &[f64], from_hz: u32, to_hz: u32) -> Result<Vec<f64>, PulseError> {
    if to_hz == 0 || from_hz % to_hz != 0 {
        return Err(PulseError::NonIntegerRateRatio { from_hz, to_hz });
    }
    let k = (from_hz / to_hz) as usize;
    Ok(wave.iter().step_by(k).copied().collect())
}
