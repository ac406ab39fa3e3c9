//! End-to-end pulse-modulated link simulation and BER sweeps.
//!
//! Transmit chain: pilot preamble plus seeded-random payload, mapped onto
//! two orthonormal rectangle pulses, upconverted to the channel rate and
//! propagated through one wind realization. Receive chain: decimation to
//! the receiver rate, AWGN, matched-filter bank, two-step timing recovery
//! on the pilots, per-symbol sampling, pilot-trained MMSE equalization and
//! minimum-distance detection. Pilots and the trailing quiet tail are
//! excluded from error counting.

use diffadv_core::pulse::{modulate, ModulationScheme, PulseSet};
use diffadv_core::rx::{
    add_awgn, detect, matched_filter_bank, synchronize, train_diagonal, train_mmse, Equalizer,
    EqualizerForm, NoiseReference, NoiseSpec,
};
use diffadv_core::seed::{derive_seed, rng_for, STREAM_SYMBOLS};
use diffadv_core::Scenario;
use rand::Rng;

use crate::engine::{channel_pass, SimParams};
use crate::SimError;

/// Link-level parameters on top of the channel scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub scheme: ModulationScheme,
    pub t_sym: f64,
    pub n_symbols: usize,
    pub n_pilots: usize,
    pub n_trailing_empty: usize,
    pub noise: NoiseSpec,
    pub equalizer: EqualizerForm,
}

impl LinkParams {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_symbols == 0 {
            return Err(SimError::Invalid("need at least one payload symbol".into()));
        }
        if self.n_pilots < 3 {
            return Err(SimError::Invalid(format!(
                "equalizer training needs >= 3 pilots, got {}",
                self.n_pilots
            )));
        }
        if !(self.t_sym > 0.0) {
            return Err(SimError::Invalid(format!("symbol period must be > 0, got {}", self.t_sym)));
        }
        Ok(())
    }
}

/// One demodulated symbol with its signal-space observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolObservation {
    /// Payload position (pilots excluded).
    pub index: usize,
    pub tx_index: usize,
    pub tx_point: (f64, f64),
    /// Matched-filter outputs at the decision instant.
    pub raw: (f64, f64),
    /// After equalization.
    pub equalized: (f64, f64),
    pub decided: usize,
}

/// Everything a single link run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkResult {
    pub scheme: ModulationScheme,
    pub seed: u64,
    pub sync_index: usize,
    pub equalizer: Equalizer,
    pub observations: Vec<SymbolObservation>,
    pub symbol_errors: usize,
    pub bit_errors: usize,
    pub bits_total: usize,
}

impl LinkResult {
    pub fn symbol_error_rate(&self) -> f64 {
        self.symbol_errors as f64 / self.observations.len() as f64
    }

    pub fn bit_error_rate(&self) -> f64 {
        self.bit_errors as f64 / self.bits_total as f64
    }

    /// Fraction of payload symbols whose equalized observation falls in
    /// the decision region of the transmitted point.
    pub fn cluster_accuracy(&self) -> f64 {
        1.0 - self.symbol_error_rate()
    }
}

/// Run one seeded link simulation.
pub fn run_link(
    scenario: &Scenario,
    sim: &SimParams,
    link: &LinkParams,
    seed: u64,
) -> Result<LinkResult, SimError> {
    sim.validate()?;
    link.validate()?;
    let pulses = PulseSet::build(2, link.t_sym, sim.symbol_rate_hz)?;
    let sps = pulses.samples_per_symbol();
    let scheme = link.scheme;
    let points = scheme.points();

    // Pilot preamble plus seeded payload.
    let pilots = scheme.pilot_indices(link.n_pilots);
    let mut rng = rng_for(seed, &[STREAM_SYMBOLS]);
    let payload: Vec<usize> =
        (0..link.n_symbols).map(|_| rng.random_range(0..points.len())).collect();
    let mut indices = pilots.clone();
    indices.extend_from_slice(&payload);

    let mut wave = modulate(&indices, scheme, &pulses)?;
    wave.extend(std::iter::repeat_n(0.0, link.n_trailing_empty * sps));

    let pass = channel_pass(&wave, scenario, sim, seed)?;
    let reference = NoiseReference::for_scheme(scheme, sps);
    let noisy = add_awgn(&pass.samples, link.noise, &reference, seed);

    let mf = matched_filter_bank(&noisy, &pulses);
    let expected_pilots: Vec<(f64, f64)> = pilots.iter().map(|&i| points[i]).collect();
    let onset_scan = (sim.t_mem * sim.symbol_rate_hz as f64).round() as usize;
    let sync_index = synchronize(&mf, &expected_pilots, sps, onset_scan)?;

    let total_symbols = link.n_pilots + link.n_symbols;
    let last = sync_index + (total_symbols - 1) * sps;
    if last >= mf[0].len() {
        return Err(SimError::Invalid(format!(
            "record of {} samples too short for {total_symbols} decision instants",
            mf[0].len()
        )));
    }
    let raw: Vec<(f64, f64)> = (0..total_symbols)
        .map(|m| {
            let at = sync_index + m * sps;
            (mf[0][at], mf[1][at])
        })
        .collect();

    let equalizer = match link.equalizer {
        EqualizerForm::Affine => train_mmse(&raw[..link.n_pilots], &expected_pilots)?,
        EqualizerForm::Diagonal => train_diagonal(&raw[..link.n_pilots], &expected_pilots)?,
    };

    let mut observations = Vec::with_capacity(link.n_symbols);
    let mut symbol_errors = 0usize;
    let mut bit_errors = 0usize;
    for (m, &tx_index) in payload.iter().enumerate() {
        let y = raw[link.n_pilots + m];
        let equalized = equalizer.apply(y);
        let decided = detect(equalized, scheme);
        if decided != tx_index {
            symbol_errors += 1;
            bit_errors += (scheme.bits(decided) ^ scheme.bits(tx_index)).count_ones() as usize;
        }
        observations.push(SymbolObservation {
            index: m,
            tx_index,
            tx_point: points[tx_index],
            raw: y,
            equalized,
            decided,
        });
    }
    Ok(LinkResult {
        scheme,
        seed,
        sync_index,
        equalizer,
        observations,
        symbol_errors,
        bit_errors,
        bits_total: link.n_symbols * scheme.bits_per_symbol() as usize,
    })
}

// ---------------------------------------------------------------------------
// BER sweeps
// ---------------------------------------------------------------------------

/// Which dB axis a sweep runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseAxis {
    SnrDb,
    EbN0Db,
}

impl NoiseAxis {
    pub fn spec(&self, db: f64) -> NoiseSpec {
        match self {
            Self::SnrDb => NoiseSpec::SnrDb(db),
            Self::EbN0Db => NoiseSpec::EbN0Db(db),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::SnrDb => "snr_db",
            Self::EbN0Db => "ebn0_db",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub symbol_errors: usize,
    pub bit_errors: usize,
    pub bits_total: usize,
    pub ber: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub db: f64,
    pub trials: Vec<TrialOutcome>,
    pub mean_ber: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub axis: NoiseAxis,
    pub points: Vec<BerPoint>,
}

/// Sweep BER over noise levels, averaging independent trials per point.
///
/// Trial seeds derive from the master seed and the (point, trial) indices,
/// so every trial is independent and the whole sweep is reproducible.
pub fn ber_sweep(
    scenario: &Scenario,
    sim: &SimParams,
    link: &LinkParams,
    axis: NoiseAxis,
    abscissas_db: &[f64],
    trials: usize,
    master_seed: u64,
) -> Result<BerCurve, SimError> {
    if trials == 0 {
        return Err(SimError::Invalid("need at least one trial".into()));
    }
    let mut points = Vec::with_capacity(abscissas_db.len());
    for (pi, &db) in abscissas_db.iter().enumerate() {
        let mut outcomes = Vec::with_capacity(trials);
        for trial in 0..trials {
            let seed = derive_seed(master_seed, &[pi as u64, trial as u64]);
            let run = run_link(
                scenario,
                sim,
                &LinkParams { noise: axis.spec(db), ..*link },
                seed,
            )?;
            outcomes.push(TrialOutcome {
                trial,
                seed,
                symbol_errors: run.symbol_errors,
                bit_errors: run.bit_errors,
                bits_total: run.bits_total,
                ber: run.bit_error_rate(),
            });
        }
        let n = outcomes.len() as f64;
        let mean = outcomes.iter().map(|o| o.ber).sum::<f64>() / n;
        let stderr = if outcomes.len() > 1 {
            let var = outcomes.iter().map(|o| (o.ber - mean) * (o.ber - mean)).sum::<f64>()
                / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        points.push(BerPoint { db, trials: outcomes, mean_ber: mean, stderr });
    }
    Ok(BerCurve { axis, points })
}
