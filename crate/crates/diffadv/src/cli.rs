//! Command-line interface: subcommand dispatch and CSV emission.
//!
//! Every output embeds the tool version, the config hash and the seed in
//! `#` header lines, so byte-identical files imply an identical
//! (config, seed) pair and re-running a subcommand with the same inputs
//! reproduces its outputs exactly.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use diffadv_core::stats::{
    classify, dispersion_time, peclet, pdp, pdp_cross_check, pdp_spectrum, wss_autocorrelation_at,
    ChannelClass,
};
use diffadv_core::Scenario;

use crate::config::{canonical_toml, config_hash, parse_scenario, ScenarioConfig, Validated};
use crate::csvio::{write_atomic, CsvWriter, Field};
use crate::leakage::{leakage_sweep, LeakageMode};
use crate::link::{ber_sweep, run_link, NoiseAxis};
use crate::SimError;

/// Environment variable consulted when neither `--seed` nor the config
/// file provides one.
pub const SEED_ENV_VAR: &str = "DIFFADV_SEED";

#[derive(Debug, Parser)]
#[command(name = "diffadv", version, about = "Particle-link simulation through time-varying diffusion-advection channels")]
pub struct Cli {
    /// Scenario configuration file (TOML); built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed (overrides the config file and DIFFADV_SEED).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory for emitted CSV files.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Power delay profile (closed form) and its Fourier magnitude.
    Pdp {
        /// Delay grid step (s).
        #[arg(long, default_value_t = 0.01)]
        tau_step: f64,
        /// Delay grid end (s); defaults to min(3 L / mu, memory).
        #[arg(long)]
        tau_max: Option<f64>,
    },
    /// Channel autocorrelation surface R_h(tau, tau; t1, t2).
    Autocorr {
        /// Delay (s) both windows share.
        #[arg(long, default_value_t = 4.0)]
        tau: f64,
        /// Observation-time grid end (s).
        #[arg(long, default_value_t = 60.0)]
        t_max: f64,
        /// Observation-time grid points per axis.
        #[arg(long, default_value_t = 61)]
        t_points: usize,
    },
    /// Peclet number, dispersion time and dispersion classification.
    Stats,
    /// BER sweep over Eb/N0 (default) or SNR points.
    Ber {
        /// SNR abscissas in dB (comma separated).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        snr_db: Vec<f64>,
        /// Eb/N0 abscissas in dB (comma separated).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        ebn0_db: Vec<f64>,
        /// Independent trials per point.
        #[arg(long, default_value_t = 30)]
        trials: usize,
    },
    /// One link run with a constellation observation dump.
    Link,
    /// Total pulse leakage over a (N, T_sym) sweep.
    Leakage {
        /// Symbol periods (s, comma separated).
        #[arg(long, value_delimiter = ',')]
        tsym: Vec<f64>,
        /// Signaling dimensions (comma separated).
        #[arg(long, value_delimiter = ',')]
        ndim: Vec<usize>,
        /// Channel stand-in: `mean` or `realization`.
        #[arg(long, default_value = "mean")]
        mode: String,
    },
    /// Print the default scenario configuration as TOML.
    Defaults,
}

/// Load the config, resolve the seed (flag > config > env > 0) and run.
/// Returns the paths of the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, SimError> {
    let mut cfg: ScenarioConfig = match &cli.config {
        Some(path) => parse_scenario(&std::fs::read_to_string(path)?)?,
        None => ScenarioConfig::default(),
    };
    let seed = cli
        .seed
        .or(cfg.seed)
        .or_else(|| std::env::var(SEED_ENV_VAR).ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0);
    cfg.seed = Some(seed);
    let hash = config_hash(&cfg);
    let validated = cfg.validate()?;

    match &cli.command {
        Command::Defaults => {
            print!("{}", canonical_toml(&ScenarioConfig::default()));
            Ok(Vec::new())
        }
        Command::Pdp { tau_step, tau_max } => {
            cmd_pdp(&validated, seed, &hash, &cli.out, *tau_step, *tau_max)
        }
        Command::Autocorr { tau, t_max, t_points } => {
            cmd_autocorr(&validated, seed, &hash, &cli.out, *tau, *t_max, *t_points)
        }
        Command::Stats => cmd_stats(&validated, seed, &hash, &cli.out),
        Command::Ber { snr_db, ebn0_db, trials } => {
            cmd_ber(&validated, seed, &hash, &cli.out, snr_db, ebn0_db, *trials)
        }
        Command::Link => cmd_link(&validated, seed, &hash, &cli.out),
        Command::Leakage { tsym, ndim, mode } => {
            cmd_leakage(&validated, seed, &hash, &cli.out, tsym, ndim, mode)
        }
    }
}

fn preamble(w: &mut CsvWriter, subcommand: &str, hash: &str, seed: u64) {
    w.comment(&format!("diffadv v{}", env!("CARGO_PKG_VERSION")));
    w.comment(&format!("subcommand={subcommand} config_sha256={hash} seed={seed}"));
}

fn emit(out_dir: &Path, name: &str, w: CsvWriter) -> Result<PathBuf, SimError> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(name);
    write_atomic(&path, &w.into_string())?;
    Ok(path)
}

fn noise_convention_line(v: &Validated) -> String {
    format!(
        "noise convention: sigma_n^2 = E_s_avg / (n_sps * 10^(SNR_dB/10)); \
         SNR_dB = EbN0_dB + 10 log10(bits); E_s_avg={} bits={} n_sps={}",
        v.link.scheme.average_energy(),
        v.link.scheme.bits_per_symbol(),
        (v.link.t_sym * v.sim.symbol_rate_hz as f64).round() as usize
    )
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_pdp(
    v: &Validated,
    seed: u64,
    hash: &str,
    out: &Path,
    tau_step: f64,
    tau_max: Option<f64>,
) -> Result<Vec<PathBuf>, SimError> {
    if !(tau_step > 0.0) {
        return Err(SimError::Invalid(format!("tau step must be > 0, got {tau_step}")));
    }
    let sc = &v.scenario;
    let default_max = if sc.wind.mean_speed > 0.0 {
        (3.0 * sc.geometry.horizontal_distance() / sc.wind.mean_speed).min(v.sim.t_mem)
    } else {
        v.sim.t_mem
    };
    let tau_max = tau_max.unwrap_or(default_max);
    let n = (tau_max / tau_step).floor() as usize;
    let taus: Vec<f64> = (1..=n).map(|i| tau_step * i as f64).collect();
    let curve = pdp(&taus, sc)?;
    let check = pdp_cross_check(&taus, sc)?;

    let mut w = CsvWriter::new();
    preamble(&mut w, "pdp", hash, seed);
    w.comment(&format!("peclet={}", curve.peclet));
    if let Some(td) = curve.dispersion_time {
        w.comment(&format!("dispersion_time_s={td}"));
    }
    w.comment(&format!(
        "closed form vs quadratic-form route: max relative deviation {} over {} points",
        check.max_rel_deviation, check.compared
    ));
    w.header(&["tau_s", "pdp_value"]);
    for (&tau, &val) in curve.taus.iter().zip(&curve.values) {
        w.row(&[tau.into(), val.into()]);
    }
    let mut written = vec![emit(out, &format!("pdp_{hash}.csv"), w)?];

    let spectrum = pdp_spectrum(&curve)?;
    let mut w = CsvWriter::new();
    preamble(&mut w, "pdp", hash, seed);
    w.comment("one-sided DFT magnitude of the PDP samples");
    w.header(&["freq_hz", "magnitude"]);
    for (&f, &m) in spectrum.freqs.iter().zip(&spectrum.magnitudes) {
        w.row(&[f.into(), m.into()]);
    }
    written.push(emit(out, &format!("pdp_spectrum_{hash}.csv"), w)?);
    Ok(written)
}

fn cmd_autocorr(
    v: &Validated,
    seed: u64,
    hash: &str,
    out: &Path,
    tau: f64,
    t_max: f64,
    t_points: usize,
) -> Result<Vec<PathBuf>, SimError> {
    if t_points < 2 || !(t_max > 0.0) {
        return Err(SimError::Invalid("autocorr grid needs t_max > 0 and t_points >= 2".into()));
    }
    let sc = &v.scenario;
    let mut w = CsvWriter::new();
    preamble(&mut w, "autocorr", hash, seed);
    w.comment(&format!("tau_s={tau} kernel={}", sc.wind.kernel.kind_name()));
    w.header(&["t1_s", "t2_s", "r_h"]);
    let step = t_max / (t_points - 1) as f64;
    for i in 0..t_points {
        for j in 0..t_points {
            let (t1, t2) = (step * i as f64, step * j as f64);
            let r = diffadv_core::stats::autocorrelation(tau, tau, t1, t2, sc)?;
            w.row(&[t1.into(), t2.into(), r.into()]);
        }
    }
    Ok(vec![emit(out, &format!("autocorr_{hash}.csv"), w)?])
}

fn cmd_stats(v: &Validated, seed: u64, hash: &str, out: &Path) -> Result<Vec<PathBuf>, SimError> {
    let sc = &v.scenario;
    let pe = peclet(&sc.geometry, &sc.medium, &sc.wind);
    let td = dispersion_time(&sc.geometry, &sc.medium, &sc.wind);
    println!("peclet = {pe:.4}");
    let mut w = CsvWriter::new();
    preamble(&mut w, "stats", hash, seed);
    w.header(&["peclet", "dispersion_time_s", "t_sym_s", "dispersive"]);
    match td {
        Ok(td) => {
            let class = classify(v.link.t_sym, td);
            println!("dispersion_time = {td:.4} s");
            println!("T_sym = {} s -> {class} channel", v.link.t_sym);
            w.row(&[
                pe.into(),
                td.into(),
                v.link.t_sym.into(),
                Field::Int(u64::from(class == ChannelClass::Dispersive)),
            ]);
        }
        Err(e) => {
            println!("dispersion_time undefined: {e}");
            w.row(&[pe.into(), f64::NAN.into(), v.link.t_sym.into(), f64::NAN.into()]);
        }
    }
    Ok(vec![emit(out, &format!("stats_{hash}.csv"), w)?])
}

fn cmd_ber(
    v: &Validated,
    seed: u64,
    hash: &str,
    out: &Path,
    snr_db: &[f64],
    ebn0_db: &[f64],
    trials: usize,
) -> Result<Vec<PathBuf>, SimError> {
    if !snr_db.is_empty() && !ebn0_db.is_empty() {
        return Err(SimError::Invalid("--snr-db and --ebn0-db are mutually exclusive".into()));
    }
    let (axis, points): (NoiseAxis, &[f64]) = if !snr_db.is_empty() {
        (NoiseAxis::SnrDb, snr_db)
    } else {
        (NoiseAxis::EbN0Db, ebn0_db)
    };
    let curve = ber_sweep(&v.scenario, &v.sim, &v.link, axis, points, trials, seed)?;

    let mut w = CsvWriter::new();
    preamble(&mut w, "ber", hash, seed);
    w.comment(&format!("axis={} scheme={} trials={trials}", axis.label(), v.link.scheme.name()));
    w.comment(&noise_convention_line(v));
    w.header(&["abscissa_db", "trial", "bit_errors", "bits_total", "ber"]);
    for point in &curve.points {
        for t in &point.trials {
            w.row(&[
                point.db.into(),
                t.trial.into(),
                t.bit_errors.into(),
                t.bits_total.into(),
                t.ber.into(),
            ]);
        }
    }
    let mut written = vec![emit(out, &format!("ber_{hash}.csv"), w)?];

    let mut w = CsvWriter::new();
    preamble(&mut w, "ber", hash, seed);
    w.comment(&format!("axis={}", axis.label()));
    w.header(&["abscissa_db", "mean_ber", "stderr"]);
    for point in &curve.points {
        w.row(&[point.db.into(), point.mean_ber.into(), point.stderr.into()]);
    }
    written.push(emit(out, &format!("ber_summary_{hash}.csv"), w)?);
    Ok(written)
}

fn cmd_link(v: &Validated, seed: u64, hash: &str, out: &Path) -> Result<Vec<PathBuf>, SimError> {
    let result = run_link(&v.scenario, &v.sim, &v.link, seed)?;
    let mut w = CsvWriter::new();
    preamble(&mut w, "link", hash, seed);
    w.comment(&format!(
        "scheme={} sync_index={} symbol_errors={} bit_errors={} bits_total={}",
        result.scheme.name(),
        result.sync_index,
        result.symbol_errors,
        result.bit_errors,
        result.bits_total
    ));
    w.comment(&noise_convention_line(v));
    w.comment("rx points are equalized matched-filter observations");
    w.header(&[
        "symbol_index",
        "tx_point_1",
        "tx_point_2",
        "rx_point_1",
        "rx_point_2",
        "decided_index",
    ]);
    for obs in &result.observations {
        w.row(&[
            obs.index.into(),
            obs.tx_point.0.into(),
            obs.tx_point.1.into(),
            obs.equalized.0.into(),
            obs.equalized.1.into(),
            obs.decided.into(),
        ]);
    }
    Ok(vec![emit(out, &format!("link_{hash}.csv"), w)?])
}

fn cmd_leakage(
    v: &Validated,
    seed: u64,
    hash: &str,
    out: &Path,
    tsym: &[f64],
    ndim: &[usize],
    mode: &str,
) -> Result<Vec<PathBuf>, SimError> {
    let mode = match mode {
        "mean" => LeakageMode::MeanResponse,
        "realization" => LeakageMode::SeededRealization,
        other => {
            return Err(SimError::Invalid(format!(
                "leakage mode must be \"mean\" or \"realization\", got \"{other}\""
            )))
        }
    };
    let tsym_list: Vec<f64> = if tsym.is_empty() { vec![2.0, 4.0, 8.0, 16.0] } else { tsym.to_vec() };
    let ndim_list: Vec<usize> = if ndim.is_empty() { vec![1, 2, 4] } else { ndim.to_vec() };
    let reports = leakage_sweep(&ndim_list, &tsym_list, &v.scenario, &v.sim, mode, seed)?;

    let mut w = CsvWriter::new();
    preamble(&mut w, "leakage", hash, seed);
    w.comment("mode: 0 = mean response channel, 1 = seeded wind realization");
    w.header(&["n_dim", "t_sym_s", "leakage", "mode", "seed"]);
    for r in &reports {
        w.row(&[
            r.n_dim.into(),
            r.t_sym.into(),
            r.leakage.into(),
            Field::Int(u64::from(r.mode == LeakageMode::SeededRealization)),
            r.seed.unwrap_or(0).into(),
        ]);
    }
    Ok(vec![emit(out, &format!("leakage_{hash}.csv"), w)?])
}

/// Autocorrelation entry point used by the WSS reference check in tests.
#[doc(hidden)]
pub fn wss_reference_value(sc: &Scenario, tau: f64, dt: f64, t0: f64) -> Result<f64, SimError> {
    Ok(wss_autocorrelation_at(tau, tau, dt, sc, t0)?)
}
