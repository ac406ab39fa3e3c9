//! Scenario configuration: TOML schema, defaults and validation.
//!
//! An empty document yields the reference operating point (1 m diagonal
//! separation at 1 m height, the (Z)-3-hexenyl acetate diffusion
//! coefficient, directed white wind, 1 kHz channel / 0.1 kHz receiver
//! rates, 30 s channel memory, 2 s symbols with 10 pilots). Unknown keys
//! are rejected with the offending key named, and every module-level
//! invariant is re-checked at validation time with a field path in the
//! error.

use diffadv_core::kernel::{Geometry, Medium};
use diffadv_core::pulse::ModulationScheme;
use diffadv_core::rx::{EqualizerForm, NoiseSpec};
use diffadv_core::wind::{CovarianceKernel, WindModel};
use diffadv_core::Scenario;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::SimParams;
use crate::link::LinkParams;
use crate::SimError;

/// Reference diffusion coefficient (m^2/s), (Z)-3-hexenyl acetate in air.
pub const DEFAULT_DIFFUSION: f64 = 6.7698e-6;

fn cfg_err(msg: String) -> SimError {
    SimError::Config(msg)
}

fn default_kernel_kind() -> String {
    "white".into()
}

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    /// Master seed; command line and `DIFFADV_SEED` take precedence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub geometry: GeometryConfig,
    pub medium: MediumConfig,
    pub wind: WindConfig,
    pub simulation: SimulationConfig,
    pub link: LinkConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: None,
            geometry: GeometryConfig::default(),
            medium: MediumConfig::default(),
            wind: WindConfig::default(),
            simulation: SimulationConfig::default(),
            link: LinkConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    /// Source position (m); the plane x3 = 0 absorbs.
    pub source: [f64; 3],
    /// Receiver position (m).
    pub receiver: [f64; 3],
}

impl Default for GeometryConfig {
    fn default() -> Self {
        let s = 0.5f64.sqrt();
        Self { source: [0.0, 0.0, 1.0], receiver: [s, s, 1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MediumConfig {
    /// Diffusion coefficient (m^2/s).
    pub diffusion: f64,
}

impl Default for MediumConfig {
    fn default() -> Self {
        Self { diffusion: DEFAULT_DIFFUSION }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindConfig {
    /// Mean speed (m/s) along the horizontal source-to-receiver direction.
    pub mean_speed: f64,
    pub kernel: KernelConfig,
}

impl Default for WindConfig {
    fn default() -> Self {
        Self { mean_speed: 0.5, kernel: KernelConfig::default() }
    }
}

/// Covariance kernel selector plus the parameters its kind needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    /// `white`, `wss-exponential`, `wss-gaussian`,
    /// `nonstationary-exponential` or `nonstationary-oscillatory`.
    #[serde(default = "default_kernel_kind")]
    pub kind: String,
    /// White noise intensity sigma_v^2 (m^2/s).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity: Option<f64>,
    /// Stationary variance (m^2/s^2) for finite kernels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    /// Correlation time (s).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation_time: Option<f64>,
    /// Gaussian envelope center (s), nonstationary-exponential.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope_center: Option<f64>,
    /// Gaussian envelope width (s), nonstationary-exponential.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope_width: Option<f64>,
    /// Cosine period (s), nonstationary-oscillatory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oscillation_period: Option<f64>,
    /// Amplitude modulation depth in [0, 1), nonstationary-oscillatory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulation_depth: Option<f64>,
    /// Amplitude modulation time scale (s), nonstationary-oscillatory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulation_time: Option<f64>,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            kind: "white".into(),
            intensity: Some(1e-6),
            variance: None,
            correlation_time: None,
            envelope_center: None,
            envelope_width: None,
            oscillation_period: None,
            modulation_depth: None,
            modulation_time: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub channel_rate_hz: u32,
    pub symbol_rate_hz: u32,
    /// Channel memory (s).
    pub memory_s: f64,
    /// Scale the received record to unit realized channel energy.
    pub normalize_channel: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self { channel_rate_hz: 1000, symbol_rate_hz: 100, memory_s: 30.0, normalize_channel: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkConfig {
    /// `two`, `four`, `eight-symmetric`, `eight-wide`, `eight-tall` or
    /// `sixteen`.
    pub scheme: String,
    pub t_sym_s: f64,
    pub n_symbols: usize,
    pub n_pilots: usize,
    pub n_trailing_empty: usize,
    /// Exactly one of `snr_db` / `ebn0_db` may be set; neither is
    /// noiseless.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ebn0_db: Option<f64>,
    /// `affine` or `diagonal`.
    pub equalizer: String,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            scheme: "four".into(),
            t_sym_s: 2.0,
            n_symbols: 1000,
            n_pilots: 10,
            n_trailing_empty: 100,
            snr_db: None,
            ebn0_db: None,
            equalizer: "affine".into(),
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing and canonical form
// ---------------------------------------------------------------------------

/// Parse a TOML scenario document; parse errors carry line/column.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, SimError> {
    toml::from_str(text).map_err(|e| cfg_err(e.to_string()))
}

/// Deterministic serialization (struct field order, 17-significant-digit
/// floats via the TOML writer's shortest round-trip form).
pub fn canonical_toml(config: &ScenarioConfig) -> String {
    toml::to_string(config).expect("config serializes")
}

/// First 8 hex characters of the SHA-256 of the canonical form.
pub fn config_hash(config: &ScenarioConfig) -> String {
    let digest = Sha256::digest(canonical_toml(config).as_bytes());
    let mut hex = String::with_capacity(8);
    for byte in digest.iter().take(4) {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Fully validated configuration, ready to drive simulations.
#[derive(Debug, Clone, PartialEq)]
pub struct Validated {
    pub scenario: Scenario,
    pub sim: SimParams,
    pub link: LinkParams,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<Validated, SimError> {
        let geometry = Geometry::new(self.geometry.source, self.geometry.receiver)
            .map_err(|e| cfg_err(format!("geometry: {e}")))?;
        let medium = Medium::new(self.medium.diffusion)
            .map_err(|e| cfg_err(format!("medium.diffusion: {e}")))?;
        let kernel = self.wind.kernel.build()?;
        if !(self.wind.mean_speed >= 0.0) {
            return Err(cfg_err(format!(
                "wind.mean_speed: must be >= 0 (positive = source toward receiver), got {}",
                self.wind.mean_speed
            )));
        }
        let wind = WindModel::new(self.wind.mean_speed, kernel)
            .map_err(|e| cfg_err(format!("wind: {e}")))?;
        let scenario =
            Scenario::new(geometry, medium, wind).map_err(|e| cfg_err(format!("scenario: {e}")))?;

        let sim = SimParams {
            channel_rate_hz: self.simulation.channel_rate_hz,
            symbol_rate_hz: self.simulation.symbol_rate_hz,
            t_mem: self.simulation.memory_s,
            normalize: self.simulation.normalize_channel,
        };
        sim.validate().map_err(|e| cfg_err(format!("simulation: {e}")))?;

        let scheme = parse_scheme(&self.link.scheme)?;
        let noise = match (self.link.snr_db, self.link.ebn0_db) {
            (None, None) => NoiseSpec::Noiseless,
            (Some(db), None) => NoiseSpec::SnrDb(db),
            (None, Some(db)) => NoiseSpec::EbN0Db(db),
            (Some(_), Some(_)) => {
                return Err(cfg_err("link.snr_db and link.ebn0_db are mutually exclusive".into()))
            }
        };
        let equalizer = match self.link.equalizer.as_str() {
            "affine" => EqualizerForm::Affine,
            "diagonal" => EqualizerForm::Diagonal,
            other => {
                return Err(cfg_err(format!(
                    "link.equalizer: expected \"affine\" or \"diagonal\", got \"{other}\""
                )))
            }
        };
        let link = LinkParams {
            scheme,
            t_sym: self.link.t_sym_s,
            n_symbols: self.link.n_symbols,
            n_pilots: self.link.n_pilots,
            n_trailing_empty: self.link.n_trailing_empty,
            noise,
            equalizer,
        };
        link.validate().map_err(|e| cfg_err(format!("link: {e}")))?;
        Ok(Validated { scenario, sim, link })
    }
}

fn parse_scheme(name: &str) -> Result<ModulationScheme, SimError> {
    ModulationScheme::ALL
        .into_iter()
        .find(|s| s.name() == name)
        .ok_or_else(|| {
            let names: Vec<&str> = ModulationScheme::ALL.iter().map(|s| s.name()).collect();
            cfg_err(format!("link.scheme: unknown scheme \"{name}\" (one of {})", names.join(", ")))
        })
}

impl KernelConfig {
    /// Build the kernel, rejecting missing or extraneous parameters with
    /// the offending field named.
    pub fn build(&self) -> Result<CovarianceKernel, SimError> {
        let require = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| {
                cfg_err(format!("wind.kernel.{name} is required for kind \"{}\"", self.kind))
            })
        };
        let forbid = |v: Option<f64>, name: &str| {
            if v.is_some() {
                Err(cfg_err(format!(
                    "wind.kernel.{name} is not a parameter of kind \"{}\"",
                    self.kind
                )))
            } else {
                Ok(())
            }
        };
        let kernel = match self.kind.as_str() {
            "white" => {
                forbid(self.variance, "variance")?;
                forbid(self.correlation_time, "correlation_time")?;
                forbid(self.envelope_center, "envelope_center")?;
                forbid(self.envelope_width, "envelope_width")?;
                forbid(self.oscillation_period, "oscillation_period")?;
                forbid(self.modulation_depth, "modulation_depth")?;
                forbid(self.modulation_time, "modulation_time")?;
                CovarianceKernel::White { intensity: require(self.intensity, "intensity")? }
            }
            "wss-exponential" | "wss-gaussian" => {
                forbid(self.intensity, "intensity")?;
                forbid(self.envelope_center, "envelope_center")?;
                forbid(self.envelope_width, "envelope_width")?;
                forbid(self.oscillation_period, "oscillation_period")?;
                forbid(self.modulation_depth, "modulation_depth")?;
                forbid(self.modulation_time, "modulation_time")?;
                let variance = require(self.variance, "variance")?;
                let correlation_time = require(self.correlation_time, "correlation_time")?;
                if self.kind == "wss-exponential" {
                    CovarianceKernel::WssExponential { variance, correlation_time }
                } else {
                    CovarianceKernel::WssGaussian { variance, correlation_time }
                }
            }
            "nonstationary-exponential" => {
                forbid(self.intensity, "intensity")?;
                forbid(self.oscillation_period, "oscillation_period")?;
                forbid(self.modulation_depth, "modulation_depth")?;
                forbid(self.modulation_time, "modulation_time")?;
                CovarianceKernel::NonstationaryExponential {
                    variance: require(self.variance, "variance")?,
                    correlation_time: require(self.correlation_time, "correlation_time")?,
                    envelope_center: require(self.envelope_center, "envelope_center")?,
                    envelope_width: require(self.envelope_width, "envelope_width")?,
                }
            }
            "nonstationary-oscillatory" => {
                forbid(self.intensity, "intensity")?;
                forbid(self.envelope_center, "envelope_center")?;
                forbid(self.envelope_width, "envelope_width")?;
                CovarianceKernel::NonstationaryOscillatory {
                    variance: require(self.variance, "variance")?,
                    correlation_time: require(self.correlation_time, "correlation_time")?,
                    oscillation_period: require(self.oscillation_period, "oscillation_period")?,
                    modulation_depth: require(self.modulation_depth, "modulation_depth")?,
                    modulation_time: require(self.modulation_time, "modulation_time")?,
                }
            }
            other => {
                return Err(cfg_err(format!(
                    "wind.kernel.kind: unknown kind \"{other}\" (one of white, wss-exponential, \
                     wss-gaussian, nonstationary-exponential, nonstationary-oscillatory)"
                )))
            }
        };
        kernel.validate().map_err(|e| cfg_err(format!("wind.kernel: {e}")))?;
        Ok(kernel)
    }
}
