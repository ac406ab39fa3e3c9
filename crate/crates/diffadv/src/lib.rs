//! Simulation and analysis toolkit for particle communication links
//! through time-varying diffusion-advection channels.
//!
//! Builds on [`diffadv_core`] with the pieces that want a filesystem and
//! threads: a pruned parallel propagation engine, the end-to-end link
//! simulator and BER sweep harness, pulse-leakage design sweeps, TOML
//! scenario configuration and reproducible CSV emission for the `diffadv`
//! command-line tool.

pub mod cli;
pub mod config;
pub mod csvio;
pub mod engine;
pub mod leakage;
pub mod link;

use thiserror::Error;

/// Unified error for simulation drivers and the CLI.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("{0}")]
    Wind(#[from] diffadv_core::wind::WindError),
    #[error("{0}")]
    Geometry(#[from] diffadv_core::kernel::GeometryError),
    #[error("{0}")]
    Scenario(#[from] diffadv_core::scenario::ScenarioError),
    #[error("{0}")]
    Stats(#[from] diffadv_core::stats::StatsError),
    #[error("{0}")]
    Pulse(#[from] diffadv_core::pulse::PulseError),
    #[error("{0}")]
    Rx(#[from] diffadv_core::rx::RxError),
    #[error("config: {0}")]
    Config(String),
    #[error("realized channel energy is zero; cannot normalize")]
    ZeroChannelEnergy,
    #[error("{0}")]
    Invalid(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
