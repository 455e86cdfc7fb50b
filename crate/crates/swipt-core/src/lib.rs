//! Cell-load-aware analysis of simultaneous wireless information and power
//! transfer in multi-tier Poisson cellular networks, with a Monte Carlo
//! simulator that checks every analytical result.

pub mod cell_load;
pub mod config;
pub mod curve;
pub mod energy_eff;
pub mod shot_noise;
pub mod error;
pub mod harvest;
pub mod link_rate;
pub mod montecarlo;
pub mod specfun;
pub mod stats;

pub use config::{NetworkConfig, Scenario, SwiptConfig, TierConfig};
pub use error::{Error, Result};
pub use stats::{derive_stats, NetworkStats, TierStats};
