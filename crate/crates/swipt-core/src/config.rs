//! Network, receiver and simulation parameters.
//!
//! Everything is SI internally: meters, watts, seconds, nats. Intensities are
//! written per km² in configuration files and converted on load, because the
//! bounded path-loss model is anchored at a distance of one meter.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square meters per square kilometer.
pub const M2_PER_KM2: f64 = 1e6;

/// One tier of base stations.
#[derive(Debug, Clone, PartialEq)]
pub struct TierConfig {
    /// Transmit power `P_m` in watts.
    pub transmit_power: f64,
    /// Intensity `λ_m` in BSs per square meter.
    pub intensity: f64,
    /// Antenna count `N_m`.
    pub antennas: u32,
    /// Association weight `w_m` (`P_m` for max-power association, 1 for nearest-BS).
    pub association_weight: f64,
    /// Hardware power `P_m,on` in watts.
    pub hardware_power: f64,
}

impl TierConfig {
    pub fn validate(&self, index: usize) -> Result<()> {
        let name = |f: &str| format!("tier[{index}].{f}");
        positive(&name("transmit_power"), self.transmit_power)?;
        positive(&name("intensity"), self.intensity)?;
        positive(&name("association_weight"), self.association_weight)?;
        if self.antennas < 1 {
            return Err(Error::invalid(name("antennas"), "must be at least 1"));
        }
        if !(self.hardware_power >= 0.0 && self.hardware_power.is_finite()) {
            return Err(Error::invalid(name("hardware_power"), "must be nonnegative"));
        }
        Ok(())
    }
}

/// The multi-tier network and its users.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub tiers: Vec<TierConfig>,
    /// User intensity `μ` in users per square meter.
    pub user_intensity: f64,
    /// Path-loss exponent `α > 2`.
    pub pathloss_exponent: f64,
    /// Receiver noise power `σ²` in watts.
    pub noise_power: f64,
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tiers.is_empty() {
            return Err(Error::invalid("tiers", "at least one tier is required"));
        }
        for (i, t) in self.tiers.iter().enumerate() {
            t.validate(i)?;
        }
        positive("user_intensity", self.user_intensity)?;
        if !(self.pathloss_exponent > 2.0 && self.pathloss_exponent.is_finite()) {
            return Err(Error::invalid("pathloss_exponent", "must exceed 2"));
        }
        if !(self.noise_power >= 0.0 && self.noise_power.is_finite()) {
            return Err(Error::invalid("noise_power", "must be nonnegative"));
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.pathloss_exponent
    }

    /// `w_m^{2/α}`, the factor by which association weights stretch distances.
    pub fn weight_factor(&self, m: usize) -> f64 {
        self.tiers[m]
            .association_weight
            .powf(2.0 / self.pathloss_exponent)
    }

    /// `λ_Σ = Σ_m w_m^{2/α} λ_m`.
    pub fn lambda_sigma(&self) -> f64 {
        (0..self.tiers.len())
            .map(|m| self.weight_factor(m) * self.tiers[m].intensity)
            .sum()
    }

    /// Copy with the user intensity chosen so that tier `m` has cell load `load`.
    pub fn with_cell_load(&self, m: usize, load: f64) -> NetworkConfig {
        let mut out = self.clone();
        out.user_intensity = load * self.lambda_sigma() / self.weight_factor(m);
        out
    }

    pub fn with_user_intensity(&self, mu: f64) -> NetworkConfig {
        NetworkConfig {
            user_intensity: mu,
            ..self.clone()
        }
    }

    pub fn with_noise_power(&self, noise: f64) -> NetworkConfig {
        NetworkConfig {
            noise_power: noise,
            ..self.clone()
        }
    }

    pub fn with_pathloss_exponent(&self, alpha: f64) -> NetworkConfig {
        NetworkConfig {
            pathloss_exponent: alpha,
            ..self.clone()
        }
    }

    /// Copy with every tier intensity multiplied by `factor`.
    pub fn with_scaled_intensities(&self, factor: f64) -> NetworkConfig {
        let mut out = self.clone();
        for t in &mut out.tiers {
            t.intensity *= factor;
        }
        out
    }

    /// True when every weight equals its tier's transmit power.
    pub fn is_max_power_association(&self) -> bool {
        self.tiers
            .iter()
            .all(|t| (t.association_weight - t.transmit_power).abs() <= 1e-12 * t.transmit_power)
    }
}

/// Power-splitting receiver and harvest-then-transmit protocol parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SwiptConfig {
    /// Fraction `ρ` of received power sent to the decoder.
    pub power_split: f64,
    /// Downlink fraction `β` of each slot.
    pub downlink_fraction: f64,
    /// RF-to-DC conversion efficiency `η`.
    pub conversion_efficiency: f64,
    /// Slot duration `τ` in seconds.
    pub slot_duration: f64,
    /// Uplink transmit power `Q` in watts.
    pub user_power: f64,
    /// Circuit activation threshold for harvesting, in watts.
    pub min_harvest_power: f64,
    /// Largest tolerated harvesting outage.
    pub max_eh_outage: f64,
    /// Upper bound `β̄` on the downlink fraction.
    pub beta_max: f64,
    /// Lower bound `ρ̲` on the power split.
    pub rho_min: f64,
}

pub const DEFAULT_BETA_MAX: f64 = 0.95;
pub const DEFAULT_RHO_MIN: f64 = 0.05;

impl SwiptConfig {
    pub fn validate(&self) -> Result<()> {
        open_unit("power_split", self.power_split)?;
        open_unit("downlink_fraction", self.downlink_fraction)?;
        open_unit("conversion_efficiency", self.conversion_efficiency)?;
        positive("slot_duration", self.slot_duration)?;
        positive("user_power", self.user_power)?;
        positive("min_harvest_power", self.min_harvest_power)?;
        open_unit("max_eh_outage", self.max_eh_outage)?;
        if !(self.beta_max > 0.0 && self.beta_max <= 1.0) {
            return Err(Error::invalid("beta_max", "must lie in (0, 1]"));
        }
        open_unit("rho_min", self.rho_min)?;
        Ok(())
    }

    /// The harvesting scale `η(1-ρ)`.
    pub fn harvest_scale(&self) -> f64 {
        self.conversion_efficiency * (1.0 - self.power_split)
    }

    pub fn with_split(&self, rho: f64, beta: f64) -> SwiptConfig {
        SwiptConfig {
            power_split: rho,
            downlink_fraction: beta,
            ..self.clone()
        }
    }
}

/// How the one-meter path-loss cutoff is placed in simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NearField {
    /// Cutoff at unit weighted distance, i.e. physical distance `w_m^{1/α}`.
    /// This is the convention under which the mean-energy closed form holds.
    #[default]
    AssociationScaled,
    /// Cutoff at a physical distance of one meter for every tier.
    Physical,
}

/// Knobs for the Monte Carlo engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// Fixed window radius in meters; derived from edge-effect bounds when absent.
    #[serde(default)]
    pub window_radius_m: Option<f64>,
    #[serde(default)]
    pub near_field: NearField,
    /// Ceiling on `ln(1+γ)` for interference-free trials, in nats.
    #[serde(default = "default_rate_cap")]
    pub rate_cap_nats: f64,
}

fn default_rate_cap() -> f64 {
    30.0
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            window_radius_m: None,
            near_field: NearField::default(),
            rate_cap_nats: default_rate_cap(),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.window_radius_m {
            positive("simulation.window_radius_m", r)?;
        }
        positive("simulation.rate_cap_nats", self.rate_cap_nats)
    }
}

/// A complete, validated parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub tier_names: Vec<String>,
    pub network: NetworkConfig,
    pub swipt: SwiptConfig,
    pub simulation: SimulationConfig,
}

impl Scenario {
    pub fn new(network: NetworkConfig, swipt: SwiptConfig) -> Result<Scenario> {
        let tier_names = (1..=network.tiers.len()).map(|m| format!("tier{m}")).collect();
        let s = Scenario {
            tier_names,
            network,
            swipt,
            simulation: SimulationConfig::default(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        self.swipt.validate()?;
        self.simulation.validate()
    }

    pub fn from_toml_str(text: &str) -> Result<Scenario> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| Error::invalid("config", e.message().to_string()))?;
        file.into_scenario()
    }

    pub fn from_json_str(text: &str) -> Result<Scenario> {
        let file: ScenarioFile =
            serde_json::from_str(text).map_err(|e| Error::invalid("config", e.to_string()))?;
        file.into_scenario()
    }

    /// Loads a `.toml` or `.json` file, chosen by extension.
    pub fn from_path(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid("config", format!("{}: {e}", path.display())))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Scenario::from_json_str(&text),
            _ => Scenario::from_toml_str(&text),
        }
    }

    /// The file-format view of this scenario, in interface units.
    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            network: NetworkSection {
                pathloss_exponent: self.network.pathloss_exponent,
                user_intensity_per_km2: self.network.user_intensity * M2_PER_KM2,
                noise_power_w: self.network.noise_power,
            },
            tiers: self
                .network
                .tiers
                .iter()
                .zip(&self.tier_names)
                .map(|(t, name)| TierSection {
                    name: Some(name.clone()),
                    transmit_power_w: t.transmit_power,
                    intensity_per_km2: t.intensity * M2_PER_KM2,
                    antennas: t.antennas,
                    association_weight: Weight::Value(t.association_weight),
                    hardware_power_w: t.hardware_power,
                })
                .collect(),
            swipt: SwiptSection {
                power_split: self.swipt.power_split,
                downlink_fraction: self.swipt.downlink_fraction,
                conversion_efficiency: self.swipt.conversion_efficiency,
                slot_duration_s: self.swipt.slot_duration,
                user_power_w: self.swipt.user_power,
                min_harvest_power_w: self.swipt.min_harvest_power,
                max_eh_outage: self.swipt.max_eh_outage,
                beta_max: self.swipt.beta_max,
                rho_min: self.swipt.rho_min,
            },
            simulation: self.simulation.clone(),
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.to_file()).expect("scenario serializes to TOML")
    }

    pub fn with_network(&self, network: NetworkConfig) -> Scenario {
        Scenario {
            network,
            ..self.clone()
        }
    }

    pub fn with_swipt(&self, swipt: SwiptConfig) -> Scenario {
        Scenario {
            swipt,
            ..self.clone()
        }
    }
}

/// Association weight as written in a file: a number, or `"max_power"` /
/// `"nearest"` as shorthands for `P_m` and 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weight {
    Value(f64),
    Rule(WeightRule),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRule {
    MaxPower,
    Nearest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub pathloss_exponent: f64,
    pub user_intensity_per_km2: f64,
    #[serde(default)]
    pub noise_power_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub transmit_power_w: f64,
    pub intensity_per_km2: f64,
    pub antennas: u32,
    pub association_weight: Weight,
    pub hardware_power_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwiptSection {
    pub power_split: f64,
    pub downlink_fraction: f64,
    pub conversion_efficiency: f64,
    pub slot_duration_s: f64,
    pub user_power_w: f64,
    pub min_harvest_power_w: f64,
    pub max_eh_outage: f64,
    #[serde(default = "default_beta_max")]
    pub beta_max: f64,
    #[serde(default = "default_rho_min")]
    pub rho_min: f64,
}

fn default_beta_max() -> f64 {
    DEFAULT_BETA_MAX
}

fn default_rho_min() -> f64 {
    DEFAULT_RHO_MIN
}

/// On-disk configuration layout (TOML or JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub network: NetworkSection,
    #[serde(rename = "tier")]
    pub tiers: Vec<TierSection>,
    pub swipt: SwiptSection,
    #[serde(default)]
    pub simulation: SimulationConfig,
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario> {
        let tiers = self
            .tiers
            .iter()
            .map(|t| TierConfig {
                transmit_power: t.transmit_power_w,
                intensity: t.intensity_per_km2 / M2_PER_KM2,
                antennas: t.antennas,
                association_weight: match t.association_weight {
                    Weight::Value(w) => w,
                    Weight::Rule(WeightRule::MaxPower) => t.transmit_power_w,
                    Weight::Rule(WeightRule::Nearest) => 1.0,
                },
                hardware_power: t.hardware_power_w,
            })
            .collect();
        let tier_names = self
            .tiers
            .iter()
            .enumerate()
            .map(|(i, t)| t.name.clone().unwrap_or_else(|| format!("tier{}", i + 1)))
            .collect();
        let s = &self.swipt;
        let scenario = Scenario {
            tier_names,
            network: NetworkConfig {
                tiers,
                user_intensity: self.network.user_intensity_per_km2 / M2_PER_KM2,
                pathloss_exponent: self.network.pathloss_exponent,
                noise_power: self.network.noise_power_w,
            },
            swipt: SwiptConfig {
                power_split: s.power_split,
                downlink_fraction: s.downlink_fraction,
                conversion_efficiency: s.conversion_efficiency,
                slot_duration: s.slot_duration_s,
                user_power: s.user_power_w,
                min_harvest_power: s.min_harvest_power_w,
                max_eh_outage: s.max_eh_outage,
                beta_max: s.beta_max,
                rho_min: s.rho_min,
            },
            simulation: self.simulation,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be positive and finite, got {v}")))
    }
}

fn open_unit(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must lie in (0, 1), got {v}")))
    }
}

/// The two-tier macro/pico network used throughout the examples: 40 W and
/// 10 W tiers at 1 and 50 BSs/km², 8 and 4 antennas, max-power association,
/// tier-1 cell load 2, and the receiver settings ρ = 0.5, β = 0.75, η = 0.85.
pub fn two_tier_reference(alpha: f64) -> Scenario {
    let lambda1 = 1.0 / M2_PER_KM2;
    let network = NetworkConfig {
        tiers: vec![
            TierConfig {
                transmit_power: 40.0,
                intensity: lambda1,
                antennas: 8,
                association_weight: 40.0,
                hardware_power: 118.7,
            },
            TierConfig {
                transmit_power: 10.0,
                intensity: 50.0 * lambda1,
                antennas: 4,
                association_weight: 10.0,
                hardware_power: 6.8,
            },
        ],
        user_intensity: 1.0,
        pathloss_exponent: alpha,
        noise_power: 0.0,
    }
    .with_cell_load(0, 2.0);
    let swipt = SwiptConfig {
        power_split: 0.5,
        downlink_fraction: 0.75,
        conversion_efficiency: 0.85,
        slot_duration: 1.0,
        user_power: 1e-3,
        min_harvest_power: 0.2e-3,
        max_eh_outage: 0.99,
        beta_max: DEFAULT_BETA_MAX,
        rho_min: DEFAULT_RHO_MIN,
    };
    let mut s = Scenario::new(network, swipt).expect("reference scenario is valid");
    s.tier_names = vec!["macro".into(), "pico".into()];
    s
}
