//! `--sweep FIELD=start:stop:points[:log]` parsing and application.

use std::fmt;
use std::str::FromStr;

use swipt_core::config::M2_PER_KM2;
use swipt_core::curve::{linear_grid, log_grid};
use swipt_core::Scenario;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TierKey {
    TransmitPower,
    Intensity,
    Antennas,
    AssociationWeight,
    HardwarePower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwiptKey {
    PowerSplit,
    DownlinkFraction,
    ConversionEfficiency,
    SlotDuration,
    UserPower,
    MinHarvestPower,
    MaxEhOutage,
    BetaMax,
    RhoMin,
}

/// A configuration field that can be swept, or the CDF threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    PathlossExponent,
    UserIntensity,
    NoisePower,
    /// Cell load of a tier (0-based), set through the user intensity.
    CellLoad(usize),
    Tier(usize, TierKey),
    Swipt(SwiptKey),
    Theta,
}

impl Field {
    /// Column name used for the abscissa.
    pub fn column(&self) -> String {
        match self {
            Field::PathlossExponent => "pathloss_exponent".into(),
            Field::UserIntensity => "user_intensity_per_km2".into(),
            Field::NoisePower => "noise_power_w".into(),
            Field::CellLoad(m) => format!("cell_load_tier{}", m + 1),
            Field::Tier(m, k) => format!("tier{}_{}", m + 1, tier_key_name(*k)),
            Field::Swipt(k) => swipt_key_name(*k).into(),
            Field::Theta => "theta_w".into(),
        }
    }

    /// A copy of `s` with this field set to `v`, validated.
    pub fn apply(&self, s: &Scenario, v: f64) -> Result<Scenario, CliError> {
        let mut out = s.clone();
        let tiers = s.network.tiers.len();
        let check_tier = |m: usize| {
            if m < tiers {
                Ok(())
            } else {
                Err(CliError::Config(format!("sweep: the config has no tier {}", m + 1)))
            }
        };
        match *self {
            Field::PathlossExponent => out.network.pathloss_exponent = v,
            Field::UserIntensity => out.network.user_intensity = v / M2_PER_KM2,
            Field::NoisePower => out.network.noise_power = v,
            Field::CellLoad(m) => {
                check_tier(m)?;
                if !(v > 0.0) {
                    return Err(CliError::Config(format!("sweep: cell load must be positive, got {v}")));
                }
                out.network = s.network.with_cell_load(m, v);
            }
            Field::Tier(m, key) => {
                check_tier(m)?;
                let t = &mut out.network.tiers[m];
                match key {
                    TierKey::TransmitPower => t.transmit_power = v,
                    TierKey::Intensity => t.intensity = v / M2_PER_KM2,
                    TierKey::Antennas => {
                        if v.fract() != 0.0 || !(1.0..=u32::MAX as f64).contains(&v) {
                            return Err(CliError::Config(format!("sweep: antennas must be a positive integer, got {v}")));
                        }
                        t.antennas = v as u32;
                    }
                    TierKey::AssociationWeight => t.association_weight = v,
                    TierKey::HardwarePower => t.hardware_power = v,
                }
            }
            Field::Swipt(key) => {
                let w = &mut out.swipt;
                match key {
                    SwiptKey::PowerSplit => w.power_split = v,
                    SwiptKey::DownlinkFraction => w.downlink_fraction = v,
                    SwiptKey::ConversionEfficiency => w.conversion_efficiency = v,
                    SwiptKey::SlotDuration => w.slot_duration = v,
                    SwiptKey::UserPower => w.user_power = v,
                    SwiptKey::MinHarvestPower => w.min_harvest_power = v,
                    SwiptKey::MaxEhOutage => w.max_eh_outage = v,
                    SwiptKey::BetaMax => w.beta_max = v,
                    SwiptKey::RhoMin => w.rho_min = v,
                }
            }
            Field::Theta => return Err(CliError::Config("sweep: theta is not a config field".into())),
        }
        out.validate().map_err(CliError::from)?;
        Ok(out)
    }
}

fn tier_key_name(k: TierKey) -> &'static str {
    match k {
        TierKey::TransmitPower => "transmit_power_w",
        TierKey::Intensity => "intensity_per_km2",
        TierKey::Antennas => "antennas",
        TierKey::AssociationWeight => "association_weight",
        TierKey::HardwarePower => "hardware_power_w",
    }
}

fn swipt_key_name(k: SwiptKey) -> &'static str {
    match k {
        SwiptKey::PowerSplit => "power_split",
        SwiptKey::DownlinkFraction => "downlink_fraction",
        SwiptKey::ConversionEfficiency => "conversion_efficiency",
        SwiptKey::SlotDuration => "slot_duration_s",
        SwiptKey::UserPower => "user_power_w",
        SwiptKey::MinHarvestPower => "min_harvest_power_w",
        SwiptKey::MaxEhOutage => "max_eh_outage",
        SwiptKey::BetaMax => "beta_max",
        SwiptKey::RhoMin => "rho_min",
    }
}

const SWIPT_KEYS: [SwiptKey; 9] = [
    SwiptKey::PowerSplit,
    SwiptKey::DownlinkFraction,
    SwiptKey::ConversionEfficiency,
    SwiptKey::SlotDuration,
    SwiptKey::UserPower,
    SwiptKey::MinHarvestPower,
    SwiptKey::MaxEhOutage,
    SwiptKey::BetaMax,
    SwiptKey::RhoMin,
];

const TIER_KEYS: [TierKey; 5] = [
    TierKey::TransmitPower,
    TierKey::Intensity,
    TierKey::Antennas,
    TierKey::AssociationWeight,
    TierKey::HardwarePower,
];

fn tier_index(s: &str) -> Option<usize> {
    s.parse::<usize>().ok().filter(|&m| m >= 1).map(|m| m - 1)
}

impl FromStr for Field {
    type Err = CliError;

    /// Accepts `pathloss_exponent`, `user_intensity_per_km2`, `noise_power_w`,
    /// `cell_load` (tier 1) or `cell_load.M`, `tier.M.<key>`, the `[swipt]`
    /// keys and `theta`. Tiers are numbered from 1.
    fn from_str(name: &str) -> Result<Field, CliError> {
        let unknown = || CliError::Config(format!("sweep: unknown field `{name}`"));
        let parts: Vec<&str> = name.split('.').collect();
        Ok(match parts.as_slice() {
            ["pathloss_exponent"] => Field::PathlossExponent,
            ["user_intensity_per_km2"] => Field::UserIntensity,
            ["noise_power_w"] => Field::NoisePower,
            ["theta"] => Field::Theta,
            ["cell_load"] => Field::CellLoad(0),
            ["cell_load", m] => Field::CellLoad(tier_index(m).ok_or_else(unknown)?),
            ["tier", m, key] => {
                let m = tier_index(m).ok_or_else(unknown)?;
                let key = TIER_KEYS
                    .into_iter()
                    .find(|k| tier_key_name(*k) == *key)
                    .ok_or_else(unknown)?;
                Field::Tier(m, key)
            }
            [key] => Field::Swipt(
                SWIPT_KEYS
                    .into_iter()
                    .find(|k| swipt_key_name(*k) == *key)
                    .ok_or_else(unknown)?,
            ),
            _ => return Err(unknown()),
        })
    }
}

/// A field and the grid of values it takes.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub field: Field,
    pub text: String,
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn new(field: Field, values: Vec<f64>) -> SweepSpec {
        SweepSpec {
            field,
            text: String::new(),
            values,
        }
    }
}

impl fmt::Display for SweepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl FromStr for SweepSpec {
    type Err = CliError;

    fn from_str(text: &str) -> Result<SweepSpec, CliError> {
        let bad = |why: &str| CliError::Config(format!("sweep `{text}`: {why}"));
        let (name, grid) = text
            .split_once('=')
            .ok_or_else(|| bad("expected FIELD=start:stop:points[:log]"))?;
        let field: Field = name.trim().parse()?;
        let parts: Vec<&str> = grid.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(bad("expected start:stop:points[:log]"));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("`{s}` is not a number")));
        let (start, stop) = (num(parts[0])?, num(parts[1])?);
        let points: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| bad("points must be a positive integer"))?;
        let log = match parts.get(3).map(|s| s.trim()) {
            None => false,
            Some("log") => true,
            Some(other) => return Err(bad(&format!("unknown spacing `{other}`"))),
        };
        if points == 0 {
            return Err(bad("the grid is empty"));
        }
        if !(start.is_finite() && stop.is_finite()) || start > stop {
            return Err(bad("need finite start ≤ stop"));
        }
        if log && start <= 0.0 {
            return Err(bad("a log grid needs start > 0"));
        }
        let values = if points == 1 || start == stop {
            if points != 1 {
                return Err(bad("start = stop needs points = 1"));
            }
            vec![start]
        } else if log {
            log_grid(start, stop, points)?
        } else {
            linear_grid(start, stop, points)?
        };
        Ok(SweepSpec {
            field,
            text: text.to_string(),
            values,
        })
    }
}
