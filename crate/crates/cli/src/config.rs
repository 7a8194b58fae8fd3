//! Scenario configuration. JSON, SI units throughout.

use serde::Deserialize;
use spopo_core::{CavityConfig, CrystalConfig, Dispersion, FrequencyGrid, PumpConfig};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub grid: GridSection,
    pub pump: PumpSection,
    pub crystal: CrystalSection,
    pub cavity: CavitySection,
    #[serde(default)]
    pub run: RunSection,
}

/// Signal detuning grid, `ω ∈ [−omega_max, omega_max]` in rad/s.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_points: usize,
    pub omega_max: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    /// Pulse energy, J.
    pub energy: Option<f64>,
    /// Leading gain as a fraction of the threshold gain, in `[0, 1)`.
    pub pump_ratio: Option<f64>,
    /// Intensity FWHM, s.
    pub tau_p: f64,
    /// Repetition period, s.
    pub t0: f64,
    /// Half the pump carrier-envelope offset, rad.
    pub delta0: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalSection {
    /// m
    pub length: f64,
    /// m/V
    pub d_eff: f64,
    pub n0: f64,
    /// m²
    pub a_eff: f64,
    /// Taylor coefficients of the signal wavenumber, m⁻¹·(s/rad)^j.
    pub signal_dispersion: [f64; 4],
    pub pump_dispersion: [f64; 4],
    /// rad/s
    pub omega0: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub r: Option<f64>,
    pub finesse: Option<f64>,
    /// Round-trip phase, rad.
    pub delta_rt: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub gain_cutoff: f64,
    /// Modes written to the mode dumps.
    pub mode_dump: usize,
    /// Points of the uniform θ grid over `[−π, π]`.
    pub theta_points: usize,
    /// Modes in the squeezing spectrum; all kept modes when absent.
    pub spectrum_modes: Option<usize>,
    pub covariance_pulses: usize,
    pub duan_max_separation: usize,
    pub n_max: usize,
    pub ratios: Vec<f64>,
    /// Mean photon number per probe pulse.
    pub n_bar0: f64,
    pub probe_pulses: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            gain_cutoff: spopo_core::supermodes::DEFAULT_GAIN_CUTOFF,
            mode_dump: 4,
            theta_points: 201,
            spectrum_modes: None,
            covariance_pulses: 8,
            duan_max_separation: 10,
            n_max: 100,
            ratios: vec![0.5, 0.8, 0.95],
            n_bar0: 1.0,
            probe_pulses: 10,
        }
    }
}

/// How the pump strength is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PumpStrength {
    Energy(f64),
    Ratio(f64),
}

fn schema(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        code: "config_schema",
        field: Some(field.to_string()),
        message: message.into(),
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(CliError::from_serde)?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), CliError> {
        match (self.pump.energy, self.pump.pump_ratio) {
            (Some(_), Some(_)) => return Err(schema("pump.energy", "give exactly one of pump.energy and pump.pump_ratio")),
            (None, None) => return Err(schema("pump.energy", "missing pump strength: give pump.energy or pump.pump_ratio")),
            _ => {}
        }
        match (self.cavity.r, self.cavity.finesse) {
            (Some(_), Some(_)) => return Err(schema("cavity.r", "give exactly one of cavity.r and cavity.finesse")),
            (None, None) => return Err(schema("cavity.r", "missing mirror reflectivity: give cavity.r or cavity.finesse")),
            _ => {}
        }
        if self.run.theta_points < 2 {
            return Err(schema("run.theta_points", "need at least 2 points"));
        }
        if self.run.n_max == 0 {
            return Err(schema("run.n_max", "must be at least 1"));
        }
        if self.run.probe_pulses == 0 {
            return Err(schema("run.probe_pulses", "must be at least 1"));
        }
        if !(self.run.gain_cutoff >= 0.0 && self.run.gain_cutoff < 1.0) {
            return Err(schema("run.gain_cutoff", "must lie in [0, 1)"));
        }
        Ok(())
    }

    pub fn strength(&self) -> PumpStrength {
        match (self.pump.energy, self.pump.pump_ratio) {
            (Some(e), _) => PumpStrength::Energy(e),
            (_, Some(r)) => PumpStrength::Ratio(r),
            _ => unreachable!("checked on parse"),
        }
    }

    pub fn grid(&self) -> spopo_core::Result<FrequencyGrid> {
        FrequencyGrid::new(self.grid.n_points, self.grid.omega_max)
    }

    /// Pump at the configured energy, or at 1 J when the strength is a ratio.
    pub fn pump(&self) -> spopo_core::Result<PumpConfig> {
        let energy = match self.strength() {
            PumpStrength::Energy(e) => e,
            PumpStrength::Ratio(_) => 1.0,
        };
        PumpConfig::gaussian(energy, self.pump.tau_p, self.pump.delta0, self.pump.t0)
    }

    pub fn crystal(&self) -> CrystalConfig {
        let c = &self.crystal;
        CrystalConfig {
            length: c.length,
            d_eff: c.d_eff,
            n0: c.n0,
            a_eff: c.a_eff,
            signal_dispersion: Dispersion(c.signal_dispersion),
            pump_dispersion: Dispersion(c.pump_dispersion),
            omega0: c.omega0,
        }
    }

    pub fn cavity(&self) -> spopo_core::Result<CavityConfig> {
        match (self.cavity.r, self.cavity.finesse) {
            (Some(r), _) => CavityConfig::from_r(r, self.cavity.delta_rt),
            (_, Some(f)) => CavityConfig::from_finesse(f, self.cavity.delta_rt),
            _ => unreachable!("checked on parse"),
        }
    }
}
