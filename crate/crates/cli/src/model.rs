//! Resolved run descriptions: every command is reduced to a fully-explicit,
//! SI-unit parameter set that is serialized into the run manifest and can be
//! re-executed byte-identically with `dephasim rerun`.

use crate::units::{parse_charge, parse_dipole};
use dephasim::config::{Encounter, EnvironmentParticle, InterferometerConfig};
use dephasim::ensemble::GasEnsemble;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IfaceParams {
    pub mass: f64,
    pub max_separation: f64,
    pub accel_time: f64,
    pub hold_time: f64,
    pub charge: f64,
    pub dipole_moment: f64,
    pub radius: f64,
    pub relative_permittivity: f64,
}

impl IfaceParams {
    pub fn to_core(&self) -> InterferometerConfig {
        InterferometerConfig {
            mass: self.mass,
            max_separation: self.max_separation,
            accel_time: self.accel_time,
            hold_time: self.hold_time,
            charge: self.charge,
            dipole_moment: self.dipole_moment,
            radius: self.radius,
            relative_permittivity: self.relative_permittivity,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParticleParams {
    pub charge: f64,
    pub dipole_moment: f64,
    pub polarizability: f64,
    pub mass: f64,
}

impl ParticleParams {
    pub fn to_core(&self) -> EnvironmentParticle {
        EnvironmentParticle {
            charge: self.charge,
            dipole_moment: self.dipole_moment,
            polarizability: self.polarizability,
            mass: self.mass,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EncounterParams {
    pub impact_parameter: f64,
    pub speed: f64,
    pub alpha: f64,
    pub beta: f64,
    pub theta0: f64,
    pub gamma: f64,
    /// Averaging window T; defaults to b/v when absent.
    pub averaging_time: Option<f64>,
}

impl EncounterParams {
    pub fn to_core(&self) -> Encounter {
        Encounter {
            impact_parameter: self.impact_parameter,
            speed: self.speed,
            alpha: self.alpha,
            beta: self.beta,
            theta0: self.theta0,
            gamma: self.gamma,
            averaging_time: self
                .averaging_time
                .unwrap_or(self.impact_parameter / self.speed),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GasParams {
    pub chamber_size: f64,
    pub temperature: f64,
    pub gas_mass: f64,
    pub number_density: f64,
    pub b_min: f64,
}

impl GasParams {
    pub fn to_core(&self, number_density: f64) -> Result<GasEnsemble, dephasim::Error> {
        GasEnsemble::from_number_density(
            number_density,
            self.chamber_size,
            self.temperature,
            self.gas_mass,
            self.b_min,
        )
    }
}

/// A command with every parameter pinned.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum ResolvedRun {
    Channel {
        channel: String,
        interferometer: IfaceParams,
        particle: ParticleParams,
        encounter: EncounterParams,
        tolerance: f64,
    },
    Sweep {
        channels: Vec<String>,
        variable: String,
        grid: Vec<f64>,
        interferometer: IfaceParams,
        particle: ParticleParams,
        encounter: EncounterParams,
        gas: Option<GasParams>,
        tolerance: f64,
    },
    Qgem {
        interferometer: IfaceParams,
        particle: ParticleParams,
        gas: GasParams,
        nv_grid: Vec<f64>,
        separation: f64,
        channel: String,
        exact_bessel: bool,
        tolerance: f64,
    },
    Cnot {
        interferometer: IfaceParams,
        particle: ParticleParams,
        gas: GasParams,
        nv_grid: Vec<f64>,
        separation: f64,
        q1: f64,
        q2: f64,
        exact_bessel: bool,
        tolerance: f64,
    },
    Angles {
        channel: String,
        u_values: Vec<f64>,
        grid_points: usize,
    },
    Oracle {
        channel: String,
        interferometer: IfaceParams,
        particle: ParticleParams,
        encounter: EncounterParams,
        realizations: usize,
        seed: u64,
        /// Optional periodogram record length in units of b/v.
        periodogram_record: Option<f64>,
        tolerance: f64,
    },
}

// ---------------------------------------------------------------------------
// raw config file (TOML) with unit-suffixed values
// ---------------------------------------------------------------------------

fn charge_field(v: &toml::Value) -> Result<f64, String> {
    match v {
        toml::Value::Float(f) => Ok(f.abs()),
        toml::Value::Integer(i) => Ok((*i as f64).abs()),
        toml::Value::String(s) => parse_charge(s),
        other => Err(format!("expected number or string, got {other}")),
    }
}

fn dipole_field(v: &toml::Value) -> Result<f64, String> {
    match v {
        toml::Value::Float(f) => Ok(f.abs()),
        toml::Value::Integer(i) => Ok((*i as f64).abs()),
        toml::Value::String(s) => parse_dipole(s),
        other => Err(format!("expected number or string, got {other}")),
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub interferometer: RawInterferometer,
    #[serde(default)]
    pub particle: RawParticle,
    #[serde(default)]
    pub encounter: RawEncounter,
    #[serde(default)]
    pub gas: RawGas,
    #[serde(default)]
    pub run: RawRun,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInterferometer {
    pub mass: Option<f64>,
    pub max_separation: Option<f64>,
    pub accel_time: Option<f64>,
    pub hold_time: Option<f64>,
    pub charge: Option<toml::Value>,
    pub dipole: Option<toml::Value>,
    pub radius: Option<f64>,
    pub relative_permittivity: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParticle {
    pub charge: Option<toml::Value>,
    pub dipole: Option<toml::Value>,
    pub polarizability: Option<f64>,
    pub mass: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEncounter {
    pub impact_parameter: Option<f64>,
    pub speed: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub theta0: Option<f64>,
    pub gamma: Option<f64>,
    pub averaging_time: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGas {
    pub chamber_size: Option<f64>,
    pub temperature: Option<f64>,
    pub gas_mass: Option<f64>,
    pub number_density: Option<f64>,
    pub particle_count: Option<f64>,
    pub pressure: Option<f64>,
    pub b_min: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRun {
    pub channel: Option<String>,
    pub channels: Option<Vec<String>>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub separation_d: Option<f64>,
    pub q1: Option<toml::Value>,
    pub q2: Option<toml::Value>,
    pub sweep_variable: Option<String>,
    pub sweep_start: Option<f64>,
    pub sweep_stop: Option<f64>,
    pub sweep_points: Option<usize>,
    pub sweep_scale: Option<String>,
    pub nv_start: Option<f64>,
    pub nv_stop: Option<f64>,
    pub nv_points: Option<usize>,
}

impl RawConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("cannot parse config {}: {e}", path.display()))
    }

    pub fn interferometer(&self) -> Result<IfaceParams, String> {
        let r = &self.interferometer;
        Ok(IfaceParams {
            mass: r.mass.unwrap_or(1e-15),
            max_separation: r.max_separation.unwrap_or(20e-6),
            accel_time: r.accel_time.unwrap_or(0.5),
            hold_time: r.hold_time.unwrap_or(1.0),
            charge: r.charge.as_ref().map(charge_field).transpose()?.unwrap_or(0.0),
            dipole_moment: r.dipole.as_ref().map(dipole_field).transpose()?.unwrap_or(0.0),
            radius: r.radius.unwrap_or(1e-6),
            relative_permittivity: r.relative_permittivity.unwrap_or(5.7),
        })
    }

    pub fn particle(&self) -> Result<ParticleParams, String> {
        let r = &self.particle;
        Ok(ParticleParams {
            charge: r.charge.as_ref().map(charge_field).transpose()?.unwrap_or(0.0),
            dipole_moment: r.dipole.as_ref().map(dipole_field).transpose()?.unwrap_or(0.0),
            polarizability: r.polarizability.unwrap_or(0.0),
            mass: r.mass.unwrap_or(4.8e-26),
        })
    }

    pub fn encounter(&self) -> EncounterParams {
        let r = &self.encounter;
        EncounterParams {
            impact_parameter: r.impact_parameter.unwrap_or(1e-4),
            speed: r.speed.unwrap_or(1e-5),
            alpha: r.alpha.unwrap_or(0.0),
            beta: r.beta.unwrap_or(0.0),
            theta0: r.theta0.unwrap_or(0.0),
            gamma: r.gamma.unwrap_or(0.0),
            averaging_time: r.averaging_time,
        }
    }

    /// Gas section; `default_b_min` supplies the scenario convention when the
    /// file does not pin one (R for the neutral setup, 10³·R for the ions).
    pub fn gas(&self, default_b_min: f64) -> Result<GasParams, String> {
        let r = &self.gas;
        let chamber = r.chamber_size.unwrap_or(0.01);
        let temperature = r.temperature.unwrap_or(1e-4);
        let number_density = match (r.number_density, r.particle_count, r.pressure) {
            (Some(nv), _, _) => nv,
            (None, Some(n), _) => n / chamber.powi(3),
            (None, None, Some(p)) => p / (dephasim::constants::BOLTZMANN * temperature),
            _ => 1e10,
        };
        Ok(GasParams {
            chamber_size: chamber,
            temperature,
            gas_mass: r.gas_mass.unwrap_or(4.8e-26),
            number_density,
            b_min: r.b_min.unwrap_or(default_b_min),
        })
    }
}

/// Log- or linearly-spaced grid with `points >= 1` entries.
pub fn make_grid(start: f64, stop: f64, points: usize, log: bool) -> Result<Vec<f64>, String> {
    if points == 0 {
        return Err("grid needs at least one point".into());
    }
    if points == 1 {
        return Ok(vec![start]);
    }
    if log && (start <= 0.0 || stop <= 0.0) {
        return Err("log grid needs positive bounds".into());
    }
    Ok((0..points)
        .map(|i| {
            let f = i as f64 / (points - 1) as f64;
            if log {
                start * (stop / start).powf(f)
            } else {
                start + (stop - start) * f
            }
        })
        .collect())
}

/// The manifest written next to every output file.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub created: String,
    pub seed: Option<u64>,
    pub run: ResolvedRun,
    pub outputs: Vec<String>,
}
