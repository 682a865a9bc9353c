//! Python bindings exposing the main types and operations: channel
//! dephasing, the transfer function, Bessel helpers, ensemble scenarios and
//! the witness algebra.
//!
//! Build with `cargo build -p dephasim-py --release`; `python/smoke.py`
//! shows how to load and exercise the module.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dephasim::channels::{self, ChannelParams};
use dephasim::config::{Encounter, EnvironmentParticle, InteractionChannel, InterferometerConfig};
use dephasim::dephasing as dephasing_mod;
use dephasim::dephasing::QuadratureSettings;
use dephasim::ensemble::{self, ScenarioOptions};
use dephasim::oracle;
use dephasim::specfun::{self, BesselOrder};
use dephasim::trajectory;
use dephasim::witness;

fn err(e: dephasim::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Interferometer geometry, timing and couplings (SI units).
#[pyclass(name = "Interferometer")]
struct PyInterferometer {
    inner: InterferometerConfig,
}

#[pymethods]
impl PyInterferometer {
    #[new]
    #[pyo3(signature = (mass, max_separation, accel_time, hold_time,
                        charge=0.0, dipole_moment=0.0, radius=1e-6,
                        relative_permittivity=5.7))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        mass: f64,
        max_separation: f64,
        accel_time: f64,
        hold_time: f64,
        charge: f64,
        dipole_moment: f64,
        radius: f64,
        relative_permittivity: f64,
    ) -> PyResult<Self> {
        let inner = InterferometerConfig {
            mass,
            max_separation,
            accel_time,
            hold_time,
            charge,
            dipole_moment,
            radius,
            relative_permittivity,
        };
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    /// Total superposition time τ = 4 t_a + t_e.
    fn total_time(&self) -> f64 {
        self.inner.total_time()
    }

    fn omega_min(&self) -> f64 {
        self.inner.omega_min()
    }

    /// Arm separation x_R − x_L at time t.
    fn arm_separation(&self, t: f64) -> PyResult<f64> {
        trajectory::arm_separation(&self.inner, t).map_err(err)
    }

    /// Transfer function F(ω) (m²·s²).
    fn transfer_function(&self, omega: f64) -> PyResult<f64> {
        trajectory::transfer_function(&self.inner, omega).map_err(err)
    }
}

/// Environmental particle couplings (SI units).
#[pyclass(name = "Particle")]
struct PyParticle {
    inner: EnvironmentParticle,
}

#[pymethods]
impl PyParticle {
    #[new]
    #[pyo3(signature = (charge=0.0, dipole_moment=0.0, polarizability=0.0, mass=4.8e-26))]
    fn new(charge: f64, dipole_moment: f64, polarizability: f64, mass: f64) -> PyResult<Self> {
        let inner = EnvironmentParticle {
            charge,
            dipole_moment,
            polarizability,
            mass,
        };
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }
}

/// One flyby: impact parameter, speed, projection angles, averaging window.
#[pyclass(name = "Encounter")]
struct PyEncounter {
    inner: Encounter,
}

#[pymethods]
impl PyEncounter {
    #[new]
    #[pyo3(signature = (impact_parameter, speed, alpha=0.0, beta=0.0,
                        theta0=0.0, gamma=0.0, averaging_time=None))]
    fn new(
        impact_parameter: f64,
        speed: f64,
        alpha: f64,
        beta: f64,
        theta0: f64,
        gamma: f64,
        averaging_time: Option<f64>,
    ) -> PyResult<Self> {
        let inner = Encounter {
            impact_parameter,
            speed,
            alpha,
            beta,
            theta0,
            gamma,
            averaging_time: averaging_time.unwrap_or(impact_parameter / speed),
        };
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }
}

fn build_params(
    channel: &str,
    interferometer: &PyInterferometer,
    particle: &PyParticle,
    encounter: &PyEncounter,
) -> PyResult<ChannelParams> {
    let channel: InteractionChannel = channel.parse().map_err(err)?;
    let p = ChannelParams {
        channel,
        interferometer: interferometer.inner,
        particle: particle.inner,
        encounter: encounter.inner,
    };
    p.validate().map_err(err)?;
    Ok(p)
}

/// Modified Bessel function K_ν(u), ν = twice_order/2; returns
/// (value, underflowed).
#[pyfunction]
fn bessel_k(twice_order: u8, u: f64) -> PyResult<(f64, bool)> {
    let order = BesselOrder::new(twice_order).map_err(err)?;
    let r = specfun::bessel_k(order, u).map_err(err)?;
    Ok((r.value, r.underflowed))
}

/// Flyby acceleration a_x(t) (m/s²).
#[pyfunction]
fn acceleration_time(
    channel: &str,
    interferometer: &PyInterferometer,
    particle: &PyParticle,
    encounter: &PyEncounter,
    t: f64,
) -> PyResult<f64> {
    let p = build_params(channel, interferometer, particle, encounter)?;
    channels::acceleration_time(&p, t).map_err(err)
}

/// Single-encounter acceleration-noise PSD S_aa(ω).
#[pyfunction]
fn encounter_psd(
    channel: &str,
    interferometer: &PyInterferometer,
    particle: &PyParticle,
    encounter: &PyEncounter,
    omega: f64,
) -> PyResult<f64> {
    let p = build_params(channel, interferometer, particle, encounter)?;
    channels::encounter_psd(&p, omega).map_err(err)
}

/// Dephasing Γₙ of one flyby; returns a dict with diagnostics.
#[pyfunction]
#[pyo3(signature = (channel, interferometer, particle, encounter, tolerance=1e-6))]
fn dephasing<'py>(
    py: Python<'py>,
    channel: &str,
    interferometer: &PyInterferometer,
    particle: &PyParticle,
    encounter: &PyEncounter,
    tolerance: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let p = build_params(channel, interferometer, particle, encounter)?;
    let settings = QuadratureSettings {
        relative_tolerance: tolerance,
        ..Default::default()
    };
    let r = dephasing_mod::dephasing(&p, &settings).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("gamma_n", r.gamma_n)?;
    d.set_item("estimated_error", r.estimated_error)?;
    d.set_item("omega_min", r.omega_min)?;
    d.set_item("omega_max", r.omega_max)?;
    d.set_item("panels", r.panels)?;
    d.set_item("warnings", r.warnings)?;
    Ok(d)
}

/// Single-bin estimate at ω_min.
#[pyfunction]
fn dominant_mode_dephasing(
    channel: &str,
    interferometer: &PyInterferometer,
    particle: &PyParticle,
    encounter: &PyEncounter,
) -> PyResult<f64> {
    let p = build_params(channel, interferometer, particle, encounter)?;
    dephasing_mod::dominant_mode_dephasing(&p).map_err(err)
}

/// Gas-averaged dephasing for the neutral two-interferometer scenario.
#[pyfunction]
#[pyo3(signature = (interferometer, particle, number_density, chamber_size,
                    gas_temperature, gas_mass, b_min, channel="dd",
                    exact_bessel=false))]
#[allow(clippy::too_many_arguments)]
fn qgem_ensemble_dephasing(
    interferometer: &PyInterferometer,
    particle: &PyParticle,
    number_density: f64,
    chamber_size: f64,
    gas_temperature: f64,
    gas_mass: f64,
    b_min: f64,
    channel: &str,
    exact_bessel: bool,
) -> PyResult<f64> {
    let gas = ensemble::GasEnsemble::from_number_density(
        number_density,
        chamber_size,
        gas_temperature,
        gas_mass,
        b_min,
    )
    .map_err(err)?;
    let opts = ScenarioOptions {
        exact_bessel,
        channel: channel.parse().map_err(err)?,
        ..Default::default()
    };
    Ok(
        ensemble::qgem_ensemble_dephasing(&gas, &interferometer.inner, &particle.inner, &opts)
            .map_err(err)?
            .gamma_n,
    )
}

/// Gas-averaged charge-charge dephasing for the trapped-ion scenario.
#[pyfunction]
#[pyo3(signature = (interferometer, particle, number_density, chamber_size,
                    gas_temperature, gas_mass, b_min, exact_bessel=false))]
#[allow(clippy::too_many_arguments)]
fn cnot_ensemble_dephasing(
    interferometer: &PyInterferometer,
    particle: &PyParticle,
    number_density: f64,
    chamber_size: f64,
    gas_temperature: f64,
    gas_mass: f64,
    b_min: f64,
    exact_bessel: bool,
) -> PyResult<f64> {
    let gas = ensemble::GasEnsemble::from_number_density(
        number_density,
        chamber_size,
        gas_temperature,
        gas_mass,
        b_min,
    )
    .map_err(err)?;
    let opts = ScenarioOptions {
        exact_bessel,
        ..Default::default()
    };
    Ok(
        ensemble::cnot_ensemble_dephasing(&gas, &interferometer.inner, &particle.inner, &opts)
            .map_err(err)?
            .gamma_n,
    )
}

/// PPT witness expectation ⟨W⟩(Δφ, Γₙ).
#[pyfunction]
fn witness_expectation(delta_phi: f64, gamma_n: f64) -> PyResult<f64> {
    witness::witness_expectation(delta_phi, gamma_n).map_err(err)
}

/// (detectable, witness_value, threshold_margin).
#[pyfunction]
fn detectable(delta_phi: f64, gamma_n: f64) -> PyResult<(bool, f64, f64)> {
    let d = witness::detectable(delta_phi, gamma_n).map_err(err)?;
    Ok((d.detectable, d.witness_value, d.threshold_margin))
}

/// Entangling phases (φ, Δφ) for two interferometers at separation d;
/// coupling "gravitational" uses the interferometer mass, "coulomb" the
/// charges q1, q2.
#[pyfunction]
#[pyo3(signature = (interferometer, separation, coupling="gravitational", q1=None, q2=None))]
fn entangling_phases(
    interferometer: &PyInterferometer,
    separation: f64,
    coupling: &str,
    q1: Option<f64>,
    q2: Option<f64>,
) -> PyResult<(f64, f64)> {
    let coupling = match coupling {
        "gravitational" => witness::Coupling::Gravitational {
            mass: interferometer.inner.mass,
        },
        "coulomb" => witness::Coupling::Coulomb {
            q1: q1.unwrap_or(interferometer.inner.charge),
            q2: q2.unwrap_or(interferometer.inner.charge),
        },
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown coupling '{other}' (gravitational or coulomb)"
            )))
        }
    };
    let ph = witness::entangling_phases(coupling, separation, &interferometer.inner).map_err(err)?;
    Ok((ph.phi, ph.delta_phi))
}

/// Time-domain Monte Carlo variance of δφ; returns a dict.
#[pyfunction]
#[pyo3(signature = (channel, interferometer, particle, encounter, realizations=1000, seed=0))]
fn phase_noise_mc<'py>(
    py: Python<'py>,
    channel: &str,
    interferometer: &PyInterferometer,
    particle: &PyParticle,
    encounter: &PyEncounter,
    realizations: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let p = build_params(channel, interferometer, particle, encounter)?;
    let est = oracle::phase_noise_mc(&p, realizations, seed).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("variance", est.variance)?;
    d.set_item("variance_std_error", est.variance_std_error)?;
    d.set_item("mean", est.mean)?;
    d.set_item("realizations", est.realizations)?;
    d.set_item("dt", est.dt)?;
    d.set_item("window", est.window)?;
    Ok(d)
}

/// Projection angles maximising |a_x| at u = vt/b; returns (alpha, beta).
#[pyfunction]
fn optimal_angles(channel: &str, u: f64) -> PyResult<(f64, f64)> {
    let ch: InteractionChannel = channel.parse().map_err(err)?;
    let best = channels::optimal_angles(ch, u).map_err(err)?;
    Ok((best.alpha, best.beta))
}

#[pymodule]
fn dephasim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInterferometer>()?;
    m.add_class::<PyParticle>()?;
    m.add_class::<PyEncounter>()?;
    m.add_function(wrap_pyfunction!(bessel_k, m)?)?;
    m.add_function(wrap_pyfunction!(acceleration_time, m)?)?;
    m.add_function(wrap_pyfunction!(encounter_psd, m)?)?;
    m.add_function(wrap_pyfunction!(dephasing, m)?)?;
    m.add_function(wrap_pyfunction!(dominant_mode_dephasing, m)?)?;
    m.add_function(wrap_pyfunction!(qgem_ensemble_dephasing, m)?)?;
    m.add_function(wrap_pyfunction!(cnot_ensemble_dephasing, m)?)?;
    m.add_function(wrap_pyfunction!(witness_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(detectable, m)?)?;
    m.add_function(wrap_pyfunction!(entangling_phases, m)?)?;
    m.add_function(wrap_pyfunction!(phase_noise_mc, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_angles, m)?)?;
    m.add("ELEMENTARY_CHARGE", dephasim::constants::ELEMENTARY_CHARGE)?;
    m.add("E_MICROMETRE", dephasim::constants::E_MICROMETRE)?;
    Ok(())
}
