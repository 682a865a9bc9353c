//! Configuration types shared by all modules.
//!
//! Everything is SI; dipole moments are magnitudes in C·m and charges are
//! magnitudes in C.  Signs of charges and dipoles never enter the dephasing
//! (it is quadratic in the coupling), so signed fields are not offered.

use crate::constants::{BOHR_MAGNETON, LANDE_G};
use crate::error::Error;
use crate::Result;
use std::f64::consts::TAU as TWO_PI;

/// Geometry, timing and electromagnetic properties of the interferometer
/// test particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerConfig {
    /// Test mass m (kg).
    pub mass: f64,
    /// Maximal arm separation Δx reached on the hold interval (m).
    pub max_separation: f64,
    /// Duration of one acceleration ramp t_a (s).
    pub accel_time: f64,
    /// Hold time t_e at maximal separation (s).
    pub hold_time: f64,
    /// Residual charge of the test particle (C); 0 for a neutral particle.
    pub charge: f64,
    /// Permanent dipole moment magnitude of the test particle (C·m); 0 if none.
    pub dipole_moment: f64,
    /// Radius of the (spherical) test particle (m).
    pub radius: f64,
    /// Relative permittivity ε_r of the test-particle material.
    pub relative_permittivity: f64,
}

impl InterferometerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::invalid("interferometer mass must satisfy m > 0"));
        }
        if !(self.max_separation.is_finite() && self.max_separation > 0.0) {
            return Err(Error::invalid("superposition size must satisfy Δx > 0"));
        }
        if !(self.accel_time.is_finite() && self.accel_time > 0.0) {
            return Err(Error::invalid("acceleration time must satisfy t_a > 0"));
        }
        if !(self.hold_time.is_finite() && self.hold_time >= 0.0) {
            return Err(Error::invalid("hold time must satisfy t_e >= 0"));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::invalid("test-particle radius must satisfy R > 0"));
        }
        if !(self.charge.is_finite() && self.charge >= 0.0) {
            return Err(Error::invalid("charge magnitude must be finite and >= 0"));
        }
        if !(self.dipole_moment.is_finite() && self.dipole_moment >= 0.0) {
            return Err(Error::invalid("dipole magnitude must be finite and >= 0"));
        }
        if !self.relative_permittivity.is_finite() {
            return Err(Error::invalid("relative permittivity must be finite"));
        }
        Ok(())
    }

    /// Total superposition time τ = 4 t_a + t_e.
    pub fn total_time(&self) -> f64 {
        4.0 * self.accel_time + self.hold_time
    }

    /// Frequency resolution of a single run, ω_min = 2π/τ.
    pub fn omega_min(&self) -> f64 {
        TWO_PI / self.total_time()
    }

    /// Relative (arm-to-arm) acceleration magnitude, Δx/t_a².
    pub fn relative_acceleration(&self) -> f64 {
        self.max_separation / (self.accel_time * self.accel_time)
    }

    /// Clausius–Mossotti factor (ε_r − 1)/(ε_r + 2) of the test material.
    pub fn clausius_mossotti(&self) -> f64 {
        (self.relative_permittivity - 1.0) / (self.relative_permittivity + 2.0)
    }

    /// Convenience constructor for a Stern-Gerlach split driven by a magnetic
    /// field gradient: each arm accelerates at g μ_B |∇B| / m, so the arms
    /// separate to Δx = 2 g μ_B |∇B| t_a² / m.
    #[allow(clippy::too_many_arguments)]
    pub fn from_magnetic_gradient(
        mass: f64,
        grad_b: f64,
        accel_time: f64,
        hold_time: f64,
        charge: f64,
        dipole_moment: f64,
        radius: f64,
        relative_permittivity: f64,
    ) -> Result<Self> {
        if !(grad_b.is_finite() && grad_b > 0.0) {
            return Err(Error::invalid("field gradient must satisfy |∇B| > 0"));
        }
        let arm_accel = LANDE_G * BOHR_MAGNETON * grad_b / mass;
        let cfg = Self {
            mass,
            max_separation: 2.0 * arm_accel * accel_time * accel_time,
            accel_time,
            hold_time,
            charge,
            dipole_moment,
            radius,
            relative_permittivity,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Electromagnetic properties of one environmental particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentParticle {
    /// Charge magnitude q_ext (C).
    pub charge: f64,
    /// Permanent dipole moment magnitude |d_ext| (C·m).
    pub dipole_moment: f64,
    /// Polarizability α_pol (A²·s⁴/kg; SI, i.e. 4πε₀ × the CGS volume).
    pub polarizability: f64,
    /// Particle mass (kg), used by the gas velocity distribution.
    pub mass: f64,
}

impl EnvironmentParticle {
    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.charge, "charge"),
            (self.dipole_moment, "dipole moment"),
            (self.polarizability, "polarizability"),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!(
                    "environment particle {name} must be finite and >= 0"
                )));
            }
        }
        if self.charge == 0.0 && self.dipole_moment == 0.0 && self.polarizability == 0.0 {
            return Err(Error::invalid(
                "environment particle needs a nonzero charge, dipole or polarizability",
            ));
        }
        if !(self.mass.is_finite() && self.mass >= 0.0) {
            return Err(Error::invalid("environment particle mass must be >= 0"));
        }
        Ok(())
    }
}

/// Kinematics of a single flyby.
///
/// `alpha`/`beta` project the impact-parameter and velocity vectors onto the
/// superposition axis x̂; `theta0`/`gamma` project them onto ẑ, the axis the
/// interferometer dipole is aligned with.  `averaging_time` is the window T
/// over which the phase noise is averaged (the PSD carries 1/T).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Encounter {
    /// Impact parameter b (m).
    pub impact_parameter: f64,
    /// Speed v (m/s).
    pub speed: f64,
    /// cos(α) = x₀/b projection angle (rad).
    pub alpha: f64,
    /// cos(β) = v_x/v projection angle (rad).
    pub beta: f64,
    /// cos(θ₀) = b_z/b projection angle (rad).
    pub theta0: f64,
    /// cos(γ) = v_z/v projection angle (rad).
    pub gamma: f64,
    /// Averaging time T (s).
    pub averaging_time: f64,
}

impl Encounter {
    pub fn validate(&self) -> Result<()> {
        if !(self.impact_parameter.is_finite() && self.impact_parameter > 0.0) {
            return Err(Error::invalid("impact parameter must satisfy b > 0"));
        }
        if !(self.speed.is_finite() && self.speed > 0.0) {
            return Err(Error::invalid("speed must be positive"));
        }
        if !(self.averaging_time.is_finite() && self.averaging_time > 0.0) {
            return Err(Error::invalid("averaging time must satisfy T > 0"));
        }
        for (a, name) in [
            (self.alpha, "alpha"),
            (self.beta, "beta"),
            (self.theta0, "theta0"),
            (self.gamma, "gamma"),
        ] {
            if !(a.is_finite() && (0.0..TWO_PI).contains(&a)) {
                return Err(Error::invalid(format!("angle {name} must lie in [0, 2π)")));
            }
        }
        Ok(())
    }

    /// Default averaging window T = b/v for a single flyby.
    pub fn flyby_window(impact_parameter: f64, speed: f64) -> f64 {
        impact_parameter / speed
    }
}

/// Distance r(t) = √(b² + (vt)²) between the interferometer centre of mass
/// and a straight-line flyby.
pub fn distance(impact_parameter: f64, speed: f64, t: f64) -> Result<f64> {
    if !(impact_parameter.is_finite() && impact_parameter > 0.0) {
        return Err(Error::invalid("impact parameter must satisfy b > 0"));
    }
    if !(speed.is_finite() && speed >= 0.0) {
        return Err(Error::invalid("speed must satisfy v >= 0"));
    }
    if !t.is_finite() {
        return Err(Error::invalid("time must be finite"));
    }
    Ok(impact_parameter.hypot(speed * t))
}

/// The six electromagnetic interaction channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InteractionChannel {
    /// Charged interferometer, charged environment particle (cc).
    ChargeCharge,
    /// Charged interferometer, permanent external dipole (cd(p)).
    ChargePermanentDipole,
    /// Charged interferometer, dipole it induces in the environment particle (cd(i)).
    ChargeInducedDipole,
    /// Permanent interferometer dipole, charged environment particle (d(p)c).
    PermanentDipoleCharge,
    /// Dipole induced in the interferometer by the external charge (d(i)c).
    InducedDipoleCharge,
    /// Permanent dipoles on both sides (dd).
    DipoleDipole,
}

impl InteractionChannel {
    pub const ALL: [InteractionChannel; 6] = [
        InteractionChannel::ChargeCharge,
        InteractionChannel::ChargePermanentDipole,
        InteractionChannel::ChargeInducedDipole,
        InteractionChannel::PermanentDipoleCharge,
        InteractionChannel::InducedDipoleCharge,
        InteractionChannel::DipoleDipole,
    ];

    /// Short tag used on the command line and in output files.
    pub fn tag(&self) -> &'static str {
        match self {
            InteractionChannel::ChargeCharge => "cc",
            InteractionChannel::ChargePermanentDipole => "cdp",
            InteractionChannel::ChargeInducedDipole => "cdi",
            InteractionChannel::PermanentDipoleCharge => "dpc",
            InteractionChannel::InducedDipoleCharge => "dic",
            InteractionChannel::DipoleDipole => "dd",
        }
    }

    /// Whether the channel couples through the ẑ-projection angles θ₀ (and,
    /// for d(p)c, γ).
    pub fn uses_z_angles(&self) -> bool {
        matches!(
            self,
            InteractionChannel::PermanentDipoleCharge | InteractionChannel::DipoleDipole
        )
    }

    /// Check that the interferometer and particle actually support this
    /// coupling (e.g. cc needs charges on both sides).
    pub fn check_compatible(
        &self,
        interferometer: &InterferometerConfig,
        particle: &EnvironmentParticle,
    ) -> Result<()> {
        let fail = |msg: &str| Err(Error::invalid(msg.to_string()));
        match self {
            InteractionChannel::ChargeCharge => {
                if interferometer.charge == 0.0 {
                    return fail("channel cc requires a charged interferometer (q_int != 0)");
                }
                if particle.charge == 0.0 {
                    return fail("channel cc requires a charged environment particle (q_ext != 0)");
                }
            }
            InteractionChannel::ChargePermanentDipole => {
                if interferometer.charge == 0.0 {
                    return fail("channel cdp requires a charged interferometer (q_int != 0)");
                }
                if particle.dipole_moment == 0.0 {
                    return fail("channel cdp requires an external dipole (|d_ext| != 0)");
                }
            }
            InteractionChannel::ChargeInducedDipole => {
                if interferometer.charge == 0.0 {
                    return fail("channel cdi requires a charged interferometer (q_int != 0)");
                }
                if particle.polarizability == 0.0 {
                    return fail("channel cdi requires a polarizable environment particle");
                }
            }
            InteractionChannel::PermanentDipoleCharge => {
                if interferometer.dipole_moment == 0.0 {
                    return fail("channel dpc requires an interferometer dipole (|d_int| != 0)");
                }
                if particle.charge == 0.0 {
                    return fail("channel dpc requires a charged environment particle (q_ext != 0)");
                }
            }
            InteractionChannel::InducedDipoleCharge => {
                if interferometer.relative_permittivity <= 1.0 {
                    return fail("channel dic requires relative permittivity ε_r > 1");
                }
                if interferometer.radius <= 0.0 {
                    return fail("channel dic requires a positive test-particle radius");
                }
                if particle.charge == 0.0 {
                    return fail("channel dic requires a charged environment particle (q_ext != 0)");
                }
            }
            InteractionChannel::DipoleDipole => {
                if interferometer.dipole_moment == 0.0 {
                    return fail("channel dd requires an interferometer dipole (|d_int| != 0)");
                }
                if particle.dipole_moment == 0.0 {
                    return fail("channel dd requires an external dipole (|d_ext| != 0)");
                }
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for InteractionChannel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cc" => Ok(InteractionChannel::ChargeCharge),
            "cdp" | "cd(p)" => Ok(InteractionChannel::ChargePermanentDipole),
            "cdi" | "cd(i)" => Ok(InteractionChannel::ChargeInducedDipole),
            "dpc" | "d(p)c" => Ok(InteractionChannel::PermanentDipoleCharge),
            "dic" | "d(i)c" => Ok(InteractionChannel::InducedDipoleCharge),
            "dd" => Ok(InteractionChannel::DipoleDipole),
            other => Err(Error::invalid(format!(
                "unknown channel tag '{other}' (expected cc, cdp, cdi, dpc, dic or dd)"
            ))),
        }
    }
}

impl std::fmt::Display for InteractionChannel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}
