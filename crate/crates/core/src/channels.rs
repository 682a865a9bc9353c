//! Per-channel flyby accelerations, their Fourier transforms and
//! single-encounter acceleration-noise PSDs.
//!
//! Every channel's x̂-acceleration has the form
//!
//! ```text
//! a_x(t) = A(b) · N(α, β[, θ₀, γ]; u) / (1 + u²)^p ,   u = v t / b ,
//! ```
//!
//! and its continuous Fourier transform a(ω) = ∫ a(t) e^{−iωt} dt is a
//! combination of modified Bessel functions of x = bω/v.  The PSD of one
//! encounter is |a(ω)|²/T with T the averaging window.
//!
//! The transforms below are the full-line Fourier integrals, normalised so
//! that a discrete Fourier transform of the sampled a_x(t) reproduces them
//! directly (see the spectrum-equivalence tests).

use crate::config::{Encounter, EnvironmentParticle, InteractionChannel, InterferometerConfig};
use crate::constants::VACUUM_PERMITTIVITY;
use crate::error::Error;
use crate::specfun::{bessel_k, bessel_k_large, bessel_k_small, BesselOrder, UNDERFLOW_ARGUMENT};
use crate::Result;
use std::f64::consts::PI;

/// Everything needed to evaluate one channel for one encounter.
#[derive(Debug, Clone, Copy)]
pub struct ChannelParams {
    pub channel: InteractionChannel,
    pub interferometer: InterferometerConfig,
    pub particle: EnvironmentParticle,
    pub encounter: Encounter,
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        self.interferometer.validate()?;
        self.particle.validate()?;
        self.encounter.validate()?;
        self.channel
            .check_compatible(&self.interferometer, &self.particle)
    }
}

/// Complex value of the acceleration spectrum a(ω), units m/(s²·Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumValue {
    pub real_part: f64,
    pub imag_part: f64,
    /// Set when the Bessel argument exceeded the f64 range and the value is
    /// an exact zero.
    pub underflowed: bool,
}

impl SpectrumValue {
    pub fn abs_squared(&self) -> f64 {
        self.real_part * self.real_part + self.imag_part * self.imag_part
    }
}

/// Leading dimensional amplitude of each channel.  For dd this is the base
/// without the cos(θ₀) orientation factor, which callers apply themselves.
fn amplitude(
    channel: InteractionChannel,
    iface: &InterferometerConfig,
    particle: &EnvironmentParticle,
    b: f64,
) -> f64 {
    let eps0 = VACUUM_PERMITTIVITY;
    let m = iface.mass;
    match channel {
        InteractionChannel::ChargeCharge => {
            iface.charge * particle.charge / (4.0 * PI * eps0 * m * b * b)
        }
        InteractionChannel::ChargePermanentDipole => {
            iface.charge * particle.dipole_moment / (2.0 * PI * eps0 * m * b.powi(3))
        }
        InteractionChannel::ChargeInducedDipole => {
            iface.charge * iface.charge * particle.polarizability
                / (8.0 * PI * PI * eps0 * eps0 * m * b.powi(5))
        }
        InteractionChannel::PermanentDipoleCharge => {
            particle.charge * iface.dipole_moment / (2.0 * PI * eps0 * m * b.powi(3))
        }
        InteractionChannel::InducedDipoleCharge => {
            iface.clausius_mossotti() * particle.charge * particle.charge * iface.radius.powi(3)
                / (2.0 * PI * eps0 * m * b.powi(5))
        }
        InteractionChannel::DipoleDipole => {
            3.0 * particle.dipole_moment * iface.dipole_moment
                / (2.0 * PI * eps0 * m * b.powi(4))
        }
    }
}

/// Power of (1 + u²) in the denominator of the time-domain acceleration.
fn envelope_power(channel: InteractionChannel) -> f64 {
    match channel {
        InteractionChannel::ChargeCharge => 1.5,
        InteractionChannel::ChargePermanentDipole => 2.0,
        InteractionChannel::ChargeInducedDipole | InteractionChannel::InducedDipoleCharge => 3.0,
        InteractionChannel::PermanentDipoleCharge | InteractionChannel::DipoleDipole => 2.5,
    }
}

/// x̂-component of the flyby acceleration at time t (m/s²), t = 0 being the
/// point of closest approach.
pub fn acceleration_time(p: &ChannelParams, t: f64) -> Result<f64> {
    p.validate()?;
    if !t.is_finite() {
        return Err(Error::invalid("time must be finite"));
    }
    let e = &p.encounter;
    let u = e.speed * t / e.impact_parameter;
    let den = (1.0 + u * u).powf(envelope_power(p.channel));
    let core = e.alpha.cos() + u * e.beta.cos();
    let amp = amplitude(p.channel, &p.interferometer, &p.particle, e.impact_parameter);
    let orient = match p.channel {
        InteractionChannel::PermanentDipoleCharge => e.theta0.cos() + u * e.gamma.cos(),
        InteractionChannel::DipoleDipole => e.theta0.cos(),
        _ => 1.0,
    };
    Ok(amp * core * orient / den)
}

/// Continuous Fourier transform a(ω) of the flyby acceleration, ω > 0.
pub fn acceleration_spectrum(p: &ChannelParams, omega: f64) -> Result<SpectrumValue> {
    p.validate()?;
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::invalid("spectrum requires ω > 0"));
    }
    let e = &p.encounter;
    let b = e.impact_parameter;
    let v = e.speed;
    let x = b * omega / v;
    if x > UNDERFLOW_ARGUMENT {
        return Ok(SpectrumValue {
            real_part: 0.0,
            imag_part: 0.0,
            underflowed: true,
        });
    }
    let (ca, cb) = (e.alpha.cos(), e.beta.cos());
    let amp = amplitude(p.channel, &p.interferometer, &p.particle, b) * b / v;
    let k = |o: BesselOrder| bessel_k(o, x).map(|r| r.value);

    let (re, im) = match p.channel {
        InteractionChannel::ChargeCharge => {
            let transform = 2.0 * x;
            (
                transform * ca * k(BesselOrder::ONE)?,
                -transform * cb * k(BesselOrder::ZERO)?,
            )
        }
        InteractionChannel::ChargePermanentDipole => {
            let transform = 2.0 * PI.sqrt() * (0.5 * x).powf(1.5);
            (
                transform * ca * k(BesselOrder::THREE_HALVES)?,
                -transform * cb * k(BesselOrder::HALF)?,
            )
        }
        InteractionChannel::ChargeInducedDipole | InteractionChannel::InducedDipoleCharge => {
            let transform = PI.sqrt() * (0.5 * x).powf(2.5);
            (
                transform * ca * k(BesselOrder::FIVE_HALVES)?,
                -transform * cb * k(BesselOrder::THREE_HALVES)?,
            )
        }
        InteractionChannel::DipoleDipole => {
            let transform = e.theta0.cos() * (2.0 / 3.0) * x * x;
            (
                transform * ca * k(BesselOrder::TWO)?,
                -transform * cb * k(BesselOrder::ONE)?,
            )
        }
        InteractionChannel::PermanentDipoleCharge => {
            let (cth, cg) = (e.theta0.cos(), e.gamma.cos());
            let transform = (2.0 / 3.0) * x * x;
            let k0 = k(BesselOrder::ZERO)?;
            let k1 = k(BesselOrder::ONE)?;
            let k2 = k(BesselOrder::TWO)?;
            (
                transform * (ca * cth * k2 + cb * cg * (k1 / x - k0)),
                -transform * (ca * cg + cb * cth) * k1,
            )
        }
    };
    Ok(SpectrumValue {
        real_part: amp * re,
        imag_part: amp * im,
        underflowed: false,
    })
}

/// Single-encounter acceleration-noise PSD S_aa(ω) = |a(ω)|²/T.
pub fn encounter_psd(p: &ChannelParams, omega: f64) -> Result<f64> {
    let spectrum = acceleration_spectrum(p, omega)?;
    Ok(spectrum.abs_squared() / p.encounter.averaging_time)
}

/// How K_ν is evaluated inside ensemble integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselMode {
    Exact,
    /// K_n(u) → (Γ(n)/2)(2/u)^n; rejected for channels containing K₀.
    SmallArgument,
    /// K_ν(u) → e^{−u} √(π/2u); requires u ≥ 1.
    LargeArgument,
}

/// How the ẑ-projection angles are treated when averaging over orientations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaAveraging {
    /// cos θ₀ = √(1 − cos²α), cos γ = √(1 − cos²β); averaged jointly with α, β.
    Coupled,
    /// θ₀ and γ held fixed; only α and β are averaged.
    Fixed { theta0: f64, gamma: f64 },
}

fn k_by_mode(order: BesselOrder, x: f64, mode: BesselMode) -> Result<f64> {
    match mode {
        BesselMode::Exact => Ok(bessel_k(order, x)?.value),
        BesselMode::SmallArgument => {
            let n = order.as_f64();
            if n == 0.0 {
                return Err(Error::RegimeViolation(
                    "small-argument rule is undefined for K₀ (order n must be > 0)".into(),
                ));
            }
            bessel_k_small(n, x)
        }
        BesselMode::LargeArgument => bessel_k_large(x),
    }
}

/// |a(ω)|² averaged over the uniform projection angles α, β (and, per
/// `theta`, over θ₀ and γ), for one (b, v).  Divide by T for the PSD.
///
/// cos² terms average to 1/2; cross terms vanish; the coupled ẑ-angle
/// moments are ⟨cos²θ₀ cos²α⟩ = 1/8 and ⟨cos²θ₀⟩ = ⟨cos²γ⟩ = 1/2.
#[allow(clippy::too_many_arguments)]
pub fn angle_averaged_spectrum_abs2(
    channel: InteractionChannel,
    iface: &InterferometerConfig,
    particle: &EnvironmentParticle,
    b: f64,
    v: f64,
    omega: f64,
    theta: ThetaAveraging,
    mode: BesselMode,
) -> Result<f64> {
    if !(b > 0.0 && v > 0.0 && omega > 0.0) {
        return Err(Error::invalid("averaged spectrum requires b, v, ω > 0"));
    }
    let x = b * omega / v;
    if x > UNDERFLOW_ARGUMENT {
        return Ok(0.0);
    }
    let amp = amplitude(channel, iface, particle, b) * b / v;
    let k = |o: BesselOrder| k_by_mode(o, x, mode);

    let value = match channel {
        InteractionChannel::ChargeCharge => {
            let p = amp * 2.0 * x;
            let (k0, k1) = (k(BesselOrder::ZERO)?, k(BesselOrder::ONE)?);
            p * p * 0.5 * (k1 * k1 + k0 * k0)
        }
        InteractionChannel::ChargePermanentDipole => {
            let p = amp * 2.0 * PI.sqrt() * (0.5 * x).powf(1.5);
            let (kh, k3h) = (k(BesselOrder::HALF)?, k(BesselOrder::THREE_HALVES)?);
            p * p * 0.5 * (k3h * k3h + kh * kh)
        }
        InteractionChannel::ChargeInducedDipole | InteractionChannel::InducedDipoleCharge => {
            let p = amp * PI.sqrt() * (0.5 * x).powf(2.5);
            let (k3h, k5h) = (k(BesselOrder::THREE_HALVES)?, k(BesselOrder::FIVE_HALVES)?);
            p * p * 0.5 * (k5h * k5h + k3h * k3h)
        }
        InteractionChannel::DipoleDipole => {
            let p = amp * (2.0 / 3.0) * x * x;
            let (k1, k2) = (k(BesselOrder::ONE)?, k(BesselOrder::TWO)?);
            let (m2, m1) = match theta {
                ThetaAveraging::Coupled => (0.125, 0.25),
                ThetaAveraging::Fixed { theta0, .. } => {
                    let c2 = theta0.cos().powi(2);
                    (0.5 * c2, 0.5 * c2)
                }
            };
            p * p * (m2 * k2 * k2 + m1 * k1 * k1)
        }
        InteractionChannel::PermanentDipoleCharge => {
            let p = amp * (2.0 / 3.0) * x * x;
            let k0 = k(BesselOrder::ZERO)?;
            let k1 = k(BesselOrder::ONE)?;
            let k2 = k(BesselOrder::TWO)?;
            let cross = k1 / x - k0;
            match theta {
                ThetaAveraging::Coupled => {
                    p * p * (k2 * k2 / 8.0 + cross * cross / 8.0 + 0.5 * k1 * k1)
                }
                ThetaAveraging::Fixed { theta0, gamma } => {
                    let (ct2, cg2) = (theta0.cos().powi(2), gamma.cos().powi(2));
                    p * p
                        * (0.5 * (ct2 * k2 * k2 + cg2 * cross * cross)
                            + 0.5 * (ct2 + cg2) * k1 * k1)
                }
            }
        }
    };
    Ok(value)
}

/// Result of the projection-angle maximisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalAngles {
    pub alpha: f64,
    pub beta: f64,
    pub theta0: Option<f64>,
    pub gamma: Option<f64>,
    /// |shape| at the optimum (dimensionless, prefactors stripped).
    pub magnitude: f64,
}

/// Dimensionless acceleration shape whose magnitude the optimiser maximises.
pub fn angle_shape(channel: InteractionChannel, u: f64, alpha: f64, beta: f64) -> f64 {
    let core = alpha.cos() + u * beta.cos();
    let den = (1.0 + u * u).powf(envelope_power(channel));
    match channel {
        InteractionChannel::PermanentDipoleCharge => {
            let cth = (1.0 - alpha.cos().powi(2)).max(0.0).sqrt();
            let cg = (1.0 - beta.cos().powi(2)).max(0.0).sqrt();
            core * (cth + u * cg) / den
        }
        InteractionChannel::DipoleDipole => {
            let cth = (1.0 - alpha.cos().powi(2)).max(0.0).sqrt();
            core * cth / den
        }
        _ => core / den,
    }
}

/// Grid search (181×181 over [0, π]², one local refinement) for the angles
/// that maximise |a_x| at fixed u = vt/b.  For d(p)c and dd the ẑ-angles are
/// tied to α and β through cos θ₀ = √(1 − cos²α), cos γ = √(1 − cos²β).
/// Ties resolve to the smallest angles.
pub fn optimal_angles(channel: InteractionChannel, u: f64) -> Result<OptimalAngles> {
    if !(u.is_finite() && u > 0.0) {
        return Err(Error::invalid("angle optimisation requires u > 0"));
    }
    let coarse = 181;
    let step = PI / (coarse - 1) as f64;
    let (mut best_a, mut best_b, mut best_val) = (0.0, 0.0, f64::NEG_INFINITY);

    let row_best: Vec<(f64, f64, f64)> = {
        use rayon::prelude::*;
        (0..coarse)
            .into_par_iter()
            .map(|i| {
                let alpha = i as f64 * step;
                let mut local = (alpha, 0.0, f64::NEG_INFINITY);
                for j in 0..coarse {
                    let beta = j as f64 * step;
                    let val = angle_shape(channel, u, alpha, beta).abs();
                    if val > local.2 {
                        local = (alpha, beta, val);
                    }
                }
                local
            })
            .collect()
    };
    for (a, b, v) in row_best {
        if v > best_val {
            (best_a, best_b, best_val) = (a, b, v);
        }
    }

    // One refinement pass around the coarse optimum.
    let fine = 41;
    let fine_step = 2.0 * step / (fine - 1) as f64;
    let (a0, b0) = (best_a - step, best_b - step);
    for i in 0..fine {
        let alpha = (a0 + i as f64 * fine_step).clamp(0.0, PI);
        for j in 0..fine {
            let beta = (b0 + j as f64 * fine_step).clamp(0.0, PI);
            let val = angle_shape(channel, u, alpha, beta).abs();
            if val > best_val {
                (best_a, best_b, best_val) = (alpha, beta, val);
            }
        }
    }

    let (theta0, gamma) = match channel {
        InteractionChannel::PermanentDipoleCharge => (
            Some((1.0 - best_a.cos().powi(2)).max(0.0).sqrt().acos()),
            Some((1.0 - best_b.cos().powi(2)).max(0.0).sqrt().acos()),
        ),
        InteractionChannel::DipoleDipole => (
            Some((1.0 - best_a.cos().powi(2)).max(0.0).sqrt().acos()),
            None,
        ),
        _ => (None, None),
    };
    Ok(OptimalAngles {
        alpha: best_a,
        beta: best_b,
        theta0,
        gamma,
        magnitude: best_val,
    })
}
