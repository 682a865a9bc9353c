//! Independent time-domain validation of the frequency-domain machinery.
//!
//! One realization drops an encounter at a random arrival offset t₀ and
//! accumulates the phase kick
//!
//! ```text
//! δφ = (m/ħ) ∫₀^τ a(t − t₀) s(t) dt
//! ```
//!
//! by trapezoid quadrature on the piecewise-exact arm separation s(t).  The
//! sample variance over uniformly distributed t₀ converges (by the
//! Parseval/stationarisation identity) to the two-sided fold of the spectral
//! integral,
//!
//! ```text
//! Var[δφ] → (1/π) (m/ħ)² ∫₀^∞ S_aa(ω) F(ω) dω ,    S_aa = |a(ω)|²/T ,
//! ```
//!
//! with T the width of the t₀ window.  Note the band: the time-domain
//! variance has no infrared cutoff, while the dephasing Γₙ of the
//! frequency-domain engine starts at ω_min = 2π/τ.  For slow encounters
//! (b ω_min/v ≫ 1) nearly all of the raw variance lives below ω_min, so the
//! meaningful cross-check — the one run by the acceptance suite — compares
//! against the full-band spectral integral.  [`full_band_reference`]
//! computes it.

use crate::channels::{acceleration_time, encounter_psd, ChannelParams};
use crate::config::InteractionChannel;
use crate::constants::REDUCED_PLANCK;
use crate::dephasing::{integrate_gamma, QuadratureSettings};
use crate::ensemble::{GasEnsemble, VelocityModel};
use crate::error::Error;
use crate::trajectory::arm_separation;
use crate::Result;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One sampled noise realization.
#[derive(Debug, Clone)]
pub struct NoiseRealization {
    /// Arrival offset of the closest approach relative to the run start (s).
    pub arrival_offset: f64,
    /// Acceleration samples a(tᵢ − t₀) on the uniform run grid (m/s²).
    pub acceleration: Vec<f64>,
    /// Accumulated phase kick (rad).
    pub delta_phi: f64,
}

/// Monte Carlo estimate of the δφ statistics.
#[derive(Debug, Clone, Copy)]
pub struct PhaseNoiseEstimate {
    /// Unbiased sample variance of δφ.
    pub variance: f64,
    /// Standard error of the variance estimate (moment-based).
    pub variance_std_error: f64,
    pub mean: f64,
    pub mean_std_error: f64,
    pub realizations: usize,
    /// Grid step used for the time integral (s).
    pub dt: f64,
    /// Width of the t₀ window (s).
    pub window: f64,
}

/// Grid step satisfying both resolution rules: dt ≤ t_a/100 and
/// dt ≤ b/(100 v), then refined until a probe δφ is stable to 0.1 %.
fn resolve_dt(p: &ChannelParams) -> Result<f64> {
    let ta = p.interferometer.accel_time;
    let b_over_v = p.encounter.impact_parameter / p.encounter.speed;
    let mut dt = (ta / 100.0).min(b_over_v / 100.0);
    let tau = p.interferometer.total_time();
    if tau / dt > 5e7 {
        return Err(Error::Undersampled(format!(
            "dt = {dt:.3e} s needs more than 5e7 nodes over τ = {tau:.3e} s"
        )));
    }
    let probe = |dt: f64| -> Result<f64> { delta_phi_at(p, 0.37 * b_over_v, dt) };
    let mut prev = probe(dt)?;
    for _ in 0..6 {
        let next = probe(dt / 2.0)?;
        let scale = prev.abs().max(next.abs());
        if scale == 0.0 || (next - prev).abs() <= 1e-3 * scale {
            break;
        }
        dt /= 2.0;
        prev = next;
    }
    Ok(dt)
}

/// δφ for a single arrival offset by trapezoid quadrature.
fn delta_phi_at(p: &ChannelParams, t0: f64, dt: f64) -> Result<f64> {
    let tau = p.interferometer.total_time();
    let n = (tau / dt).ceil() as usize;
    let dt = tau / n as f64;
    let cutoff = 50.0 * p.encounter.impact_parameter / p.encounter.speed;
    let mut acc = 0.0;
    for i in 0..=n {
        let t = i as f64 * dt;
        if (t - t0).abs() > cutoff {
            continue;
        }
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        acc += w * acceleration_time(p, t - t0)? * arm_separation(&p.interferometer, t)?;
    }
    Ok(p.interferometer.mass / REDUCED_PLANCK * acc * dt)
}

/// Build one full realization (with its sampled acceleration series).
pub fn realize(p: &ChannelParams, arrival_offset: f64) -> Result<NoiseRealization> {
    p.validate()?;
    let dt = resolve_dt(p)?;
    let tau = p.interferometer.total_time();
    let n = (tau / dt).ceil() as usize;
    let dt = tau / n as f64;
    let acceleration = (0..=n)
        .map(|i| acceleration_time(p, i as f64 * dt - arrival_offset))
        .collect::<Result<Vec<_>>>()?;
    Ok(NoiseRealization {
        arrival_offset,
        delta_phi: delta_phi_at(p, arrival_offset, dt)?,
        acceleration,
    })
}

/// Sample variance of δφ over `realizations` random arrival offsets drawn
/// uniformly from [−T/2, T/2], T = `encounter.averaging_time`.
///
/// Fixed seeds give bit-identical results for any worker count: offsets come
/// from per-block counter-seeded streams and blocks reduce in index order.
pub fn phase_noise_mc(
    p: &ChannelParams,
    realizations: usize,
    seed: u64,
) -> Result<PhaseNoiseEstimate> {
    p.validate()?;
    if realizations < 100 {
        return Err(Error::invalid("need at least 100 realizations"));
    }
    let window = p.encounter.averaging_time;
    let dt = resolve_dt(p)?;
    let tau = p.interferometer.total_time();
    let n = (tau / dt).ceil() as usize;
    let dt = tau / n as f64;

    // Precompute the separation on the run grid once.
    let sep: Vec<f64> = (0..=n)
        .map(|i| arm_separation(&p.interferometer, (i as f64 * dt).min(tau)).unwrap())
        .collect();
    let cutoff = 50.0 * p.encounter.impact_parameter / p.encounter.speed;
    let scale = p.interferometer.mass / REDUCED_PLANCK * dt;

    let one = |t0: f64| -> Result<f64> {
        let mut acc = 0.0;
        for (i, s) in sep.iter().enumerate() {
            let t = i as f64 * dt;
            if (t - t0).abs() > cutoff || *s == 0.0 {
                continue;
            }
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            acc += w * acceleration_time(p, t - t0)? * s;
        }
        Ok(acc * scale)
    };

    const BLOCK: usize = 256;
    let blocks = realizations.div_ceil(BLOCK);
    use rayon::prelude::*;
    let per_block: Vec<Result<Vec<f64>>> = (0..blocks)
        .into_par_iter()
        .map(|bi| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(bi as u64);
            let count = BLOCK.min(realizations - bi * BLOCK);
            (0..count)
                .map(|_| {
                    let t0 = (rng.random::<f64>() - 0.5) * window;
                    one(t0)
                })
                .collect()
        })
        .collect();

    let mut samples = Vec::with_capacity(realizations);
    for block in per_block {
        samples.extend(block?);
    }
    let nn = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / nn;
    let m2 = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nn;
    let m4 = samples.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nn;
    let variance = m2 * nn / (nn - 1.0);
    // Var[s²] ≈ (m4 − m2²·(n−3)/(n−1))/n
    let var_of_var = ((m4 - m2 * m2 * (nn - 3.0) / (nn - 1.0)) / nn).max(0.0);
    Ok(PhaseNoiseEstimate {
        variance,
        variance_std_error: var_of_var.sqrt(),
        mean,
        mean_std_error: (m2 / nn).sqrt(),
        realizations: samples.len(),
        dt,
        window,
    })
}

/// Monte Carlo δφ variance for a gas of N independent particles: every
/// realization draws one encounter from the gas distributions; independent
/// encounters add linearly in variance, so the per-draw variance scales by N.
pub fn phase_noise_mc_gas(
    base: &ChannelParams,
    gas: &GasEnsemble,
    vmodel: VelocityModel,
    realizations: usize,
    seed: u64,
) -> Result<PhaseNoiseEstimate> {
    gas.validate()?;
    vmodel.check_valid(gas)?;
    if realizations < 100 {
        return Err(Error::invalid("need at least 100 realizations"));
    }
    let window = 10.0 * base.interferometer.total_time();
    const BLOCK: usize = 64;
    let blocks = realizations.div_ceil(BLOCK);
    use rayon::prelude::*;
    let per_block: Vec<Result<Vec<f64>>> = (0..blocks)
        .into_par_iter()
        .map(|bi| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(bi as u64);
            let count = BLOCK.min(realizations - bi * BLOCK);
            (0..count)
                .map(|_| {
                    let u: f64 = rng.random();
                    let b3 = gas.b_min.powi(3) + u * (gas.b_max.powi(3) - gas.b_min.powi(3));
                    let mut p = *base;
                    p.encounter.impact_parameter = b3.cbrt();
                    p.encounter.speed = match vmodel {
                        VelocityModel::DiracDelta => gas.most_probable_speed(),
                        VelocityModel::MaxwellBoltzmann => {
                            let sigma = (crate::constants::BOLTZMANN * gas.gas_temperature
                                / gas.gas_mass)
                                .sqrt();
                            let mut norm = || -> f64 {
                                let u1: f64 = rng.random::<f64>().max(1e-300);
                                let u2: f64 = rng.random();
                                (-2.0 * u1.ln()).sqrt()
                                    * (2.0 * std::f64::consts::PI * u2).cos()
                            };
                            let (x, y, z) = (norm(), norm(), norm());
                            sigma * (x * x + y * y + z * z).sqrt()
                        }
                    };
                    p.encounter.alpha = rng.random::<f64>() * std::f64::consts::TAU;
                    p.encounter.beta = rng.random::<f64>() * std::f64::consts::TAU;
                    p.encounter.theta0 =
                        (1.0 - p.encounter.alpha.cos().powi(2)).max(0.0).sqrt().acos();
                    p.encounter.gamma =
                        (1.0 - p.encounter.beta.cos().powi(2)).max(0.0).sqrt().acos();
                    p.encounter.averaging_time = window;
                    let t0 = (rng.random::<f64>() - 0.5) * window;
                    let dt = (p.interferometer.accel_time / 100.0)
                        .min(p.encounter.impact_parameter / p.encounter.speed / 100.0);
                    delta_phi_at(&p, t0, dt)
                })
                .collect()
        })
        .collect();
    let mut samples = Vec::with_capacity(realizations);
    for block in per_block {
        samples.extend(block?);
    }
    let nn = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / nn;
    let m2 = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nn;
    let m4 = samples.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nn;
    let n_particles = gas.particle_count
        * (gas.b_max.powi(3) - gas.b_min.powi(3))
        / gas.chamber_size.powi(3);
    let variance = m2 * nn / (nn - 1.0) * n_particles;
    let var_of_var = ((m4 - m2 * m2 * (nn - 3.0) / (nn - 1.0)) / nn).max(0.0);
    Ok(PhaseNoiseEstimate {
        variance,
        variance_std_error: var_of_var.sqrt() * n_particles,
        mean: mean * n_particles.sqrt(),
        mean_std_error: (m2 / nn).sqrt() * n_particles.sqrt(),
        realizations: samples.len(),
        dt: 0.0,
        window,
    })
}

/// Frequency-domain counterpart of the Monte Carlo variance: the two-sided
/// fold (1/π)(m/ħ)² ∫ S F dω over effectively the whole positive axis
/// (lower limit pushed far below any structure).
pub fn full_band_reference(p: &ChannelParams, settings: &QuadratureSettings) -> Result<f64> {
    p.validate()?;
    let v = p.encounter.speed;
    let b = p.encounter.impact_parameter;
    let omega_lo = 1e-4 * (v / b).min(p.interferometer.omega_min());
    let decay = 0.5 * v / b;
    let result = integrate_gamma(
        |w| encounter_psd(p, w),
        &p.interferometer,
        omega_lo,
        (settings.bessel_cutoff * v / b).max(omega_lo + 6.0 * decay),
        decay,
        settings,
    )?;
    Ok(2.0 * result.gamma_n)
}

/// Worst-case relative deviation between the periodogram |DFT[a]|² of the
/// sampled acceleration and the closed-form |a(ω)|² over ω ∈ [0.2, 5]·v/b.
#[derive(Debug, Clone, Copy)]
pub struct PeriodogramCheck {
    pub worst_relative_deviation: f64,
    pub frequencies_checked: usize,
    pub record_length: f64,
    pub dt: f64,
}

pub fn periodogram_check(
    p: &ChannelParams,
    record_length: f64,
    dt: f64,
) -> Result<PeriodogramCheck> {
    p.validate()?;
    let b_over_v = p.encounter.impact_parameter / p.encounter.speed;
    if record_length < 20.0 * b_over_v {
        return Err(Error::Undersampled(format!(
            "record length {record_length:.3e} s is below 20·b/v = {:.3e} s",
            20.0 * b_over_v
        )));
    }
    let w_hi = 5.0 / b_over_v;
    if dt <= 0.0 || dt > 0.05 / w_hi {
        return Err(Error::Undersampled(
            "dt must resolve the band: dt <= 0.01·b/v".into(),
        ));
    }
    let n = (record_length / dt).ceil() as usize;
    let samples: Vec<f64> = (0..=n)
        .map(|i| acceleration_time(p, -0.5 * record_length + i as f64 * dt))
        .collect::<Result<Vec<_>>>()?;

    let n_freq = 33usize;
    let mut worst: f64 = 0.0;
    for k in 0..n_freq {
        let w = (0.2 + 4.8 * k as f64 / (n_freq - 1) as f64) / b_over_v;
        let (mut re, mut im) = (0.0, 0.0);
        for (i, a) in samples.iter().enumerate() {
            let t = -0.5 * record_length + i as f64 * dt;
            let weight = if i == 0 || i == n { 0.5 } else { 1.0 };
            re += weight * a * (w * t).cos();
            im -= weight * a * (w * t).sin();
        }
        let periodogram = (re * re + im * im) * dt * dt;
        let closed = encounter_psd(p, w)? * p.encounter.averaging_time;
        if closed > 0.0 {
            worst = worst.max((periodogram - closed).abs() / closed);
        }
    }
    Ok(PeriodogramCheck {
        worst_relative_deviation: worst,
        frequencies_checked: n_freq,
        record_length,
        dt,
    })
}

/// Convenience: all-perpendicular projections wipe out the coupling, used by
/// tests as the trivially-zero case.
pub fn is_null_coupling(p: &ChannelParams) -> bool {
    let e = &p.encounter;
    let core_zero = e.alpha.cos().abs() < 1e-15 && e.beta.cos().abs() < 1e-15;
    match p.channel {
        InteractionChannel::DipoleDipole => core_zero || e.theta0.cos().abs() < 1e-15,
        _ => core_zero,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Encounter, EnvironmentParticle, InterferometerConfig};
    use crate::constants::ELEMENTARY_CHARGE;
    use std::f64::consts::PI;

    fn cc_params() -> ChannelParams {
        ChannelParams {
            channel: InteractionChannel::ChargeCharge,
            interferometer: InterferometerConfig {
                mass: 1e-15,
                max_separation: 20e-6,
                accel_time: 0.5,
                hold_time: 1.0,
                charge: ELEMENTARY_CHARGE,
                dipole_moment: 0.0,
                radius: 1e-6,
                relative_permittivity: 5.7,
            },
            particle: EnvironmentParticle {
                charge: ELEMENTARY_CHARGE,
                dipole_moment: 0.0,
                polarizability: 0.0,
                mass: 4.8e-26,
            },
            encounter: Encounter {
                impact_parameter: 1e-4,
                speed: 1e-5,
                alpha: 0.0,
                beta: 0.0,
                theta0: 0.0,
                gamma: 0.0,
                averaging_time: 2000.0,
            },
        }
    }

    #[test]
    fn zero_projection_gives_zero_variance() {
        let aligned = cc_params();
        let mut p = aligned;
        p.encounter.alpha = PI / 2.0;
        p.encounter.beta = PI / 2.0;
        assert!(is_null_coupling(&p));
        let est = phase_noise_mc(&p, 200, 1).unwrap();
        let reference = phase_noise_mc(&aligned, 200, 1).unwrap();
        // the ε of cos(π/2) leaves an ε²-suppressed residue
        assert!(est.variance <= 1e-28 * reference.variance);
    }

    #[test]
    fn variance_scales_with_coupling_squared() {
        let p1 = cc_params();
        let mut p2 = p1;
        p2.interferometer.charge *= 2.0;
        let a = phase_noise_mc(&p1, 400, 3).unwrap();
        let b = phase_noise_mc(&p2, 400, 3).unwrap();
        assert!((b.variance / a.variance - 4.0).abs() < 1e-10);
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let p = cc_params();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| phase_noise_mc(&p, 512, 42).unwrap().variance)
        };
        assert_eq!(run(1).to_bits(), run(4).to_bits());
        assert_eq!(run(1).to_bits(), run(8).to_bits());
    }

    #[test]
    fn mean_statistically_zeroish() {
        // The mean carries a 1/T bias from the encounter's DC weight, so a
        // wide t₀ window is needed before |mean| ≤ 3·SE becomes meaningful.
        let mut p = cc_params();
        p.encounter.averaging_time = 8000.0 * p.encounter.impact_parameter / p.encounter.speed;
        let est = phase_noise_mc(&p, 1000, 11).unwrap();
        assert!(
            est.mean.abs() <= 3.0 * est.mean_std_error,
            "mean {:.3e} ± {:.3e}",
            est.mean,
            est.mean_std_error
        );
    }

    #[test]
    fn realize_exposes_series() {
        let p = cc_params();
        let r = realize(&p, 1.0).unwrap();
        assert!(r.acceleration.len() > 100);
        assert!(r.delta_phi.is_finite());
        assert_eq!(r.arrival_offset, 1.0);
    }

    #[test]
    fn variance_matches_full_band_reference() {
        // the heavy version lives in the acceptance suite; this is a smoke
        // run at reduced statistics
        let p = cc_params();
        let est = phase_noise_mc(&p, 3000, 7).unwrap();
        let reference = full_band_reference(&p, &QuadratureSettings::default()).unwrap();
        let rel = (est.variance - reference).abs() / reference;
        assert!(
            rel < 0.25,
            "MC {:.4e} vs reference {:.4e} (rel {rel:.3})",
            est.variance,
            reference
        );
    }

    #[test]
    fn periodogram_matches_closed_form() {
        let mut p = cc_params();
        p.encounter.averaging_time = 10.0;
        let b_over_v = 10.0;
        let got = periodogram_check(&p, 400.0 * b_over_v, b_over_v / 400.0).unwrap();
        assert!(
            got.worst_relative_deviation < 1e-3,
            "worst deviation {:.2e}",
            got.worst_relative_deviation
        );
        // record too short
        assert!(periodogram_check(&p, 10.0 * b_over_v, 0.01).is_err());
    }

    #[test]
    fn periodogram_converges_with_record_length() {
        let mut p = cc_params();
        p.encounter.averaging_time = 10.0;
        let b_over_v = 10.0;
        let short = periodogram_check(&p, 100.0 * b_over_v, b_over_v / 400.0).unwrap();
        let long = periodogram_check(&p, 200.0 * b_over_v, b_over_v / 400.0).unwrap();
        assert!(
            long.worst_relative_deviation < short.worst_relative_deviation,
            "short {:.2e} long {:.2e}",
            short.worst_relative_deviation,
            long.worst_relative_deviation
        );
    }

    #[test]
    fn gas_mode_linear_in_count() {
        let p = cc_params();
        let gas = GasEnsemble::from_number_density(1e6, 0.01, 1e-4, 4.8e-26, 1e-4).unwrap();
        let mut gas2 = gas;
        gas2.particle_count *= 2.0;
        let a = phase_noise_mc_gas(&p, &gas, VelocityModel::DiracDelta, 128, 5).unwrap();
        let b = phase_noise_mc_gas(&p, &gas2, VelocityModel::DiracDelta, 128, 5).unwrap();
        assert!((b.variance / a.variance - 2.0).abs() < 1e-12);
    }
}
