//! The dephasing quadrature engine:
//!
//! ```text
//! Γₙ = (1/2π) (m/ħ)² ∫_{ω_min}^{ω_max} S_aa(ω) F(ω) dω
//! ```
//!
//! with ω_min = 2π/τ and ω_max chosen where the Bessel decay of the PSD
//! makes the remaining tail provably smaller than the tolerance.  The
//! integrand oscillates with the sin⁴·sin² factors of F, so integration
//! proceeds over panels no wider than a fraction of the shortest
//! oscillation half-period, each panel refined adaptively.

use crate::channels::{encounter_psd, ChannelParams};
use crate::config::InterferometerConfig;
use crate::constants::REDUCED_PLANCK;
use crate::error::Error;
use crate::quad::adaptive_panel;
use crate::trajectory::transfer_function;
use crate::Result;
use std::f64::consts::PI;

/// Tuning knobs of the ω-quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSettings {
    /// Requested relative tolerance on Γₙ.
    pub relative_tolerance: f64,
    /// Cap on the number of leaf panels.
    pub max_subdivisions: usize,
    /// ω_max is pushed to at least bω/v = `bessel_cutoff` (argument where the
    /// exponential PSD decay has killed the integrand).
    pub bessel_cutoff: f64,
    /// Panel width as a fraction of the shortest oscillation period of the
    /// transfer function, π/(2t_a + t_e) in ω.
    pub panel_fraction: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-6,
            max_subdivisions: 200_000,
            bessel_cutoff: 40.0,
            panel_fraction: 0.5,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.relative_tolerance > 0.0 && self.relative_tolerance <= 1e-2) {
            return Err(Error::invalid("relative tolerance must lie in (0, 1e-2]"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::invalid("max_subdivisions must be positive"));
        }
        if !(self.panel_fraction > 0.0 && self.panel_fraction <= 0.5) {
            return Err(Error::invalid(
                "panel width must not exceed half the shortest oscillation period",
            ));
        }
        Ok(())
    }
}

/// Γₙ with quadrature diagnostics.
#[derive(Debug, Clone)]
pub struct DephasingResult {
    pub gamma_n: f64,
    pub estimated_error: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub panels: usize,
    /// Warnings emitted while evaluating (also logged).
    pub warnings: Vec<String>,
}

/// Integrate (1/2π)(m/ħ)² ∫ psd(ω)·F(ω) dω from ω_min upward until the tail
/// is negligible.  `decay_scale` is the e-folding width of the PSD's
/// exponential tail in ω (v/2b for a single encounter).
pub(crate) fn integrate_gamma<P>(
    psd: P,
    interferometer: &InterferometerConfig,
    omega_min: f64,
    min_omega_max: f64,
    decay_scale: f64,
    settings: &QuadratureSettings,
) -> Result<DephasingResult>
where
    P: Fn(f64) -> Result<f64>,
{
    settings.validate()?;
    let prefactor = 0.5 / PI * (interferometer.mass / REDUCED_PLANCK).powi(2);
    let integrand = |w: f64| -> Result<f64> {
        Ok(prefactor * psd(w)? * transfer_function(interferometer, w)?)
    };

    let osc_period = PI / (2.0 * interferometer.accel_time + interferometer.hold_time);
    let h = (settings.panel_fraction * osc_period).min(0.25 * decay_scale.max(osc_period * 1e-6));
    // Never step wider than a fraction of the remaining band either.
    let h = h.min(0.5 * (min_omega_max - omega_min).abs().max(osc_period));

    let mut value = 0.0;
    let mut error = 0.0;
    let mut panels = 0usize;
    let mut peak = 0.0f64;
    let mut w = omega_min;
    let mut last_max;
    let failed: std::cell::RefCell<Option<Error>> = std::cell::RefCell::new(None);

    while panels < settings.max_subdivisions {
        let w_next = w + h;
        let est = {
            let f = |x: f64| match integrand(x) {
                Ok(v) => v,
                Err(e) => {
                    failed.borrow_mut().get_or_insert(e);
                    0.0
                }
            };
            // floor keeps panels near the transfer-function zeros cheap
            adaptive_panel(
                &f,
                w,
                w_next,
                0.1 * settings.relative_tolerance,
                1e-300,
                18,
            )
        };
        if let Some(e) = failed.borrow_mut().take() {
            return Err(e);
        }
        value += est.value;
        error += est.error;
        panels += est.panels;
        last_max = (est.value.abs() / h).max(integrand(w_next)?.abs());
        peak = peak.max(last_max);
        w = w_next;

        let past_cutoff = w >= min_omega_max;
        // Exponential-tail bound: remaining mass ≤ |integrand| · decay length.
        let tail_bound = last_max * (decay_scale + h);
        let tail_ok = tail_bound <= 0.25 * settings.relative_tolerance * value.abs()
            || (value == 0.0 && last_max == 0.0 && past_cutoff);
        let envelope_ok = last_max <= settings.relative_tolerance * peak * 1e-3;
        if past_cutoff && (tail_ok || envelope_ok) {
            break;
        }
    }

    let mut warnings = Vec::new();
    if panels >= settings.max_subdivisions {
        return Err(Error::NonConvergence {
            partial: value,
            achieved: if value != 0.0 { error / value } else { error },
            requested: settings.relative_tolerance,
        });
    }
    if error > settings.relative_tolerance * value.abs() && value != 0.0 {
        warnings.push(format!(
            "achieved relative error {:.2e} exceeds requested {:.2e}",
            error / value,
            settings.relative_tolerance
        ));
    }
    Ok(DephasingResult {
        gamma_n: value,
        estimated_error: error,
        omega_min,
        omega_max: w,
        panels,
        warnings,
    })
}

/// Dephasing variance Γₙ of a single encounter.
pub fn dephasing(p: &ChannelParams, settings: &QuadratureSettings) -> Result<DephasingResult> {
    p.validate()?;
    let tau = p.interferometer.total_time();
    let omega_min = p.interferometer.omega_min();
    let b = p.encounter.impact_parameter;
    let v = p.encounter.speed;
    let decay_scale = 0.5 * v / b;
    let min_omega_max = (settings.bessel_cutoff * v / b).max(omega_min + 6.0 * decay_scale);

    let mut result = integrate_gamma(
        |w| encounter_psd(p, w),
        &p.interferometer,
        omega_min,
        min_omega_max,
        decay_scale,
        settings,
    )?;
    if p.encounter.averaging_time < tau {
        let msg = format!(
            "averaging time T = {:.3e} s is shorter than the experiment time τ = {:.3e} s; \
             the stationary-noise averaging premise assumes T >> τ",
            p.encounter.averaging_time, tau
        );
        log::warn!("{msg}");
        result.warnings.push(msg);
    }
    if p.encounter.averaging_time < b / v {
        log::debug!("averaging time is shorter than the flyby time b/v");
    }
    Ok(result)
}

/// Single-bin estimate Γₙ ≈ (1/2π)(m/ħ)² S(ω_min) F(ω_min) Δω with
/// Δω = ω_min; an order-of-magnitude shortcut, reliable when the integrand's
/// support above ω_min is not much narrower than ω_min itself.
pub fn dominant_mode_dephasing(p: &ChannelParams) -> Result<f64> {
    p.validate()?;
    let omega_min = p.interferometer.omega_min();
    let prefactor = 0.5 / PI * (p.interferometer.mass / REDUCED_PLANCK).powi(2);
    Ok(prefactor
        * encounter_psd(p, omega_min)?
        * transfer_function(&p.interferometer, omega_min)?
        * omega_min)
}

/// Sweep variable for [`dephasing_trend`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Speed,
    ImpactParameter,
    MaxSeparation,
    InterferometerCharge,
}

impl SweepVariable {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "v" => Ok(Self::Speed),
            "b" => Ok(Self::ImpactParameter),
            "dx" => Ok(Self::MaxSeparation),
            "qint" => Ok(Self::InterferometerCharge),
            other => Err(Error::invalid(format!(
                "unknown sweep variable '{other}' (expected v, b, dx or qint)"
            ))),
        }
    }
}

/// Γₙ along a one-parameter sweep.  The averaging window follows T = b/v
/// unless the base encounter pinned it explicitly via `fixed_window`.
/// Points run in parallel; output order matches the input grid.
pub fn dephasing_trend(
    base: &ChannelParams,
    variable: SweepVariable,
    grid: &[f64],
    fixed_window: Option<f64>,
    settings: &QuadratureSettings,
) -> Result<Vec<(f64, DephasingResult)>> {
    if grid.is_empty() {
        return Err(Error::invalid("sweep grid must not be empty"));
    }
    use rayon::prelude::*;
    let results: Vec<Result<(f64, DephasingResult)>> = grid
        .par_iter()
        .map(|&x| {
            let mut p = *base;
            match variable {
                SweepVariable::Speed => p.encounter.speed = x,
                SweepVariable::ImpactParameter => p.encounter.impact_parameter = x,
                SweepVariable::MaxSeparation => p.interferometer.max_separation = x,
                SweepVariable::InterferometerCharge => p.interferometer.charge = x,
            }
            p.encounter.averaging_time = fixed_window
                .unwrap_or(p.encounter.impact_parameter / p.encounter.speed);
            Ok((x, dephasing(&p, settings)?))
        })
        .collect();
    results.into_iter().collect()
}
