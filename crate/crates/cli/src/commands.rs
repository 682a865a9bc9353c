//! Execution of a [`ResolvedRun`]: computes results and serialises them as
//! CSV or JSON lines.  All numeric CSV fields print with 17 significant
//! digits so files round-trip exactly.

use crate::model::{EncounterParams, IfaceParams, ParticleParams, ResolvedRun};
use dephasim::channels::{angle_shape, optimal_angles, ChannelParams};
use dephasim::config::InteractionChannel;
use dephasim::dephasing::{dephasing, DephasingResult, QuadratureSettings, SweepVariable};
use dephasim::ensemble::{
    cnot_ensemble_dephasing, qgem_ensemble_dephasing, EnsembleDephasing, ScenarioOptions,
};
use dephasim::oracle::{full_band_reference, periodogram_check, phase_noise_mc};
use dephasim::witness::{detectable, entangling_phases, Coupling, EntanglementPhases};
use dephasim::Error as CoreError;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug)]
pub enum CmdError {
    Invalid(String),
    NonConvergence(String),
    Io(std::io::Error),
}

impl From<CoreError> for CmdError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NonConvergence { .. } => CmdError::NonConvergence(e.to_string()),
            other => CmdError::Invalid(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Io(e)
    }
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmdError::Invalid(m) => write!(f, "{m}"),
            CmdError::NonConvergence(m) => write!(f, "{m}"),
            CmdError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn settings(tolerance: f64) -> QuadratureSettings {
    QuadratureSettings {
        relative_tolerance: tolerance,
        ..Default::default()
    }
}

fn channel_params(
    channel: &str,
    iface: &IfaceParams,
    particle: &ParticleParams,
    encounter: &EncounterParams,
) -> Result<ChannelParams, CmdError> {
    let channel: InteractionChannel = channel.parse()?;
    let p = ChannelParams {
        channel,
        interferometer: iface.to_core(),
        particle: particle.to_core(),
        encounter: encounter.to_core(),
    };
    p.validate()?;
    Ok(p)
}

pub fn execute(run: &ResolvedRun, out: &mut dyn Write, format: Format) -> Result<(), CmdError> {
    match run {
        ResolvedRun::Channel {
            channel,
            interferometer,
            particle,
            encounter,
            tolerance,
        } => {
            let p = channel_params(channel, interferometer, particle, encounter)?;
            let r = dephasing(&p, &settings(*tolerance))?;
            emit_channel_rows(out, format, &[(channel.clone(), None, p, r)])
        }
        ResolvedRun::Sweep {
            channels,
            variable,
            grid,
            interferometer,
            particle,
            encounter,
            gas,
            tolerance,
        } => {
            if grid.is_empty() {
                return Err(CmdError::Invalid("sweep grid is empty".into()));
            }
            if variable == "nv" {
                return sweep_number_density(
                    channels,
                    grid,
                    interferometer,
                    particle,
                    gas.as_ref(),
                    *tolerance,
                    out,
                    format,
                );
            }
            let var = SweepVariable::parse(variable)?;
            let mut rows = Vec::new();
            for tag in channels {
                let base = channel_params(tag, interferometer, particle, encounter)?;
                let swept = dephasing_trend_fixed_t(
                    &base,
                    var,
                    grid,
                    encounter.averaging_time,
                    &settings(*tolerance),
                )?;
                for (x, r) in swept {
                    let mut p = base;
                    apply_sweep(&mut p, var, x);
                    rows.push((tag.clone(), Some((variable.clone(), x)), p, r));
                }
            }
            emit_channel_rows(out, format, &rows)
        }
        ResolvedRun::Qgem {
            interferometer,
            particle,
            gas,
            nv_grid,
            separation,
            channel,
            exact_bessel,
            tolerance,
        } => {
            let iface = interferometer.to_core();
            let phases = entangling_phases(
                Coupling::Gravitational { mass: iface.mass },
                *separation,
                &iface,
            )?;
            let opts = ScenarioOptions {
                exact_bessel: *exact_bessel,
                channel: channel.parse()?,
                settings: settings(*tolerance),
            };
            let evaluate = |nv: f64| -> Result<EnsembleDephasing, CmdError> {
                let g = gas.to_core(nv)?;
                Ok(qgem_ensemble_dephasing(&g, &iface, &particle.to_core(), &opts)?)
            };
            emit_ensemble_rows(out, format, nv_grid, &phases, evaluate)
        }
        ResolvedRun::Cnot {
            interferometer,
            particle,
            gas,
            nv_grid,
            separation,
            q1,
            q2,
            exact_bessel,
            tolerance,
        } => {
            let iface = interferometer.to_core();
            let phases =
                entangling_phases(Coupling::Coulomb { q1: *q1, q2: *q2 }, *separation, &iface)?;
            let opts = ScenarioOptions {
                exact_bessel: *exact_bessel,
                settings: settings(*tolerance),
                ..Default::default()
            };
            let evaluate = |nv: f64| -> Result<EnsembleDephasing, CmdError> {
                let g = gas.to_core(nv)?;
                Ok(cnot_ensemble_dephasing(&g, &iface, &particle.to_core(), &opts)?)
            };
            emit_ensemble_rows(out, format, nv_grid, &phases, evaluate)
        }
        ResolvedRun::Angles {
            channel,
            u_values,
            grid_points,
        } => {
            let ch: InteractionChannel = channel.parse()?;
            if u_values.is_empty() {
                return Err(CmdError::Invalid("need at least one u value".into()));
            }
            if format == Format::Csv {
                writeln!(out, "record,channel,u,alpha,beta,value")?;
            }
            let n = (*grid_points).max(2);
            for &u in u_values {
                if u.is_nan() || u <= 0.0 {
                    return Err(CmdError::Invalid("u values must be positive".into()));
                }
                let best = optimal_angles(ch, u)?;
                // normalised heat map over [0, π]²
                let step = std::f64::consts::PI / (n - 1) as f64;
                let mut grid = Vec::with_capacity(n * n);
                let mut peak = 0.0f64;
                for i in 0..n {
                    for j in 0..n {
                        let (a, b) = (i as f64 * step, j as f64 * step);
                        let v = angle_shape(ch, u, a, b).abs();
                        peak = peak.max(v);
                        grid.push((a, b, v));
                    }
                }
                for (a, b, v) in grid {
                    let v = if peak > 0.0 { v / peak } else { 0.0 };
                    match format {
                        Format::Csv => writeln!(
                            out,
                            "grid,{},{},{},{},{}",
                            ch,
                            num(u),
                            num(a),
                            num(b),
                            num(v)
                        )?,
                        Format::Json => writeln!(
                            out,
                            "{}",
                            serde_json::json!({
                                "record": "grid", "channel": ch.tag(), "u": u,
                                "alpha": a, "beta": b, "value": v,
                            })
                        )?,
                    }
                }
                match format {
                    Format::Csv => writeln!(
                        out,
                        "argmax,{},{},{},{},{}",
                        ch,
                        num(u),
                        num(best.alpha),
                        num(best.beta),
                        num(1.0)
                    )?,
                    Format::Json => writeln!(
                        out,
                        "{}",
                        serde_json::json!({
                            "record": "argmax", "channel": ch.tag(), "u": u,
                            "alpha": best.alpha, "beta": best.beta,
                            "theta0": best.theta0, "gamma": best.gamma,
                        })
                    )?,
                }
            }
            Ok(())
        }
        ResolvedRun::Oracle {
            channel,
            interferometer,
            particle,
            encounter,
            realizations,
            seed,
            periodogram_record,
            tolerance,
        } => {
            let p = channel_params(channel, interferometer, particle, encounter)?;
            let mc = phase_noise_mc(&p, *realizations, *seed)?;
            let full_band = full_band_reference(&p, &settings(*tolerance))?;
            let cutoff = dephasing(&p, &settings(*tolerance))?;
            let periodogram = periodogram_record
                .map(|rec| {
                    let b_over_v = p.encounter.impact_parameter / p.encounter.speed;
                    periodogram_check(&p, rec * b_over_v, b_over_v / 400.0)
                })
                .transpose()?;
            let obj = serde_json::json!({
                "command": "oracle",
                "channel": channel,
                "realizations": mc.realizations,
                "seed": seed,
                "dt": mc.dt,
                "window": mc.window,
                "variance": mc.variance,
                "variance_std_error": mc.variance_std_error,
                "mean": mc.mean,
                "mean_std_error": mc.mean_std_error,
                "full_band_frequency_domain": full_band,
                "full_band_ratio": if full_band > 0.0 { mc.variance / full_band } else { f64::NAN },
                "gamma_n_above_omega_min": cutoff.gamma_n,
                "band_note": "variance includes all frequencies; gamma_n_above_omega_min counts only ω ≥ 2π/τ",
                "periodogram_worst_relative_deviation":
                    periodogram.map(|c| c.worst_relative_deviation),
            });
            writeln!(out, "{obj}")?;
            Ok(())
        }
    }
}

fn apply_sweep(p: &mut ChannelParams, var: SweepVariable, x: f64) {
    match var {
        SweepVariable::Speed => p.encounter.speed = x,
        SweepVariable::ImpactParameter => p.encounter.impact_parameter = x,
        SweepVariable::MaxSeparation => p.interferometer.max_separation = x,
        SweepVariable::InterferometerCharge => p.interferometer.charge = x,
    }
    if matches!(
        var,
        SweepVariable::Speed | SweepVariable::ImpactParameter
    ) {
        p.encounter.averaging_time = p.encounter.impact_parameter / p.encounter.speed;
    }
}

fn dephasing_trend_fixed_t(
    base: &ChannelParams,
    var: SweepVariable,
    grid: &[f64],
    fixed_window: Option<f64>,
    s: &QuadratureSettings,
) -> Result<Vec<(f64, DephasingResult)>, CmdError> {
    Ok(dephasim::dephasing::dephasing_trend(
        base,
        var,
        grid,
        fixed_window,
        s,
    )?)
}

#[allow(clippy::too_many_arguments)]
fn sweep_number_density(
    channels: &[String],
    grid: &[f64],
    iface: &IfaceParams,
    particle: &ParticleParams,
    gas: Option<&crate::model::GasParams>,
    tolerance: f64,
    out: &mut dyn Write,
    format: Format,
) -> Result<(), CmdError> {
    let gas = gas.ok_or_else(|| {
        CmdError::Invalid("an nv sweep needs a [gas] section in the config".into())
    })?;
    if format == Format::Csv {
        writeln!(out, "variable,value,channel,gamma_n,regime_ok")?;
    }
    for tag in channels {
        let ch: InteractionChannel = tag.parse()?;
        for &nv in grid {
            let gamma = if nv == 0.0 {
                (0.0, true)
            } else {
                let g = gas.to_core(nv)?;
                let core_iface = iface.to_core();
                let core_particle = particle.to_core();
                let result = match ch {
                    InteractionChannel::ChargeCharge => cnot_ensemble_dephasing(
                        &g,
                        &core_iface,
                        &core_particle,
                        &ScenarioOptions {
                            settings: settings(tolerance),
                            ..Default::default()
                        },
                    )?,
                    InteractionChannel::DipoleDipole | InteractionChannel::InducedDipoleCharge => {
                        qgem_ensemble_dephasing(
                            &g,
                            &core_iface,
                            &core_particle,
                            &ScenarioOptions {
                                channel: ch,
                                settings: settings(tolerance),
                                ..Default::default()
                            },
                        )?
                    }
                    other => {
                        return Err(CmdError::Invalid(format!(
                            "nv sweeps support cc, dd and dic channels, not {other}"
                        )))
                    }
                };
                (result.gamma_n, result.regime_ok)
            };
            match format {
                Format::Csv => writeln!(
                    out,
                    "nv,{},{},{},{}",
                    num(nv),
                    tag,
                    num(gamma.0),
                    gamma.1
                )?,
                Format::Json => writeln!(
                    out,
                    "{}",
                    serde_json::json!({
                        "variable": "nv", "value": nv, "channel": tag,
                        "gamma_n": gamma.0, "regime_ok": gamma.1,
                    })
                )?,
            }
        }
    }
    Ok(())
}

type ChannelRow = (String, Option<(String, f64)>, ChannelParams, DephasingResult);

fn emit_channel_rows(
    out: &mut dyn Write,
    format: Format,
    rows: &[ChannelRow],
) -> Result<(), CmdError> {
    if format == Format::Csv {
        writeln!(
            out,
            "channel,variable,value,b,v,alpha,beta,theta0,gamma,averaging_time,\
             gamma_n,estimated_error,omega_min,omega_max,panels"
        )?;
    }
    for (tag, swept, p, r) in rows {
        let (var, val) = swept
            .as_ref()
            .map(|(n, v)| (n.as_str(), *v))
            .unwrap_or(("", f64::NAN));
        match format {
            Format::Csv => {
                let val_str = if swept.is_some() { num(val) } else { String::new() };
                writeln!(
                    out,
                    "{tag},{var},{val_str},{},{},{},{},{},{},{},{},{},{},{},{}",
                    num(p.encounter.impact_parameter),
                    num(p.encounter.speed),
                    num(p.encounter.alpha),
                    num(p.encounter.beta),
                    num(p.encounter.theta0),
                    num(p.encounter.gamma),
                    num(p.encounter.averaging_time),
                    num(r.gamma_n),
                    num(r.estimated_error),
                    num(r.omega_min),
                    num(r.omega_max),
                    r.panels
                )?;
            }
            Format::Json => {
                writeln!(
                    out,
                    "{}",
                    serde_json::json!({
                        "channel": tag,
                        "variable": swept.as_ref().map(|(n, _)| n.clone()),
                        "value": swept.as_ref().map(|(_, v)| *v),
                        "b": p.encounter.impact_parameter,
                        "v": p.encounter.speed,
                        "alpha": p.encounter.alpha,
                        "beta": p.encounter.beta,
                        "theta0": p.encounter.theta0,
                        "gamma": p.encounter.gamma,
                        "averaging_time": p.encounter.averaging_time,
                        "gamma_n": r.gamma_n,
                        "estimated_error": r.estimated_error,
                        "omega_min": r.omega_min,
                        "omega_max": r.omega_max,
                        "panels": r.panels,
                        "warnings": r.warnings,
                    })
                )?;
            }
        }
    }
    Ok(())
}

fn emit_ensemble_rows<F>(
    out: &mut dyn Write,
    format: Format,
    nv_grid: &[f64],
    phases: &EntanglementPhases,
    evaluate: F,
) -> Result<(), CmdError>
where
    F: Fn(f64) -> Result<EnsembleDephasing, CmdError>,
{
    if nv_grid.is_empty() {
        return Err(CmdError::Invalid("number-density grid is empty".into()));
    }
    if format == Format::Csv {
        writeln!(
            out,
            "n_v,gamma_n,delta_phi_abs,witness,detectable,threshold_margin,regime_ok"
        )?;
    }
    for &nv in nv_grid {
        let (gamma, regime_ok) = if nv == 0.0 {
            (0.0, true)
        } else {
            let e = evaluate(nv)?;
            (e.gamma_n, e.regime_ok)
        };
        let verdict = detectable(phases.delta_phi, gamma)?;
        match format {
            Format::Csv => writeln!(
                out,
                "{},{},{},{},{},{},{}",
                num(nv),
                num(gamma),
                num(phases.delta_phi.abs()),
                num(verdict.witness_value),
                verdict.detectable,
                num(verdict.threshold_margin),
                regime_ok
            )?,
            Format::Json => writeln!(
                out,
                "{}",
                serde_json::json!({
                    "n_v": nv,
                    "gamma_n": gamma,
                    "delta_phi_abs": phases.delta_phi.abs(),
                    "witness": verdict.witness_value,
                    "detectable": verdict.detectable,
                    "threshold_margin": verdict.threshold_margin,
                    "regime_ok": regime_ok,
                })
            )?,
        }
    }
    Ok(())
}
