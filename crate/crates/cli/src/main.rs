//! Command-line interface: per-channel dephasing, parameter sweeps, the
//! two-interferometer ensemble pipelines, projection-angle maps and the
//! time-domain Monte Carlo oracle.  Inputs come from a TOML config plus
//! flag overrides; outputs are CSV or JSON-lines files, each accompanied by
//! a manifest that `dephasim rerun` re-executes byte-identically.

mod commands;
mod model;
mod units;

use clap::{Args, Parser, Subcommand, ValueEnum};
use commands::{execute, CmdError, Format};
use model::{make_grid, EncounterParams, IfaceParams, ParticleParams, RawConfig, ResolvedRun, RunManifest};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use units::{parse_charge, parse_dipole};

#[derive(Parser)]
#[command(
    name = "dephasim",
    version,
    about = "Electromagnetic dephasing of matter-wave interferometers from passing charges and dipoles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML parameter file (see presets/)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.  A manifest is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Seed for Monte Carlo commands
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores); results are identical either way
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Evaluate Bessel functions exactly instead of using the regime
    /// approximations in the ensemble pipelines
    #[arg(long, global = true)]
    exact_bessel: bool,
    /// Relative tolerance of the dephasing quadrature
    #[arg(long, global = true)]
    tolerance: Option<f64>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args, Clone, Default)]
struct PhysicsOverrides {
    /// Impact parameter b (m)
    #[arg(long)]
    b: Option<f64>,
    /// Flyby speed v (m/s)
    #[arg(long)]
    v: Option<f64>,
    /// Projection angle α (rad)
    #[arg(long)]
    alpha: Option<f64>,
    /// Projection angle β (rad)
    #[arg(long)]
    beta: Option<f64>,
    /// ẑ-projection angle θ₀ (rad)
    #[arg(long)]
    theta0: Option<f64>,
    /// ẑ-projection angle γ (rad)
    #[arg(long)]
    gamma: Option<f64>,
    /// Averaging window T (s); default b/v
    #[arg(long)]
    averaging_time: Option<f64>,
    /// Interferometer charge (C, or multiples of e like "1e")
    #[arg(long)]
    qint: Option<String>,
    /// Environment particle charge (C or "10e")
    #[arg(long)]
    qext: Option<String>,
    /// Interferometer dipole (C·m or "0.1 e.um")
    #[arg(long)]
    dint: Option<String>,
    /// Environment dipole (C·m or "1 e.um")
    #[arg(long)]
    dext: Option<String>,
    /// Environment polarizability (A²·s⁴/kg)
    #[arg(long)]
    apol: Option<f64>,
    /// Superposition size Δx (m)
    #[arg(long)]
    dx: Option<f64>,
    /// Acceleration ramp time t_a (s)
    #[arg(long)]
    ta: Option<f64>,
    /// Hold time t_e (s)
    #[arg(long)]
    te: Option<f64>,
    /// Test mass (kg)
    #[arg(long)]
    mass: Option<f64>,
    /// Test-particle radius (m)
    #[arg(long)]
    radius: Option<f64>,
    /// Relative permittivity ε_r
    #[arg(long)]
    epsr: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Dephasing Γₙ of a single flyby for one interaction channel
    Channel {
        /// Channel tag: cc, cdp, cdi, dpc, dic or dd
        #[arg(long = "type", visible_alias = "channel")]
        channel: Option<String>,
        #[command(flatten)]
        physics: PhysicsOverrides,
    },
    /// Γₙ along a one-parameter grid (v, b, dx, qint or nv)
    Sweep {
        #[arg(long)]
        var: Option<String>,
        #[arg(long)]
        start: Option<f64>,
        #[arg(long)]
        stop: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// Linear grid instead of logarithmic
        #[arg(long)]
        linear: bool,
        /// Comma-separated channel tags
        #[arg(long, value_delimiter = ',')]
        channels: Option<Vec<String>>,
        #[command(flatten)]
        physics: PhysicsOverrides,
    },
    /// Gas-averaged dephasing and witness curve for two adjacent neutral
    /// interferometers (dipole channels, dominant mode)
    Qgem {
        #[arg(long)]
        nv_start: Option<f64>,
        #[arg(long)]
        nv_stop: Option<f64>,
        #[arg(long)]
        nv_points: Option<usize>,
        /// Trap separation d (m)
        #[arg(long)]
        separation: Option<f64>,
        /// dd (default) or dic
        #[arg(long)]
        channel: Option<String>,
        #[command(flatten)]
        physics: PhysicsOverrides,
    },
    /// Gas-averaged charge-charge dephasing and witness curve for two
    /// adjacent trapped ions
    Cnot {
        #[arg(long)]
        nv_start: Option<f64>,
        #[arg(long)]
        nv_stop: Option<f64>,
        #[arg(long)]
        nv_points: Option<usize>,
        /// Trap separation d (m)
        #[arg(long)]
        separation: Option<f64>,
        /// Trapped charges (C or "1e")
        #[arg(long)]
        q1: Option<String>,
        #[arg(long)]
        q2: Option<String>,
        #[command(flatten)]
        physics: PhysicsOverrides,
    },
    /// |a_x| heat map over the projection angles plus the argmax, per u
    Angles {
        #[arg(long)]
        channel: String,
        /// Comma-separated u = vt/b values
        #[arg(long, value_delimiter = ',')]
        u: Vec<f64>,
        #[arg(long, default_value_t = 181)]
        grid: usize,
    },
    /// Time-domain Monte Carlo estimate of Var[δφ] with the frequency-domain
    /// comparison (JSON output)
    Oracle {
        #[arg(long = "type", visible_alias = "channel")]
        channel: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        realizations: usize,
        /// Also run the periodogram check with this record length (in units
        /// of b/v)
        #[arg(long)]
        periodogram: Option<f64>,
        #[command(flatten)]
        physics: PhysicsOverrides,
    },
    /// Re-execute a run from its manifest
    Rerun {
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CmdError::NonConvergence(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), CmdError> {
    let raw = match &cli.config {
        Some(path) => RawConfig::load(path).map_err(CmdError::Invalid)?,
        None => RawConfig::default(),
    };
    let seed = cli.seed.or(raw.run.seed).unwrap_or(0);
    let tolerance = cli.tolerance.or(raw.run.tolerance).unwrap_or(1e-6);
    let resolved = resolve(&cli, &raw, seed, tolerance)?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CmdError::Invalid(format!("cannot build thread pool: {e}")))?;

    let format = match cli.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    let mut buffer: Vec<u8> = Vec::new();
    pool.install(|| execute(&resolved, &mut buffer, format))?;

    match &cli.out {
        None => {
            std::io::stdout().write_all(&buffer)?;
        }
        Some(path) => {
            std::fs::write(path, &buffer)?;
            write_manifest(path, &resolved, seed)?;
        }
    }
    Ok(())
}

fn write_manifest(out: &Path, run: &ResolvedRun, seed: u64) -> Result<(), CmdError> {
    let created = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_default();
    let manifest = RunManifest {
        tool: "dephasim".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        created,
        seed: Some(seed),
        run: run.clone(),
        outputs: vec![out.display().to_string()],
    };
    let path = manifest_path(out);
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CmdError::Invalid(format!("cannot serialise manifest: {e}")))?;
    std::fs::write(path, text)?;
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn apply_overrides(
    iface: &mut IfaceParams,
    particle: &mut ParticleParams,
    encounter: &mut EncounterParams,
    o: &PhysicsOverrides,
) -> Result<(), CmdError> {
    if let Some(b) = o.b {
        encounter.impact_parameter = b;
    }
    if let Some(v) = o.v {
        encounter.speed = v;
    }
    if let Some(x) = o.alpha {
        encounter.alpha = x;
    }
    if let Some(x) = o.beta {
        encounter.beta = x;
    }
    if let Some(x) = o.theta0 {
        encounter.theta0 = x;
    }
    if let Some(x) = o.gamma {
        encounter.gamma = x;
    }
    if o.averaging_time.is_some() {
        encounter.averaging_time = o.averaging_time;
    }
    if let Some(s) = &o.qint {
        iface.charge = parse_charge(s).map_err(CmdError::Invalid)?;
    }
    if let Some(s) = &o.qext {
        particle.charge = parse_charge(s).map_err(CmdError::Invalid)?;
    }
    if let Some(s) = &o.dint {
        iface.dipole_moment = parse_dipole(s).map_err(CmdError::Invalid)?;
    }
    if let Some(s) = &o.dext {
        particle.dipole_moment = parse_dipole(s).map_err(CmdError::Invalid)?;
    }
    if let Some(x) = o.apol {
        particle.polarizability = x;
    }
    if let Some(x) = o.dx {
        iface.max_separation = x;
    }
    if let Some(x) = o.ta {
        iface.accel_time = x;
    }
    if let Some(x) = o.te {
        iface.hold_time = x;
    }
    if let Some(x) = o.mass {
        iface.mass = x;
    }
    if let Some(x) = o.radius {
        iface.radius = x;
    }
    if let Some(x) = o.epsr {
        iface.relative_permittivity = x;
    }
    Ok(())
}

fn resolve(cli: &Cli, raw: &RawConfig, seed: u64, tolerance: f64) -> Result<ResolvedRun, CmdError> {
    let base = |physics: &PhysicsOverrides| -> Result<(IfaceParams, ParticleParams, EncounterParams), CmdError> {
        let mut iface = raw.interferometer().map_err(CmdError::Invalid)?;
        let mut particle = raw.particle().map_err(CmdError::Invalid)?;
        let mut encounter = raw.encounter();
        apply_overrides(&mut iface, &mut particle, &mut encounter, physics)?;
        Ok((iface, particle, encounter))
    };
    match &cli.command {
        Command::Channel { channel, physics } => {
            let (interferometer, particle, encounter) = base(physics)?;
            let channel = channel
                .clone()
                .or_else(|| raw.run.channel.clone())
                .ok_or_else(|| CmdError::Invalid("no channel given (use --type)".into()))?;
            Ok(ResolvedRun::Channel {
                channel,
                interferometer,
                particle,
                encounter,
                tolerance,
            })
        }
        Command::Sweep {
            var,
            start,
            stop,
            points,
            linear,
            channels,
            physics,
        } => {
            let (interferometer, particle, encounter) = base(physics)?;
            let variable = var
                .clone()
                .or_else(|| raw.run.sweep_variable.clone())
                .ok_or_else(|| CmdError::Invalid("no sweep variable (use --var)".into()))?;
            let start = start
                .or(raw.run.sweep_start)
                .ok_or_else(|| CmdError::Invalid("no sweep start (use --start)".into()))?;
            let stop = stop
                .or(raw.run.sweep_stop)
                .ok_or_else(|| CmdError::Invalid("no sweep stop (use --stop)".into()))?;
            let points = points.or(raw.run.sweep_points).unwrap_or(16);
            let log = !linear && raw.run.sweep_scale.as_deref() != Some("linear");
            let grid = make_grid(start, stop, points, log).map_err(CmdError::Invalid)?;
            let channels = channels
                .clone()
                .or_else(|| raw.run.channels.clone())
                .or_else(|| raw.run.channel.clone().map(|c| vec![c]))
                .ok_or_else(|| CmdError::Invalid("no channels given (use --channels)".into()))?;
            let gas = raw.gas(interferometer.radius).ok();
            Ok(ResolvedRun::Sweep {
                channels,
                variable,
                grid,
                interferometer,
                particle,
                encounter,
                gas,
                tolerance,
            })
        }
        Command::Qgem {
            nv_start,
            nv_stop,
            nv_points,
            separation,
            channel,
            physics,
        } => {
            let (interferometer, particle, _) = base(physics)?;
            let gas = raw
                .gas(interferometer.radius)
                .map_err(CmdError::Invalid)?;
            let grid = make_grid(
                nv_start.or(raw.run.nv_start).unwrap_or(1e8),
                nv_stop.or(raw.run.nv_stop).unwrap_or(1e14),
                nv_points.or(raw.run.nv_points).unwrap_or(13),
                true,
            )
            .map_err(CmdError::Invalid)?;
            Ok(ResolvedRun::Qgem {
                interferometer,
                particle,
                gas,
                nv_grid: grid,
                separation: separation.or(raw.run.separation_d).unwrap_or(450e-6),
                channel: channel.clone().unwrap_or_else(|| "dd".into()),
                exact_bessel: cli.exact_bessel,
                tolerance,
            })
        }
        Command::Cnot {
            nv_start,
            nv_stop,
            nv_points,
            separation,
            q1,
            q2,
            physics,
        } => {
            let (interferometer, particle, _) = base(physics)?;
            let gas = raw
                .gas(1e3 * interferometer.radius)
                .map_err(CmdError::Invalid)?;
            let grid = make_grid(
                nv_start.or(raw.run.nv_start).unwrap_or(1e4),
                nv_stop.or(raw.run.nv_stop).unwrap_or(1e10),
                nv_points.or(raw.run.nv_points).unwrap_or(13),
                true,
            )
            .map_err(CmdError::Invalid)?;
            let q_from = |flag: &Option<String>, raw_val: &Option<toml::Value>| -> Result<f64, CmdError> {
                if let Some(s) = flag {
                    return parse_charge(s).map_err(CmdError::Invalid);
                }
                if let Some(v) = raw_val {
                    return match v {
                        toml::Value::String(s) => parse_charge(s).map_err(CmdError::Invalid),
                        toml::Value::Float(f) => Ok(f.abs()),
                        toml::Value::Integer(i) => Ok((*i as f64).abs()),
                        _ => Err(CmdError::Invalid("bad charge value".into())),
                    };
                }
                Ok(interferometer.charge)
            };
            Ok(ResolvedRun::Cnot {
                q1: q_from(q1, &raw.run.q1)?,
                q2: q_from(q2, &raw.run.q2)?,
                interferometer,
                particle,
                gas,
                nv_grid: grid,
                separation: separation.or(raw.run.separation_d).unwrap_or(50e-6),
                exact_bessel: cli.exact_bessel,
                tolerance,
            })
        }
        Command::Angles { channel, u, grid } => Ok(ResolvedRun::Angles {
            channel: channel.clone(),
            u_values: u.clone(),
            grid_points: *grid,
        }),
        Command::Oracle {
            channel,
            realizations,
            periodogram,
            physics,
        } => {
            let (interferometer, particle, mut encounter) = base(physics)?;
            // The Monte Carlo targets the stationary-noise variance; a
            // narrow arrival window (the per-encounter default T = b/v)
            // clips it badly, so default to a wide one.  The same T feeds
            // the frequency-domain comparison, which is T-invariant.
            if encounter.averaging_time.is_none() {
                encounter.averaging_time =
                    Some(200.0 * encounter.impact_parameter / encounter.speed);
            }
            let channel = channel
                .clone()
                .or_else(|| raw.run.channel.clone())
                .ok_or_else(|| CmdError::Invalid("no channel given (use --type)".into()))?;
            Ok(ResolvedRun::Oracle {
                channel,
                interferometer,
                particle,
                encounter,
                realizations: *realizations,
                seed,
                periodogram_record: *periodogram,
                tolerance,
            })
        }
        Command::Rerun { manifest } => {
            let text = std::fs::read_to_string(manifest)
                .map_err(|e| CmdError::Invalid(format!("cannot read manifest: {e}")))?;
            let manifest: RunManifest = serde_json::from_str(&text)
                .map_err(|e| CmdError::Invalid(format!("cannot parse manifest: {e}")))?;
            Ok(manifest.run)
        }
    }
}
