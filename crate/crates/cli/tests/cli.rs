//! CLI surface tests: flag handling, unit suffixes, exit codes, output
//! schemas and the documented edge cases.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dephasim"))
}

fn preset(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../presets")
        .join(name)
        .display()
        .to_string()
}

#[test]
fn channel_produces_single_record() {
    let out = bin()
        .args([
            "channel", "--type", "cc", "--b", "1e-4", "--v", "1e-5", "--qint", "1e", "--qext",
            "1e", "--mass", "1e-15", "--dx", "20e-6", "--ta", "0.5", "--te", "1.0",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("channel,"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "cc");
    let gamma: f64 = row[10].parse().unwrap();
    assert!((gamma / 1.3530531342554667e2 - 1.0).abs() < 1e-10, "{gamma}");
    assert!(lines.next().is_none());
}

#[test]
fn perpendicular_angles_give_negligible_dephasing() {
    let out = bin()
        .args([
            "channel", "--type", "cc", "--qint", "1e", "--qext", "1e",
            "--alpha", "1.5707963267948966", "--beta", "1.5707963267948966",
            "--format", "json",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["gamma_n"].as_f64().unwrap() < 1e-30);
}

#[test]
fn zero_speed_rejected_with_exit_code_2() {
    let out = bin()
        .args(["channel", "--type", "cc", "--qint", "1e", "--qext", "1e", "--v", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("speed must be positive"), "stderr: {err}");
}

#[test]
fn incompatible_channel_rejected() {
    // dd with a charged particle but no dipoles: the channel compatibility
    // check names the violated requirement
    let out = bin()
        .args(["channel", "--type", "dd", "--qext", "1e"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("dd"), "stderr: {err}");
}

#[test]
fn unknown_channel_tag_rejected() {
    let out = bin().args(["channel", "--type", "zz"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_grid_rejected() {
    let out = bin()
        .args([
            "sweep", "--var", "v", "--start", "1e-6", "--stop", "1e-5", "--points", "0",
            "--channels", "cc", "--qint", "1e", "--qext", "1e",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_emits_rows_in_grid_order() {
    let out = bin()
        .args(["sweep", "--config", &preset("fig3a.toml"), "--points", "5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let values: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 5);
    assert!(values.windows(2).all(|w| w[1] > w[0]), "grid out of order");
    let gammas: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(10).unwrap().parse().unwrap())
        .collect();
    assert!(gammas.windows(2).all(|w| w[1] > w[0]), "Γₙ not increasing in v");
}

#[test]
fn qgem_preset_curve_shape() {
    let out = bin()
        .args(["qgem", "--config", &preset("fig5.toml"), "--nv-points", "7"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n_v,gamma_n,delta_phi_abs,witness,detectable"));
    let gammas: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(gammas.len(), 7);
    assert!(gammas.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn cnot_detectability_flips_with_density() {
    let out = bin()
        .args(["cnot", "--config", &preset("fig6.toml"), "--nv-points", "7"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let flags: Vec<bool> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert!(flags.first().copied().unwrap_or(false), "low density should be detectable");
    assert!(!flags.last().copied().unwrap_or(true), "high density should wash out the witness");
}

#[test]
fn angles_argmax_matches_regimes() {
    let out = bin()
        .args(["angles", "--channel", "cc", "--u", "0.1,1,10", "--grid", "121"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let argmax: Vec<Vec<&str>> = text
        .lines()
        .filter(|l| l.starts_with("argmax"))
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(argmax.len(), 3);
    // u = 0.1: α ≈ 0; u = 1: α = β ≈ 0; u = 10: β ≈ 0
    let get = |row: &[&str], i: usize| -> f64 { row[i].parse().unwrap() };
    assert!(get(&argmax[0], 3).abs() < 0.03);
    assert!(get(&argmax[1], 3).abs() < 0.03 && get(&argmax[1], 4).abs() < 0.03);
    assert!(get(&argmax[2], 4).abs() < 0.03);
    // normalised grid peaks at 1
    let peak = text
        .lines()
        .filter(|l| l.starts_with("grid"))
        .map(|l| l.split(',').nth(5).unwrap().parse::<f64>().unwrap())
        .fold(0.0f64, f64::max);
    assert!((peak - 1.0).abs() < 1e-12);
}

#[test]
fn oracle_emits_json_with_band_comparison() {
    let out = bin()
        .args([
            "oracle", "--type", "cc", "--config", &preset("fig3a.toml"),
            "--realizations", "500", "--seed", "7",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["variance"].as_f64().unwrap() > 0.0);
    assert!(v["variance_std_error"].as_f64().unwrap() > 0.0);
    assert!(v["full_band_frequency_domain"].as_f64().unwrap() > 0.0);
    assert!(v["gamma_n_above_omega_min"].as_f64().unwrap() >= 0.0);
    let ratio = v["full_band_ratio"].as_f64().unwrap();
    assert!(ratio > 0.5 && ratio < 2.0, "full-band ratio {ratio}");
}

#[test]
fn missing_config_rejected() {
    let out = bin()
        .args(["channel", "--type", "cc", "--config", "/nonexistent/x.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dipole_unit_suffixes_accepted() {
    let out = bin()
        .args([
            "channel", "--type", "dd", "--dint", "0.1 e.um", "--dext", "6.17e-30",
            "--theta0", "0.785", "--alpha", "0.785",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
