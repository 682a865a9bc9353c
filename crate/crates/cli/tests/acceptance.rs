//! Acceptance criterion 9: manifest-rerun byte determinism for non-MC
//! commands, and fixed-seed byte determinism of the Monte Carlo command
//! across 1, 4 and 8 workers.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dephasim"))
}

fn repo_path(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
        .display()
        .to_string()
}

#[test]
fn criterion_9_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();

    // -- non-MC commands: rerun from the manifest must be byte-identical --
    for (name, args) in [
        (
            "channel",
            vec![
                "channel".to_string(),
                "--config".into(),
                repo_path("presets/fig3a.toml"),
            ],
        ),
        (
            "sweep",
            vec![
                "sweep".to_string(),
                "--config".into(),
                repo_path("presets/fig3d.toml"),
                "--points".into(),
                "4".into(),
            ],
        ),
        (
            "qgem",
            vec![
                "qgem".to_string(),
                "--config".into(),
                repo_path("presets/fig5.toml"),
                "--nv-points".into(),
                "5".into(),
            ],
        ),
        (
            "angles",
            vec![
                "angles".to_string(),
                "--channel".into(),
                "cc".into(),
                "--u".into(),
                "0.1,1,10".into(),
                "--grid".into(),
                "61".into(),
            ],
        ),
    ] {
        let first = dir.path().join(format!("{name}_a.csv"));
        let second = dir.path().join(format!("{name}_b.csv"));
        let status = bin()
            .args(&args)
            .arg("--out")
            .arg(&first)
            .status()
            .unwrap();
        assert!(status.success(), "{name} failed");
        let manifest = format!("{}.manifest.json", first.display());
        let status = bin()
            .arg("rerun")
            .arg("--manifest")
            .arg(&manifest)
            .arg("--out")
            .arg(&second)
            .status()
            .unwrap();
        assert!(status.success(), "{name} rerun failed");
        let a = std::fs::read(&first).unwrap();
        let b = std::fs::read(&second).unwrap();
        assert_eq!(a, b, "{name}: manifest rerun differs");
        eprintln!("acceptance 9 ({name}): manifest rerun byte-identical ({} bytes)", a.len());
    }

    // -- MC command: byte-identical across worker counts at fixed seed --
    let mut outputs = Vec::new();
    for threads in ["1", "4", "8"] {
        let path = dir.path().join(format!("oracle_{threads}.json"));
        let status = bin()
            .args([
                "oracle",
                "--type",
                "cc",
                "--config",
                &repo_path("presets/fig3a.toml"),
                "--realizations",
                "2000",
                "--seed",
                "31415",
                "--threads",
                threads,
            ])
            .arg("--out")
            .arg(&path)
            .status()
            .unwrap();
        assert!(status.success(), "oracle with {threads} threads failed");
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "oracle differs between 1 and 4 workers");
    assert_eq!(outputs[0], outputs[2], "oracle differs between 1 and 8 workers");

    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 60.0, "runtime {dt:.1} s exceeds 1 min");
    eprintln!(
        "acceptance 9 (determinism): PASS — 4 manifest reruns byte-identical, \
         MC byte-identical across 1/4/8 workers ({dt:.1} s)"
    );
}
