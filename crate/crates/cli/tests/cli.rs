use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

fn jpo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jpo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn reference_config() -> String {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.toml");
    fs::read_to_string(root).unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn readout_writes_report_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = jpo(&[
        "--out",
        path(&out),
        "--seed",
        "3",
        "readout",
        "--shots",
        "400",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let report = fs::read_to_string(out.join("report.toml")).unwrap();
    for key in [
        "snr",
        "discrimination",
        "relaxation_loss",
        "preparation_loss",
        "thermal_loss",
        "switching_loss",
        "overlap_loss",
        "inferred_fidelity",
    ] {
        assert!(report.contains(&format!("{key} =")), "missing {key}");
    }
    let m = manifest(&out);
    assert_eq!(m["rng_seed"], 3);
    let listed: Vec<String> = m["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    for name in &listed {
        assert!(out.join(name).is_file(), "{name} listed but missing");
    }
    for entry in fs::read_dir(&out).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        assert!(
            name == "manifest.json" || listed.contains(&name),
            "{name} not listed"
        );
    }
    let records = fs::read_to_string(out.join("records.txt")).unwrap();
    assert_eq!(records.lines().count(), 1 + 800);
}

#[test]
fn fixed_seed_gives_identical_records() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let o = jpo(&[
        "--out",
        path(&a),
        "--seed",
        "9",
        "readout",
        "--shots",
        "300",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = jpo(&[
        "--out",
        path(&b),
        "--seed",
        "9",
        "--threads",
        "1",
        "readout",
        "--shots",
        "300",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for file in ["records.txt", "report.toml", "s_curves.dat"] {
        assert_eq!(
            fs::read(a.join(file)).unwrap(),
            fs::read(b.join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn rerun_from_snapshot_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    let o = jpo(&[
        "--out",
        path(&first),
        "--seed",
        "5",
        "readout",
        "--shots",
        "200",
        "--binary",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = manifest(&first);
    let seed = m["rng_seed"].as_u64().unwrap().to_string();
    let snapshot = first.join("config.toml");
    let o = jpo(&[
        "--config",
        path(&snapshot),
        "--out",
        path(&second),
        "--seed",
        &seed,
        "readout",
        "--shots",
        "200",
        "--binary",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(first.join("records.bin")).unwrap(),
        fs::read(second.join("records.bin")).unwrap()
    );
}

#[test]
fn zero_shots_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = jpo(&["--out", path(tmp.path()), "readout", "--shots", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_config_key_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let text: String = reference_config()
        .lines()
        .filter(|l| !l.starts_with("t1_s"))
        .map(|l| format!("{l}\n"))
        .collect();
    let cfg = write_config(tmp.path(), &text);
    let o = jpo(&["--config", &cfg, "--out", path(tmp.path()), "threshold"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("t1_s"), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let text = reference_config().replace("[cycle]", "[cycle]\nshots_per_state = 3");
    let cfg = write_config(tmp.path(), &text);
    let o = jpo(&["--config", &cfg, "threshold"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("shots_per_state"), "{}", stderr(&o));
}

#[test]
fn invalid_physics_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let text = reference_config().replace("t2_star_s = 1.66e-6", "t2_star_s = 1.0e-3");
    let cfg = write_config(tmp.path(), &text);
    let o = jpo(&["--config", &cfg, "threshold"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("t2_star"), "{}", stderr(&o));
}

#[test]
fn runtime_failure_exits_3() {
    // A run shorter than the sampling window cannot be detected.
    let tmp = tempfile::tempdir().unwrap();
    let text = reference_config().replace("t_end_s = 600e-9", "t_end_s = 400e-9");
    let cfg = write_config(tmp.path(), &text);
    let out = tmp.path().join("out");
    let o = jpo(&[
        "--config",
        &cfg,
        "--out",
        path(&out),
        "readout",
        "--shots",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn region_map_small_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("map");
    let start = Instant::now();
    let o = jpo(&[
        "--out",
        path(&out),
        "region-map",
        "--grid",
        "16x16",
        "--shots-per-cell",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(start.elapsed() < Duration::from_secs(60));

    let listed = manifest(&out)["outputs"].clone();
    for name in ["region_q0.dat", "region_q1.dat", "boundary.dat"] {
        assert!(
            listed.as_array().unwrap().iter().any(|v| v == name),
            "{name}"
        );
    }
    let grid = fs::read_to_string(out.join("region_q0.dat")).unwrap();
    let rows: Vec<Vec<f64>> = grid
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("delta"))
        .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 256);
    // Below the lowest possible threshold (ε < Γ) every cell stays quiet.
    for r in rows.iter().filter(|r| r[1] < 0.9) {
        assert!(r[2] < 5.0, "{r:?}");
    }
    assert!(rows.iter().any(|r| r[2] > 50.0));
}

#[test]
fn discrimination_map_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("disc");
    let o = jpo(&[
        "--out",
        path(&out),
        "region-map",
        "--grid",
        "3x2",
        "--delta-min",
        "-6",
        "--delta-max",
        "0",
        "--epsilon-min",
        "0.5",
        "--epsilon-max",
        "4",
        "--discrimination-shots",
        "200",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: Vec<Vec<f64>> = fs::read_to_string(out.join("discrimination.dat"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("delta"))
        .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert!((0.0..=1.0).contains(&r[2]), "{r:?}");
        if r[1] < 0.9 {
            assert!(r[2] < 0.2, "{r:?}");
        }
    }
    assert!(rows.iter().any(|r| r[2] > 0.5));
}

fn columns(file: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(file)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("time"))
        .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn averaged_trajectories_separate_states() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("traj");
    let o = jpo(&["--out", path(&out), "trajectory", "--average", "200"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let q0 = columns(&out.join("trajectory_q0.dat"));
    let q1 = columns(&out.join("trajectory_q1.dat"));
    let end0 = q0.last().unwrap()[1];
    let end1 = q1.last().unwrap()[1];
    assert!(end0 < 5.0, "{end0}");
    assert!(end1 > 100.0, "{end1}");
}

#[test]
fn unpumped_noise_free_trajectory_is_flat_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let text = reference_config()
        .replace("epsilon_over_gamma = 3.56", "epsilon_over_gamma = 0.0")
        .replace("seed_noise_photons = 0.5", "seed_noise_photons = 0.0");
    let cfg = write_config(tmp.path(), &text);
    let out = tmp.path().join("flat");
    let o = jpo(&[
        "--config",
        &cfg,
        "--out",
        path(&out),
        "trajectory",
        "--state",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = columns(&out.join("trajectory_q1.dat"));
    assert!(rows.len() > 100);
    assert!(rows.iter().all(|r| r[3] == 0.0));
    assert!(!out.join("trajectory_q0.dat").exists());
}

#[test]
fn synthetic_calibration_recovers_attenuation() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cal");
    let o = jpo(&[
        "--out",
        path(&out),
        "calibrate",
        "--synthesize",
        "127.5",
        "--noise-fraction",
        "0",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = fs::read_to_string(out.join("calibration.toml")).unwrap();
    let mean: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("mean_attenuation_db = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((mean - 127.5).abs() < 1e-6, "{mean}");
    assert!(out.join("calibration_dataset.dat").is_file());
}

#[test]
fn calibration_ignores_row_order_and_warns_on_two_points() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("gen");
    let o = jpo(&["--out", path(&out), "calibrate", "--synthesize", "127.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("calibration_dataset.dat")).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let header = lines.remove(0);

    let shuffled: String = std::iter::once(header)
        .chain(lines.iter().rev().copied())
        .map(|l| format!("{l}\n"))
        .collect();
    let shuffled_path = tmp.path().join("shuffled.dat");
    fs::write(&shuffled_path, shuffled).unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let o = jpo(&[
        "--out",
        path(&a),
        "calibrate",
        path(&out.join("calibration_dataset.dat")),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = jpo(&["--out", path(&b), "calibrate", path(&shuffled_path)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(a.join("calibration.toml")).unwrap(),
        fs::read(b.join("calibration.toml")).unwrap()
    );

    let two: String = std::iter::once(header)
        .chain(lines.iter().take(2).copied())
        .map(|l| format!("{l}\n"))
        .collect();
    let two_path = tmp.path().join("two.dat");
    fs::write(&two_path, two).unwrap();
    let o = jpo(&[
        "--out",
        path(&tmp.path().join("c")),
        "calibrate",
        path(&two_path),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("warning"), "{}", stderr(&o));
}

#[test]
fn malformed_dataset_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.dat");
    fs::write(&bad, "0.5 -10 5.2e9\n0.5 oops 5.2e9\n").unwrap();
    let o = jpo(&["--out", path(tmp.path()), "calibrate", path(&bad)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn threshold_table() {
    let o = jpo(&[
        "threshold",
        "--delta-min",
        "-2",
        "--delta-max",
        "2",
        "--points",
        "5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("delta"))
        .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    for r in &rows {
        // Lower branch is never below √(1 + d²) minus the small β pull.
        assert!(r[1] > 0.9 && r[1] < r[2]);
    }
}

#[test]
fn bad_usage_exits_2() {
    assert_eq!(jpo(&["readout", "--bogus"]).status.code(), Some(2));
    let tmp = tempfile::tempdir().unwrap();
    let o = jpo(&["--out", path(tmp.path()), "region-map", "--grid", "1x9"]);
    assert_eq!(o.status.code(), Some(2));
}
