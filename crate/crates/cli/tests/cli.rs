//! End-to-end CLI behavior: exit codes, diagnostics, and command output.

use std::path::Path;
use std::process::{Command, Output};

use graspattack::grasp::GraspScene;
use graspattack::quality::{lift_capability_scene, LcNorm};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_graspattack"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn graspattack")
}

fn fixtures_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["fixtures", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    dir
}

#[test]
fn fixtures_writes_three_meshes_and_six_configs() {
    let dir = fixtures_dir();
    let meshes = std::fs::read_dir(dir.path().join("meshes"))
        .unwrap()
        .count();
    let configs = std::fs::read_dir(dir.path().join("configs"))
        .unwrap()
        .count();
    assert_eq!(meshes, 3);
    assert_eq!(configs, 6);
}

#[test]
fn missing_mesh_exits_2_and_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(
        &config,
        r#"{"object_path": "nowhere.obj", "contacts": [{"position": [0,0,0], "snap": true}]}"#,
    )
    .unwrap();
    let out = run(&["quality", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("nowhere.obj"), "stderr: {stderr}");
}

#[test]
fn malformed_json_exits_2_with_parse_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("broken.json");
    std::fs::write(&config, "{ not json").unwrap();
    let out = run(&["quality", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("malformed config"), "stderr: {stderr}");
}

#[test]
fn unknown_flag_exits_2() {
    let out = run(&["quality", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn quality_output_matches_library_values() {
    let dir = fixtures_dir();
    let config_path = dir.path().join("configs/box_2c.json");
    let out = run(&["quality", "--config", config_path.to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);

    let lc_line = stdout
        .lines()
        .find(|l| l.starts_with("LC:"))
        .expect("LC line");
    let lc: f64 = lc_line.split_whitespace().nth(1).unwrap().parse().unwrap();

    // same config through the library, independent of the CLI printing
    let loaded = graspattack_cli_test_load(&config_path);
    let lift = lift_capability_scene(&loaded, LcNorm::MaxPerContact).unwrap();
    assert!(
        (lc - lift.lc_value).abs() <= 5e-7,
        "cli {lc} lib {}",
        lift.lc_value
    );
    assert!(stdout.contains("MinGF: 8.2 N"), "stdout: {stdout}");
}

fn graspattack_cli_test_load(config_path: &Path) -> GraspScene {
    // minimal re-implementation of the config loader for cross-checking
    let text = std::fs::read_to_string(config_path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let dir = config_path.parent().unwrap();
    let mesh = graspattack::mesh::load_obj(dir.join(v["object_path"].as_str().unwrap())).unwrap();
    let contacts = v["contacts"].as_array().unwrap();
    let bindings = contacts
        .iter()
        .map(|c| {
            let p = c["position"].as_array().unwrap();
            let point = nalgebra::Point3::new(
                p[0].as_f64().unwrap(),
                p[1].as_f64().unwrap(),
                p[2].as_f64().unwrap(),
            );
            mesh.closest_surface_point(&point).unwrap().0
        })
        .collect();
    let grasp = graspattack::grasp::GraspConfig {
        bindings,
        friction: graspattack::contact::FrictionParams::new(
            v["mu"].as_f64().unwrap(),
            v["gamma"].as_f64().unwrap(),
            v["cone_edges"].as_u64().unwrap() as usize,
        )
        .unwrap(),
        mass_kg: v["mass_kg"].as_f64().unwrap(),
        per_finger_cap_n: v["per_finger_cap_n"].as_f64().unwrap(),
        centroid_mode: Default::default(),
    };
    GraspScene::from_mesh(&mesh, &grasp).unwrap()
}

#[test]
fn attack_report_shows_degraded_grasp() {
    let dir = fixtures_dir();
    let config = dir.path().join("configs/capsule_2c.json");
    let out_mesh = dir.path().join("adv.obj");
    let report_path = dir.path().join("report.json");
    let out = run(&[
        "attack",
        "--config",
        config.to_str().unwrap(),
        "--mode",
        "advgrasp",
        "--seed",
        "7",
        "--rounds",
        "1",
        "--t0",
        "50",
        "--alpha",
        "0.9",
        "--out",
        out_mesh.to_str().unwrap(),
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    let lc_before = report["initial"]["lc"].as_f64().unwrap();
    let lc_after = report["final"]["lc"].as_f64().unwrap();
    assert!(lc_after < lc_before, "{lc_after} !< {lc_before}");
    assert_eq!(report["seed"].as_u64(), Some(7));
    assert_eq!(report["mode"].as_str(), Some("advgrasp"));
    // config echo is in resolved (bound) form
    assert!(report["grasp"]["contacts"][0]["face_index"].is_u64());

    // the adversarial mesh reloads and keeps the topology
    let adv = graspattack::mesh::load_obj(&out_mesh).unwrap();
    let orig = graspattack::mesh::load_obj(dir.path().join("meshes/capsule.obj")).unwrap();
    assert_eq!(adv.faces(), orig.faces());
}

#[test]
fn alc_mode_reports_zero_stability_weight_in_energy() {
    let dir = fixtures_dir();
    let config = dir.path().join("configs/box_2c.json");
    let out_mesh = dir.path().join("adv_alc.obj");
    let report_path = dir.path().join("report_alc.json");
    let out = run(&[
        "attack",
        "--config",
        config.to_str().unwrap(),
        "--mode",
        "alc",
        "--seed",
        "1",
        "--rounds",
        "1",
        "--t0",
        "1",
        "--t-min",
        "0.5",
        "--out",
        out_mesh.to_str().unwrap(),
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    // energy trace excludes the stability term in alc mode
    let row = &report["initial"];
    let energy = row["energy"].as_f64().unwrap();
    let lc = row["lc"].as_f64().unwrap();
    let lap = row["lap"].as_f64().unwrap();
    let lambda2 = report["attack"]["lambda2"].as_f64().unwrap();
    assert!((energy - (lc + lambda2 * lap)).abs() <= 1e-9 * (1.0 + energy.abs()));
}
