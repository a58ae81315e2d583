use std::fs;
use std::path::PathBuf;
use std::process::Command;

use eulerswell::Error;
use eulerswell_cli::snapshot::{self, fmt9, Snapshot};
use eulerswell_cli::sweep::{self, ledger_delta, relative_delta};
use eulerswell_cli::{run, CliError, Config, RunOptions, Session};

const BASE: &str = r#"
[domain]
lower = [0.0, 0.0]
upper = [1.0, 1.0]

[spaces]
velocity_degree = 4
content_degree = 4

[loads]
transfer = 0.1

[initial]
velocity = ["0.05*sin(PI*x)^2*sin(2*PI*y)", "-0.05*sin(2*PI*x)*sin(PI*y)^2"]
content = "0.5 + 0.1*cos(PI*x)*cos(PI*y)"

[time]
t_end = 0.01
dt = 2e-3

[output]
lattice = 9
"#;

fn base() -> Config {
    Config::from_toml(BASE).unwrap()
}

fn config_key(e: CliError) -> String {
    match e {
        CliError::Config { key, .. } => key,
        other => panic!("expected a config error, got {other}"),
    }
}

fn with(extra_section: &str, line: &str) -> String {
    BASE.replacen(
        &format!("[{extra_section}]\n"),
        &format!("[{extra_section}]\n{line}\n"),
        1,
    )
}

fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.toml"))
}

#[test]
fn shipped_scenarios_parse_and_validate() {
    for name in [
        "free-decay",
        "swelling-influx",
        "shear",
        "adversarial/compression-failure",
    ] {
        let cfg = Config::load(&scenario_path(name)).unwrap();
        cfg.scenario().unwrap();
    }
}

#[test]
fn unknown_key_is_reported_with_its_path() {
    let err = Config::from_toml(&with("loads", "gravty = [\"0\", \"-1\"]")).unwrap_err();
    assert!(config_key(err).starts_with("loads"));
}

#[test]
fn negative_hyperviscosity_names_its_key() {
    let text = format!("{BASE}\n[material]\nnu = -1e-4\n");
    let err = Config::from_toml(&text)
        .and_then(|c| c.scenario())
        .unwrap_err();
    assert_eq!(config_key(err), "material.nu");
}

#[test]
fn content_outside_unit_interval_is_rejected() {
    let text = BASE.replace(
        "content = \"0.5 + 0.1*cos(PI*x)*cos(PI*y)\"",
        "content = \"1.5\"",
    );
    let err = Session::new(&Config::from_toml(&text).unwrap())
        .err()
        .unwrap();
    assert_eq!(config_key(err), "initial.content");
}

#[test]
fn unknown_expression_variable_is_a_config_error() {
    let text = BASE.replace(
        "content = \"0.5 + 0.1*cos(PI*x)*cos(PI*y)\"",
        "content = \"0.5 + w\"",
    );
    let err = Config::from_toml(&text)
        .and_then(|c| c.scenario())
        .unwrap_err();
    assert_eq!(config_key(err), "initial.content");
}

#[test]
fn manifest_is_written_for_a_rejected_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = Config::from_toml(&format!("{BASE}\n[material]\nnu = -1e-4\n")).unwrap();
    let out = run(&cfg, dir.path(), &RunOptions::default());
    assert_eq!(out.exit_code(), 2);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["status"], "config_error");
    assert_eq!(manifest["exit_code"], 2);
    assert!(manifest["diagnostic"]
        .as_str()
        .unwrap()
        .contains("material.nu"));
}

#[test]
fn completed_run_writes_ledger_snapshots_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        snapshot_every: Some(2),
        ..RunOptions::default()
    };
    let out = run(&base(), dir.path(), &opts);
    assert!(out.error.is_none());
    let steps = out.manifest.summary.as_ref().unwrap().steps;
    assert_eq!(steps, 5);
    let ledger = fs::read_to_string(dir.path().join("ledger.csv")).unwrap();
    assert_eq!(ledger.lines().count(), steps + 2);
    for index in [0, 2, 4, 5] {
        for field in snapshot::FIELDS {
            assert!(
                dir.path().join(snapshot::file_name(field, index)).exists(),
                "{field} {index}"
            );
        }
    }
    assert!(!dir.path().join(snapshot::file_name("v", 1)).exists());
}

#[test]
fn runs_are_bitwise_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(&base(), a.path(), &RunOptions::default());
    run(&base(), b.path(), &RunOptions::default());
    for file in [
        "ledger.csv",
        &snapshot::file_name("v", 5),
        &snapshot::file_name("mu", 5),
    ] {
        assert_eq!(
            fs::read(a.path().join(file)).unwrap(),
            fs::read(b.path().join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn rest_state_snapshots_are_zero_and_uniform() {
    let text = BASE
        .replace(
            "velocity = [\"0.05*sin(PI*x)^2*sin(2*PI*y)\", \"-0.05*sin(2*PI*x)*sin(PI*y)^2\"]\n",
            "",
        )
        .replace(
            "content = \"0.5 + 0.1*cos(PI*x)*cos(PI*y)\"",
            "content = \"0.5\"\ndensity = \"3\"",
        );
    let cfg = Config::from_toml(&text).unwrap();
    let s = Session::new(&cfg).unwrap();
    let snaps = snapshot::sample(s.sim.discretization(), s.sim.state(), 9).unwrap();
    let get = |f: &str| snaps.iter().find(|s| s.field == f).unwrap();
    let v = get("v");
    assert_eq!((v.components, v.dims.clone()), (2, vec![9, 9]));
    assert!(v.values.iter().all(|&x| x == 0.0));
    for (field, value) in [("rho", 3.0), ("detF", 1.0), ("z", 0.5)] {
        let snap = get(field);
        assert_eq!(snap.values.len(), 81);
        assert!(
            snap.values.iter().all(|x| (x - value).abs() < 1e-12),
            "{field}"
        );
    }
}

#[test]
fn snapshot_text_round_trips_at_nine_digits() {
    let snap = Snapshot {
        field: "v".into(),
        components: 2,
        dims: vec![2, 3],
        lower: vec![0.0, -1.0],
        upper: vec![1.0, 1.0],
        time: 0.1,
        values: (0..12).map(|i| (i as f64 * 0.7).sin() / 3.0).collect(),
    };
    let mut buf = Vec::new();
    snapshot::write_to(&mut buf, &snap).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("# field v\n# components 2\n# dims 2 3\n"));
    let back = snapshot::parse(&text).unwrap();
    assert_eq!(back.dims, snap.dims);
    assert_eq!(back.values.len(), 12);
    for (a, b) in snap.values.iter().zip(&back.values) {
        assert_eq!(fmt9(*a).parse::<f64>().unwrap().to_bits(), b.to_bits());
    }
}

#[test]
fn ledger_delta_requires_matching_times() {
    let mut a = [[0.0; 14]; 2];
    a[1][0] = 0.1;
    a[1][3] = 2.0;
    let mut b = a;
    b[1][3] = 2.2;
    assert!((ledger_delta(&a, &b).unwrap() - relative_delta(2.0, 2.2)).abs() < 1e-15);
    b[1][0] = 0.2;
    assert_eq!(ledger_delta(&a, &b), None);
    assert_eq!(relative_delta(0.0, 0.0), 0.0);
}

#[test]
fn sweep_writes_sub_runs_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let entries = sweep::sweep(&base(), "epsilon", &[0.1, 0.05], dir.path()).unwrap();
    assert_eq!(entries.len(), 2);
    assert!(entries.iter().all(|e| e.exit_code == 0));
    assert_eq!(entries[1].ledger_delta, Some(0.0));
    let table = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(table.starts_with("epsilon,exit,"));
    assert!(dir
        .path()
        .join("epsilon_1e-1")
        .join("manifest.json")
        .exists());
    assert!(sweep::apply(&base(), "bogus", 1.0).is_err());
    assert!(sweep::apply(&base(), "degree", 2.5).is_err());
}

#[test]
fn adversarial_scenario_fails_with_loss_of_positivity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = Config::load(&scenario_path("adversarial/compression-failure")).unwrap();
    let out = run(&cfg, dir.path(), &RunOptions::default());
    assert_eq!(out.exit_code(), 3);
    assert!(matches!(
        out.error.as_ref().and_then(|e| e.root_cause()),
        Some(Error::LossOfPositivity { .. })
    ));
    assert_eq!(out.manifest.status, "solver_failure");
    assert!(out
        .manifest
        .root_cause
        .as_deref()
        .unwrap()
        .starts_with("loss of positivity"));
}

#[test]
fn binary_check_material_and_run() {
    let exe = env!("CARGO_BIN_EXE_eulerswell");
    let ok = Command::new(exe)
        .args([
            "check-material",
            scenario_path("shear").to_str().unwrap(),
            "--samples",
            "100",
        ])
        .output()
        .unwrap();
    assert!(ok.status.success());

    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bad.toml");
    fs::write(&cfg_path, format!("{BASE}\n[material]\nbeta = -2.0\n")).unwrap();
    let bad = Command::new(exe)
        .args(["check-material", cfg_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("swelling_positive"));

    fs::write(&cfg_path, BASE).unwrap();
    let out_dir = dir.path().join("out");
    let runs = Command::new(exe)
        .args([
            "run",
            cfg_path.to_str().unwrap(),
            "-o",
            out_dir.to_str().unwrap(),
            "--until",
            "0.004",
        ])
        .output()
        .unwrap();
    assert!(
        runs.status.success(),
        "{}",
        String::from_utf8_lossy(&runs.stderr)
    );
    assert_eq!(
        fs::read_to_string(out_dir.join("ledger.csv"))
            .unwrap()
            .lines()
            .count(),
        4
    );

    fs::write(&cfg_path, BASE.replace("t_end = 0.01", "t_end = -1")).unwrap();
    let rejected = Command::new(exe)
        .args([
            "run",
            cfg_path.to_str().unwrap(),
            "-o",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(rejected.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&rejected.stderr).starts_with("error: config error at time"));
}
