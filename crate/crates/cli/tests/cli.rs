use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use orbitforge::montecarlo::{execute_simulations, McPlan};
use orbitforge::scenario::{build_scenario, export_csv, load_config, run_scenario, ScenarioKind};

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/presets").join(name)
}

fn orbitforge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbitforge"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_earth_orbit_writes_1001_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset("earth_orbit.yaml");
    let o = orbitforge(
        dir.path(),
        &["run", cfg.to_str().unwrap(), "--kind", "earthOrbit", "--csv", "out.csv"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1002);
    assert!(stdout(&o).contains("1001 samples"));
    assert!(!stdout(&o).contains("sigma_BR"));
}

#[test]
fn attitude_summary_reports_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset("attitude_control.yaml");
    let o = orbitforge(
        dir.path(),
        &[
            "run",
            cfg.to_str().unwrap(),
            "--kind",
            "attitudeControl",
            "--mode",
            "hillPoint",
            "--stop-s",
            "600",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let norm: f64 = out
        .trim()
        .rsplit_once("final |sigma_BR| ")
        .expect("summary has |sigma_BR|")
        .1
        .parse()
        .unwrap();
    assert!(norm < 1e-3, "{out}");
    assert!(out.contains("final time 600.000 s"));
}

#[test]
fn cli_output_matches_library_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = preset("sun_earth.yaml");
    let o = orbitforge(
        dir.path(),
        &[
            "run",
            cfg_path.to_str().unwrap(),
            "--csv",
            "cli.csv",
            "--num-points",
            "11",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));

    let mut cfg = load_config(&fs::read_to_string(&cfg_path).unwrap()).unwrap().config;
    cfg.simulation.num_data_points = Some(11);
    let mut inst = build_scenario(&cfg, ScenarioKind::SunEarth).unwrap();
    let out = run_scenario(&mut inst, None, None).unwrap();
    export_csv(&out, &dir.path().join("lib.csv")).unwrap();
    assert_eq!(
        fs::read(dir.path().join("cli.csv")).unwrap(),
        fs::read(dir.path().join("lib.csv")).unwrap()
    );
}

#[test]
fn invalid_inertia_exits_2_with_triangle_message() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(preset("basic_orbit.yaml")).unwrap().replace(
        "[900.0, 0.0, 0.0, 0.0, 800.0, 0.0, 0.0, 0.0, 700.0]",
        "[1000.0, 0.0, 0.0, 0.0, 100.0, 0.0, 0.0, 0.0, 100.0]",
    );
    fs::write(dir.path().join("bad.yaml"), text).unwrap();
    let o = orbitforge(dir.path(), &["run", "bad.yaml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("triangle"), "{}", stderr(&o));

    let o = orbitforge(dir.path(), &["validate", "bad.yaml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("INVALID"));
    assert!(stderr(&o).contains("spacecraft.inertia"), "{}", stderr(&o));
}

#[test]
fn validate_reports_paths() {
    let dir = tempfile::tempdir().unwrap();
    let golden = preset("standalone_config.yaml");
    let o = orbitforge(dir.path(), &["validate", golden.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("valid"));

    let text = fs::read_to_string(&golden)
        .unwrap()
        .replace("time_step:               1.0", "time_step: 0.0");
    fs::write(dir.path().join("zero.yaml"), text).unwrap();
    let o = orbitforge(dir.path(), &["validate", "zero.yaml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("simulation.time_step"), "{}", stderr(&o));
}

#[test]
fn missing_config_and_bad_flags_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = orbitforge(dir.path(), &["run", "nope.yaml"]);
    assert_eq!(o.status.code(), Some(2));
    let cfg = preset("earth_orbit.yaml");
    let o = orbitforge(dir.path(), &["run", cfg.to_str().unwrap(), "--mode", "hillPoint"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no flight software"));
    let o = orbitforge(dir.path(), &["run", cfg.to_str().unwrap(), "--kind", "marsOrbit"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset("earth_orbit.yaml");
    let o = orbitforge(
        dir.path(),
        &["run", cfg.to_str().unwrap(), "--csv", "missing_dir/out.csv"],
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn exec_order_trees() {
    let dir = tempfile::tempdir().unwrap();
    let o = orbitforge(
        dir.path(),
        &["exec-order", preset("attitude_control.yaml").to_str().unwrap()],
    );
    assert!(o.status.success());
    let text = stdout(&o);
    let p: Vec<usize> = ["[300]", "[201]", "[200]", "[199]"]
        .iter()
        .map(|t| text.find(t).unwrap())
        .collect();
    assert!(p.windows(2).all(|w| w[0] < w[1]), "{text}");

    let o = orbitforge(
        dir.path(),
        &["exec-order", preset("basic_orbit.yaml").to_str().unwrap()],
    );
    let modules: Vec<String> = stdout(&o)
        .lines()
        .filter(|l| l.starts_with("    "))
        .map(str::to_string)
        .collect();
    assert_eq!(modules, ["    bsk_sat", "    scStateOutMsgRecorder"]);
}

#[test]
fn exec_order_flags_orphans() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(preset("earth_orbit.yaml"))
        .unwrap()
        .replace("  name: bsk_sat", "  name: bsk_sat\n  add_to_task: false");
    fs::write(dir.path().join("orphan.yaml"), text).unwrap();
    let o = orbitforge(dir.path(), &["exec-order", "orphan.yaml"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("orphan bsk_sat"), "{}", stdout(&o));
    assert!(stderr(&o).contains("not added to any task"), "{}", stderr(&o));
}

#[test]
fn mc_archive_policy_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset("earth_orbit.yaml");
    let cfg = cfg.to_str().unwrap();
    let args = |archive: &'static str| {
        vec![
            "mc",
            cfg,
            "--runs",
            "5",
            "--seed",
            "42",
            "--workers",
            "2",
            "--archive",
            archive,
            "--num-points",
            "11",
            "--disperse",
            "uniform:spacecraft.mass:700:800",
            "--disperse",
            "normal_vector_cart:spacecraft.r_CN_N_init:1000",
        ]
    };
    let o = orbitforge(dir.path(), &args("a"));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("run 4: success"));
    assert!(stdout(&o).contains("5/5 runs succeeded"));

    let o = orbitforge(dir.path(), &args("a"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--force"));

    let mut forced = args("a");
    forced.push("--force");
    assert!(orbitforge(dir.path(), &forced).status.success());
    assert!(orbitforge(dir.path(), &args("b")).status.success());
    assert_eq!(
        fs::read(dir.path().join("a/manifest.json")).unwrap(),
        fs::read(dir.path().join("b/manifest.json")).unwrap()
    );

    let o = orbitforge(
        dir.path(),
        &["mc", cfg, "--archive", "c", "--disperse", "uniform:spacecraft.mass:9:1"],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn single_mc_run_matches_run_command() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset("earth_orbit.yaml");
    let cfg = cfg.to_str().unwrap();
    assert!(orbitforge(dir.path(), &["run", cfg, "--csv", "plain.csv"])
        .status
        .success());
    assert!(orbitforge(dir.path(), &["mc", cfg, "--runs", "1", "--archive", "mc"])
        .status
        .success());
    assert_eq!(
        fs::read(dir.path().join("plain.csv")).unwrap(),
        fs::read(dir.path().join("mc/run_0/outputs.csv")).unwrap()
    );

    let base = load_config(&fs::read_to_string(cfg).unwrap()).unwrap().config;
    let lib = execute_simulations(&McPlan::new(ScenarioKind::EarthOrbit, base, 1, dir.path().join("lib"))).unwrap();
    assert_eq!(
        fs::read(dir.path().join("mc/manifest.json")).unwrap(),
        fs::read(lib.manifest_path()).unwrap()
    );
}

#[test]
fn help_for_each_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["run", "mc", "exec-order", "validate"] {
        let o = orbitforge(dir.path(), &[sub, "--help"]);
        assert!(o.status.success(), "{sub}");
        assert!(stdout(&o).contains("Usage"), "{sub}");
    }
}
