use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use koopman_core::benchmarks::{integrate_rk4, SystemSpec};
use koopman_core::io::{default_header, parse_csv, write_csv};
use koopman_core::nalgebra::DMatrix;

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }

    fn write(&self, name: &str, text: &str) -> String {
        std::fs::write(self.path(name), text).unwrap();
        self.arg(name)
    }

    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.path(name)).unwrap()
    }

    fn entries(&self) -> Vec<String> {
        let mut v: Vec<String> = std::fs::read_dir(self.dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        v.sort();
        v
    }
}

fn koopman(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_koopman")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn with_time(traj: &DMatrix<f64>, dt: f64) -> DMatrix<f64> {
    DMatrix::from_fn(traj.nrows(), traj.ncols() + 1, |i, j| if j == 0 { i as f64 * dt } else { traj[(i, j - 1)] })
}

fn slow_manifold_csv() -> String {
    let spec = SystemSpec::new("slow_manifold").unwrap();
    let mut blocks = Vec::new();
    for a in [-1.0, -0.3, 0.4, 1.0] {
        for b in [-0.8, 0.2, 0.9] {
            blocks.push(with_time(&integrate_rk4(&spec, &[a, b], 0.02, 300, None).unwrap(), 0.02));
        }
    }
    write_csv(Some(&default_header(2, 0)), &blocks)
}

const POLY2: &str = r#"{"observables": {"kind": "polynomial", "degree": 2}, "regressor": {"kind": "edmd"}}"#;
const DMD: &str = r#"{"regressor": {"kind": "dmd"}}"#;

fn eig_csv_rows(text: &str) -> Vec<Vec<f64>> {
    let csv = parse_csv(text).unwrap();
    let header = csv.header.as_deref().unwrap();
    assert_eq!(header[..6], ["index", "lambda_re", "lambda_im", "mu_re", "mu_im", "abs_lambda"]);
    assert!(header.len() == 6 || header[6] == "linearity");
    let block = &csv.blocks[0];
    (0..block.nrows()).map(|i| block.row(i).iter().copied().collect()).collect()
}

#[test]
fn fit_recovers_slow_manifold_rates() {
    let ws = Workspace::new();
    let data = ws.write("train.csv", &slow_manifold_csv());
    let config = ws.write("config.json", POLY2);
    let model = ws.arg("model.json");
    let out = koopman(&["fit", "--config", &config, "--data", &data, "--out", &model]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("rank"));

    let out = koopman(&["eig", "--model", &model, "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let mus: Vec<f64> = eig_csv_rows(&stdout(&out)).iter().map(|r| r[3]).collect();
    for target in [-0.05, -0.1, -1.0] {
        assert!(mus.iter().any(|m| (m - target).abs() < 1e-4), "{target} not in {mus:?}");
    }
}

#[test]
fn fit_report_as_json() {
    let ws = Workspace::new();
    let data = ws.write("train.csv", &slow_manifold_csv());
    let config = ws.write("config.json", POLY2);
    let out = koopman(&["--json", "fit", "--config", &config, "--data", &data, "--out", &ws.arg("m.json")]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["rank"], 6);
    assert_eq!(report["m"], 12 * 300);
}

#[test]
fn quiet_fit_prints_nothing() {
    let ws = Workspace::new();
    let data = ws.write("train.csv", &slow_manifold_csv());
    let config = ws.write("config.json", POLY2);
    let out = koopman(&["--quiet", "fit", "--config", &config, "--data", &data, "--out", &ws.arg("m.json")]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
}

#[test]
fn config_output_path_is_used() {
    let ws = Workspace::new();
    let data = ws.write("train.csv", &slow_manifold_csv());
    let target = ws.arg("from_config.json");
    let config = ws.write(
        "config.json",
        &format!(r#"{{"regressor": {{"kind": "edmd"}}, "output": {}}}"#, serde_json::to_string(&target).unwrap()),
    );
    let out = koopman(&["fit", "--config", &config, "--data", &data]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(Path::new(&target).exists());
}

#[test]
fn bad_configs_exit_2_without_output() {
    let ws = Workspace::new();
    let data = ws.write("train.csv", &slow_manifold_csv());
    let model = ws.arg("model.json");
    for text in [
        "{",
        r#"{"regressor": {"kind": "edmd"}, "extra": true}"#,
        r#"{"regressor": {"kind": "edmd", "rnak": 3}}"#,
        r#"{"regressor": {"kind": "unknown"}}"#,
        r#"{"observables": {"kind": "polynomial"}, "regressor": {"kind": "edmd"}}"#,
    ] {
        let config = ws.write("config.json", text);
        let before = ws.entries();
        let out = koopman(&["fit", "--config", &config, "--data", &data, "--out", &model]);
        assert_eq!(code(&out), 2, "config {text}: {}", stderr(&out));
        assert!(stderr(&out).starts_with("error:"));
        assert_eq!(ws.entries(), before);
    }
}

#[test]
fn single_sample_trajectory_exits_3() {
    let ws = Workspace::new();
    let data = ws.write("short.csv", "t,x1,x2\n0,1,2\n");
    let config = ws.write("config.json", DMD);
    let out = koopman(&["fit", "--config", &config, "--data", &data, "--out", &ws.arg("m.json")]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("trajectory too short"), "{}", stderr(&out));
    assert!(!ws.path("m.json").exists());
}

#[test]
fn degenerate_data_exits_4() {
    let ws = Workspace::new();
    let data = ws.write("zeros.csv", "t,x1,x2\n0,0,0\n1,0,0\n2,0,0\n");
    let config = ws.write("config.json", DMD);
    let out = koopman(&["fit", "--config", &config, "--data", &data, "--out", &ws.arg("m.json")]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    assert!(!ws.path("m.json").exists());
}

#[test]
fn corrupt_model_exits_3() {
    let ws = Workspace::new();
    let model = ws.write("model.json", r#"{"schema_version": 1, "dt": 1.0}"#);
    let out = koopman(&["eig", "--model", &model]);
    assert_eq!(code(&out), 3);
    let out = koopman(&["simulate", "--model", &model, "--x0", "1,2", "--out", &ws.arg("sim.csv")]);
    assert_eq!(code(&out), 3);
    assert!(!ws.path("sim.csv").exists());
}

#[test]
fn unknown_names_exit_2() {
    let ws = Workspace::new();
    let data = ws.write("d.csv", "t,x1\n0,0\n1,1\n2,4\n");
    let out = koopman(&["diff", "--data", &data, "--method", "magic", "--out", &ws.arg("o.csv")]);
    assert_eq!(code(&out), 2);
    let out = koopman(&["bench", "--system", "pendulum"]);
    assert_eq!(code(&out), 2);
    let out = koopman(&["bench", "--system", "lorenz", "--params", "gamma=1"]);
    assert_eq!(code(&out), 2);
    let out = koopman(&["frobnicate"]);
    assert_eq!(code(&out), 2);
    assert_eq!(ws.entries(), ["d.csv"]);
}

#[test]
fn simulate_zero_steps_returns_initial_state() {
    let ws = Workspace::new();
    let data = ws.write("train.csv", &slow_manifold_csv());
    let config = ws.write("config.json", POLY2);
    let model = ws.arg("model.json");
    assert_eq!(code(&koopman(&["fit", "--config", &config, "--data", &data, "--out", &model])), 0);
    let out = koopman(&["simulate", "--model", &model, "--x0", "0.5,-0.25", "--steps", "0", "--out", &ws.arg("s.csv")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = parse_csv(&ws.read("s.csv")).unwrap();
    assert_eq!(csv.header.as_deref().unwrap(), ["t", "x1", "x2"]);
    assert_eq!(csv.blocks[0].nrows(), 1);
    assert_eq!(csv.blocks[0].row(0).iter().copied().collect::<Vec<_>>(), [0.0, 0.5, -0.25]);
}

#[test]
fn simulate_tracks_training_trajectory() {
    let ws = Workspace::new();
    let data = ws.write("train.csv", &slow_manifold_csv());
    let config = ws.write("config.json", POLY2);
    let model = ws.arg("model.json");
    assert_eq!(code(&koopman(&["fit", "--config", &config, "--data", &data, "--out", &model])), 0);
    let out = koopman(&["simulate", "--model", &model, "--x0", "-0.3,0.9", "--steps", "300", "--out", &ws.arg("s.csv")]);
    assert_eq!(code(&out), 0);
    let sim = parse_csv(&ws.read("s.csv")).unwrap().blocks.remove(0);
    let truth = integrate_rk4(&SystemSpec::new("slow_manifold").unwrap(), &[-0.3, 0.9], 0.02, 300, None).unwrap();
    assert_eq!(sim.nrows(), 301);
    for i in 0..301 {
        assert!((sim[(i, 0)] - i as f64 * 0.02).abs() < 1e-12);
        for j in 0..2 {
            assert!((sim[(i, j + 1)] - truth[(i, j)]).abs() < 1e-8);
        }
    }
}

#[test]
fn simulate_rejects_wrong_state_length() {
    let ws = Workspace::new();
    let data = ws.write("train.csv", &slow_manifold_csv());
    let config = ws.write("config.json", DMD);
    let model = ws.arg("model.json");
    assert_eq!(code(&koopman(&["fit", "--config", &config, "--data", &data, "--out", &model])), 0);
    let out = koopman(&["simulate", "--model", &model, "--x0", "1,2,3", "--out", &ws.arg("s.csv")]);
    assert_eq!(code(&out), 3);
    assert!(!ws.path("s.csv").exists());
}

#[test]
fn controlled_model_round_trip() {
    let ws = Workspace::new();
    let data = ws.arg("drss.csv");
    let out = koopman(&[
        "--seed", "3", "bench", "--system", "drss", "--params", "n=3,q=1", "--random-input", "--x0", "0.1,0.2,0.3",
        "--steps", "100", "--dt", "1", "--out", &data,
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(parse_csv(&ws.read("drss.csv")).unwrap().header.unwrap(), ["t", "x1", "x2", "x3", "u1"]);

    let config = ws.write("config.json", r#"{"regressor": {"kind": "dmdc"}}"#);
    let model = ws.arg("model.json");
    let out = koopman(&["fit", "--config", &config, "--data", &data, "--out", &model]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let out = koopman(&["simulate", "--model", &model, "--x0", "0,0,0", "--steps", "5", "--out", &ws.arg("s.csv")]);
    assert_eq!(code(&out), 3);
    assert!(!ws.path("s.csv").exists());

    let inputs = ws.write("u.csv", "u1\n1\n0\n0\n0\n0\n");
    let out = koopman(&[
        "simulate", "--model", &model, "--x0", "0,0,0", "--steps", "5", "--inputs", &inputs, "--out", &ws.arg("s.csv"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let sim = parse_csv(&ws.read("s.csv")).unwrap().blocks.remove(0);
    assert_eq!(sim.nrows(), 6);
    assert!(sim.row(1).iter().skip(1).any(|v| v.abs() > 0.0));
}

#[test]
fn eig_reports_linear_map_spectrum() {
    let ws = Workspace::new();
    let traj = DMatrix::from_fn(30, 2, |i, j| if j == 0 { 0.9f64.powi(i as i32) } else { -(0.5f64.powi(i as i32)) });
    let data = ws.write("diag.csv", &write_csv(Some(&default_header(2, 0)), &[with_time(&traj, 1.0)]));
    let config = ws.write("config.json", DMD);
    let model = ws.arg("model.json");
    assert_eq!(code(&koopman(&["fit", "--config", &config, "--data", &data, "--out", &model])), 0);

    let out = koopman(&["eig", "--model", &model, "--format", "csv"]);
    let mut abs: Vec<f64> = eig_csv_rows(&stdout(&out)).iter().map(|r| r[5]).collect();
    abs.sort_by(f64::total_cmp);
    assert!((abs[0] - 0.5).abs() < 1e-12 && (abs[1] - 0.9).abs() < 1e-12, "{abs:?}");

    let out = koopman(&["eig", "--model", &model, "--format", "json"]);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r["lambda"].as_array().unwrap().len() == 2));

    let out = koopman(&["eig", "--model", &model]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("lambda_re"));
}

#[test]
fn eig_linearity_on_linear_system() {
    let ws = Workspace::new();
    let data = ws.arg("lin.csv");
    assert_eq!(code(&koopman(&["bench", "--system", "linear2d", "--steps", "30", "--dt", "1", "--out", &data])), 0);
    let config = ws.write("config.json", DMD);
    let model = ws.arg("model.json");
    assert_eq!(code(&koopman(&["fit", "--config", &config, "--data", &data, "--out", &model])), 0);
    let out = koopman(&["eig", "--model", &model, "--format", "csv", "--data", &data]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows = eig_csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].len(), 7);
    for r in rows {
        assert!(r[6] <= 1e-6, "linearity {}", r[6]);
    }
}

#[test]
fn diff_fd2_of_parabola() {
    let ws = Workspace::new();
    let mut text = String::from("t,x1\n");
    for i in 0..20 {
        let t = i as f64 * 0.1;
        text.push_str(&format!("{t},{}\n", t * t));
    }
    let data = ws.write("p.csv", &text);
    let out = koopman(&["diff", "--data", &data, "--method", "fd2", "--out", &ws.arg("d.csv")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = parse_csv(&ws.read("d.csv")).unwrap();
    assert_eq!(csv.header.as_deref().unwrap(), ["t", "x1"]);
    let d = &csv.blocks[0];
    for i in 1..19 {
        assert!((d[(i, 1)] - 2.0 * d[(i, 0)]).abs() < 1e-12);
    }
}

#[test]
fn diff_rejects_nonuniform_time() {
    let ws = Workspace::new();
    let data = ws.write("p.csv", "t,x1\n0,0\n0.1,1\n0.3,2\n0.4,3\n");
    let out = koopman(&["diff", "--data", &data, "--out", &ws.arg("d.csv")]);
    assert_eq!(code(&out), 3);
    assert!(!ws.path("d.csv").exists());
}

#[test]
fn bench_layout() {
    let out = koopman(&["bench", "--system", "slow_manifold", "--steps", "10", "--dt", "0.1"]);
    assert_eq!(code(&out), 0);
    let csv = parse_csv(&stdout(&out)).unwrap();
    assert_eq!(csv.header.as_deref().unwrap(), ["t", "x1", "x2"]);
    let b = &csv.blocks[0];
    assert_eq!(b.nrows(), 11);
    assert_eq!((b[(0, 1)], b[(0, 2)]), (1.0, 1.0));
    assert!((b[(10, 0)] - 1.0).abs() < 1e-12);

    let out = koopman(&["bench", "--system", "forced_duffing", "--steps", "4", "--random-input"]);
    let csv = parse_csv(&stdout(&out)).unwrap();
    assert_eq!(csv.header.as_deref().unwrap(), ["t", "x1", "x2", "u1"]);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let ws = Workspace::new();
    let data = ws.write("train.csv", &slow_manifold_csv());
    let config = ws.write(
        "config.json",
        r#"{"observables": {"kind": "random_fourier", "n_features": 20, "seed": 4}, "regressor": {"kind": "edmd", "rank": 8}}"#,
    );
    for name in ["a", "b"] {
        let model = ws.arg(&format!("{name}.json"));
        assert_eq!(code(&koopman(&["fit", "--config", &config, "--data", &data, "--out", &model])), 0);
        let out = koopman(&["simulate", "--model", &model, "--x0", "0.2,0.3", "--steps", "50", "--out", &ws.arg(&format!("{name}.csv"))]);
        assert_eq!(code(&out), 0);
        let out = koopman(&["--seed", "9", "bench", "--system", "drss", "--random-input", "--out", &ws.arg(&format!("{name}_b.csv"))]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(ws.read("a.json"), ws.read("b.json"));
    assert_eq!(ws.read("a.csv"), ws.read("b.csv"));
    assert_eq!(ws.read("a_b.csv"), ws.read("b_b.csv"));
}
