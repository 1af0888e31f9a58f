use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn lio(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lio")).args(args).env_remove("LIO_SEED").output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = lio(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn f(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("{key} missing in {v}"))
}

#[test]
fn evaluate_two_photon_noon_at_best_phase() {
    let dir = tempfile::tempdir().unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let path = write(dir.path(), "noon.json", &format!(r#"{{"n":2,"amplitudes":[[{s},0],[0,0],[{s},0]]}}"#));
    let report = ok_json(&["evaluate", path.to_str().unwrap(), "--phi", "best"]);
    assert!((f(&report, "fisher") - 4.0).abs() < 1e-9);
    assert!((f(&report, "delta_phi") - 0.5).abs() < 1e-9);
    assert!((f(&report, "total_probability") - 1.0).abs() < 1e-12);
    assert_eq!(report["outcomes"].as_array().unwrap().len(), 6);
}

#[test]
fn evaluate_flags_states_without_phase_information() {
    let dir = tempfile::tempdir().unwrap();
    let fock = write(dir.path(), "fock.json", r#"{"n":1,"amplitudes":[[1,0],[0,0]]}"#);
    let vacuum = write(dir.path(), "vac.json", r#"{"n":0,"amplitudes":[[1,0]]}"#);
    for path in [&fock, &vacuum] {
        let out = lio(&["evaluate", path.to_str().unwrap(), "--ra", "3", "--phi", "0.4"]);
        assert!(out.status.success());
        let report: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(f(&report, "fisher"), 0.0);
        assert_eq!(report["phase_sensitive"], false);
        assert_eq!(report["note"], "no phase sensitivity");
        assert!(String::from_utf8_lossy(&out.stderr).contains("no phase sensitivity"));
    }
}

#[test]
fn evaluate_writes_report_and_density_dump() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "s.json", r#"{"n":2,"amplitudes":[[0.6,0],[0,0.8],[0,0]]}"#);
    let out = dir.path().join("report.json");
    let rho = dir.path().join("rho.json");
    let stdout = ok_json(&[
        "evaluate",
        state.to_str().unwrap(),
        "--ra",
        "2",
        "--rb",
        "1",
        "--phi",
        "0.3",
        "--out",
        out.to_str().unwrap(),
        "--density",
        rho.to_str().unwrap(),
    ]);
    let from_file: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(stdout["fisher"], from_file["fisher"]);
    let dump: Value = serde_json::from_str(&std::fs::read_to_string(&rho).unwrap()).unwrap();
    assert_eq!(dump["blocks"].as_array().unwrap().len(), 3);
    assert_eq!(from_file["manifest"]["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn malformed_inputs_exit_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("garbage.json", "not json"),
        ("short.json", r#"{"n":2,"amplitudes":[[1,0]]}"#),
        ("unnormalized.json", r#"{"n":1,"amplitudes":[[0.7,0],[0.7,0]]}"#),
        ("zero.json", r#"{"n":1,"amplitudes":[[0,0],[0,0]]}"#),
    ];
    for (name, text) in cases {
        let path = write(dir.path(), name, text);
        let out = lio(&["evaluate", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(3), "{name}");
        assert!(!out.stderr.is_empty());
    }
    let out = lio(&["evaluate", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let unnormalized = dir.path().join("unnormalized.json");
    let stderr = String::from_utf8_lossy(&lio(&["evaluate", unnormalized.to_str().unwrap()]).stderr).to_string();
    assert!(stderr.contains("norm"), "{stderr}");
}

#[test]
fn invalid_arguments_exit_with_usage_error() {
    for args in [
        vec!["optimize", "--n", "0"],
        vec!["optimize", "--n", "3", "--ra", "-1"],
        vec!["optimize", "--n", "3", "--method", "annealing"],
        vec!["optimize"],
        vec!["sweep", "--n", "3", "--ra-range", "5:1:1"],
        vec!["sweep", "--n", "3", "--rb", "sometimes"],
        vec!["scaling", "--ns", "1,2"],
        vec!["classical", "--t-range", "0:1:0.5"],
        vec!["--jobs", "0", "classical"],
    ] {
        assert_eq!(lio(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn optimize_recovers_noon_without_loss() {
    let r = ok_json(&["optimize", "--n", "4", "--seed", "11"]);
    assert!((f(&r, "fisher") - 16.0).abs() < 0.16);
    assert!(f(&r["overlaps"], "noon") >= 0.99);
    assert_eq!(r["manifest"]["command"], "optimize");
    assert_eq!(r["manifest"]["seed"], 11);
    assert_eq!(r["state"]["amplitudes"].as_array().unwrap().len(), 5);
}

#[test]
fn optimize_prefers_coherent_like_states_under_heavy_loss() {
    let r = ok_json(&["optimize", "--n", "4", "--ra", "15", "--seed", "2"]);
    assert!(f(&r["overlaps"], "gpcs") > f(&r["overlaps"], "noon"));
}

#[test]
fn single_photon_matches_tuned_classical_light() {
    let r = ok_json(&["optimize", "--n", "1", "--ra", "3", "--seed", "5"]);
    let t = 10f64.powf(-3.0 / 20.0);
    let classical = 4.0 * t * t / (1.0 + t).powi(2);
    assert!((f(&r, "fisher") - classical).abs() / classical < 0.01);
}

#[test]
fn evaluate_reproduces_optimized_fisher() {
    let dir = tempfile::tempdir().unwrap();
    let result = dir.path().join("result.json");
    let state = dir.path().join("state.json");
    let out = lio(&[
        "optimize",
        "--n",
        "3",
        "--ra",
        "4",
        "--rb",
        "2",
        "--phi",
        "0.25",
        "--seed",
        "9",
        "--out",
        result.to_str().unwrap(),
        "--state-out",
        state.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let recorded: Value = serde_json::from_str(&std::fs::read_to_string(&result).unwrap()).unwrap();
    let fisher = f(&recorded, "fisher");
    let from_result = ok_json(&["evaluate", result.to_str().unwrap()]);
    assert!((f(&from_result, "fisher") - fisher).abs() < 1e-9);
    let from_state = ok_json(&["evaluate", state.to_str().unwrap(), "--ra", "4", "--rb", "2", "--phi", "0.25"]);
    assert!((f(&from_state, "fisher") - fisher).abs() < 1e-9);
}

#[test]
fn seed_falls_back_to_environment_and_is_always_recorded() {
    let by_flag = ok_json(&["optimize", "--n", "2", "--ra", "1", "--seed", "42"]);
    let out = Command::new(env!("CARGO_BIN_EXE_lio"))
        .args(["optimize", "--n", "2", "--ra", "1"])
        .env("LIO_SEED", "42")
        .output()
        .unwrap();
    let by_env: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(by_env["manifest"]["seed"], 42);
    assert_eq!(by_env["state"], by_flag["state"]);

    let drawn = ok_json(&["optimize", "--n", "2", "--ra", "1"]);
    assert!(drawn["manifest"]["seed"].is_u64());
}

#[test]
fn thread_count_does_not_change_results() {
    let strip = |mut v: Value| {
        v["manifest"]["duration_s"] = Value::Null;
        v
    };
    let one = strip(ok_json(&["--jobs", "1", "optimize", "--n", "4", "--ra", "2", "--seed", "3"]));
    let many = strip(ok_json(&["--jobs", "3", "optimize", "--n", "4", "--ra", "2", "--seed", "3"]));
    assert_eq!(one, many);
}

#[test]
fn strict_mode_fails_on_disagreeing_families() {
    let out = lio(&["optimize", "--n", "8", "--ra", "6", "--max-evals", "200", "--seed", "3", "--strict"]);
    assert_eq!(out.status.code(), Some(4));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["suspect"], true);
    assert!(f(&r, "consensus_spread") > 0.01);
}

#[test]
fn lockstep_sweep_degrades_monotonically() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = lio(&["sweep", "--n", "6", "--ra-range", "0:20:2", "--rb", "lockstep", "--seed", "1", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "n,ra_db,rb_db,fisher,delta_phi,delta_phi_tilde,ov_noon,ov_mm,ov_gpcs,cl_fixed,cl_opt,spread"
    );
    let (header, rows) = csv_rows(&text);
    assert_eq!(rows.len(), 11);
    let (dphi, ra, rb) = (column(&header, "delta_phi"), column(&header, "ra_db"), column(&header, "rb_db"));
    assert!((rows[0][dphi] - 1.0 / 6.0).abs() / (1.0 / 6.0) < 0.01);
    for pair in rows.windows(2) {
        assert!(pair[1][dphi] >= pair[0][dphi] * (1.0 - 1e-9), "{pair:?}");
    }
    assert!(rows.iter().all(|r| r[ra] == r[rb]));
    let sidecar: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.json")).unwrap()).unwrap();
    assert_eq!(sidecar["manifest"]["command"], "sweep");
    assert_eq!(sidecar["failures"].as_array().unwrap().len(), 0);
    assert_eq!(sidecar["states"].as_array().unwrap().len(), 11);
}

#[test]
fn zero_loss_sweep_row_is_heisenberg_limited() {
    let out = lio(&["sweep", "--n", "3", "--ra-range", "0:2:1", "--seed", "4"]);
    assert!(out.status.success());
    let (header, rows) = csv_rows(&String::from_utf8(out.stdout).unwrap());
    let (dphi, cl_fixed, cl_opt) = (column(&header, "delta_phi"), column(&header, "cl_fixed"), column(&header, "cl_opt"));
    assert!((rows[0][dphi] - 1.0 / 3.0).abs() < 0.01 / 3.0);
    assert!((rows[0][cl_fixed] - 1.0).abs() < 1e-12);
    for r in &rows[1..] {
        assert!(r[cl_opt] < r[cl_fixed]);
    }
}

#[test]
fn classical_table_limits() {
    let out = lio(&["classical", "--ra-range", "0:40:5"]);
    assert!(out.status.success());
    let (header, rows) = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, ["t2", "r_db", "fixed", "optimized", "theta_opt"]);
    let (fixed, opt) = (column(&header, "fixed"), column(&header, "optimized"));
    assert_eq!((rows[0][fixed], rows[0][opt]), (1.0, 1.0));
    for r in &rows {
        assert!(r[opt] >= r[fixed]);
    }
    let last = rows.last().unwrap();
    let t2 = last[column(&header, "t2")];
    let exact = 2.0 * (1.0 + t2) / (1.0 + t2.sqrt()).powi(2);
    assert!((last[opt] / last[fixed] - exact).abs() < 1e-9);

    let by_t = lio(&["classical", "--t-range", "0.5:1:0.25"]);
    let (_, rows) = csv_rows(&String::from_utf8(by_t.stdout).unwrap());
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][0], 0.25);
}

#[test]
fn classical_writes_csv_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("classical.csv");
    assert!(lio(&["classical", "--out", path.to_str().unwrap()]).status.success());
    let (_, rows) = csv_rows(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(rows.len(), 41);
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("classical.json")).unwrap()).unwrap();
    assert_eq!(meta["manifest"]["command"], "classical");
}

#[test]
fn scaling_without_loss_is_heisenberg() {
    let report = ok_json(&["scaling", "--ns", "1,2,3,4", "--seed", "6"]);
    let x = f(&report["fit"], "exponent");
    assert!((x - 1.0).abs() < 0.02, "{x}");
    assert_eq!(report["points"].as_array().unwrap().len(), 4);
    assert!(report["error"].is_null());
}

#[test]
fn characterize_composition_from_lossless_to_lossy() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("comp.csv");
    let out = lio(&["characterize", "--n", "4", "--ra-range", "0:15:15", "--seed", "1", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&std::fs::read_to_string(&csv).unwrap());
    let c: Vec<usize> = (0..=4).map(|k| column(&header, &format!("c2_{k}"))).collect();
    let lossless = &rows[0];
    assert!((lossless[c[0]] - 0.5).abs() < 1e-3 && (lossless[c[4]] - 0.5).abs() < 1e-3);
    assert!(c[1..4].iter().all(|&i| lossless[i] < 1e-3));

    let lossy = &rows[1];
    let pops: Vec<f64> = c.iter().map(|&i| lossy[i]).collect();
    let k = (0..=4).max_by(|&a, &b| pops[a].total_cmp(&pops[b])).unwrap();
    assert!(pops[k] - pops[4 - k] > 0.05, "{pops:?}");
    assert!(lossy[column(&header, "ov_gpcs")] > lossy[column(&header, "ov_noon")]);

    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("comp.json")).unwrap()).unwrap();
    assert_eq!(meta["crossover"]["first_gpcs_above_noon_db"], 15.0);
    assert_eq!(meta["axes"]["x"]["unit"], "dB");
}

#[test]
fn characterize_reads_result_files() {
    let dir = tempfile::tempdir().unwrap();
    let result = dir.path().join("r.json");
    assert!(lio(&["optimize", "--n", "2", "--ra", "3", "--seed", "1", "--out", result.to_str().unwrap()]).status.success());
    let recorded: Value = serde_json::from_str(&std::fs::read_to_string(&result).unwrap()).unwrap();
    let out = lio(&["characterize", "--result", result.to_str().unwrap()]);
    assert!(out.status.success());
    let (header, rows) = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 1);
    assert!((rows[0][column(&header, "fisher")] - f(&recorded, "fisher")).abs() < 1e-9);
    assert!((rows[0][column(&header, "ov_noon")] - f(&recorded["overlaps"], "noon")).abs() < 1e-9);
}
