use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const FAST_ANNEAL: &str = "[anneal]\nt0 = 0.1\nt_min = 1e-5\ngamma = 0.8\nn_steps = 40\nrestarts = 2\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_povm-spt"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn table1_csv_has_provenance_and_pum_cells() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "t1.toml", &format!("n_effects = [4]\n{FAST_ANNEAL}"));
    let out = stdout(&run(&["table1", "--config", &cfg, "--seed", "5"]));
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "row,state,observable,method,n_effects,kappa_sq,provenance,seed,config_hash,version"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert_eq!(r[7], "5");
        assert_eq!(r[8].len(), 64);
        assert_eq!(r[9], env!("CARGO_PKG_VERSION"));
    }
    let pum: Vec<_> = rows.iter().filter(|r| r[3] == "pum_bound").collect();
    assert_eq!(pum.len(), 2);
    assert!(pum.iter().all(|r| r[5] == "64"));
    assert!(rows.iter().any(|r| r[3] == "cum" && r[5] == "448" && r[6] == "reported_unverified"));
}

#[test]
fn reruns_are_byte_identical_and_written_to_out() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "f3.toml", &format!("sizes = [1, 3]\nn_effects = [4, 6]\n{FAST_ANNEAL}"));
    let out = dir.path().join("results");
    let out_s = out.to_string_lossy().into_owned();
    for _ in 0..2 {
        let o = run(&["fig3", "--config", &cfg, "--seed", "9", "--out", &out_s]);
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
    }
    let first = fs::read_to_string(out.join("fig3.csv")).unwrap();
    let again = stdout(&run(&["fig3", "--config", &cfg, "--seed", "9"]));
    assert_eq!(first, again);
    assert_eq!(first.lines().count(), 5);
    let other_seed = stdout(&run(&["fig3", "--config", &cfg, "--seed", "10"]));
    assert_ne!(first, other_seed);
}

#[test]
fn fig4_json_envelope() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "f4.json",
        r#"{"qubits": [2, 64], "n_effects": [6], "anneal": {"t0": 0.1, "t_min": 1e-5, "gamma": 0.8, "n_steps": 40, "restarts": 2}}"#,
    );
    let v: Value = serde_json::from_str(&stdout(&run(&["fig4", "--config", &cfg, "--format", "json"]))).unwrap();
    assert_eq!(v["experiment"], "fig4");
    assert_eq!(v["seed"], 1);
    assert_eq!(v["config"]["qubits"][1], 64);
    let pts = v["result"].as_array().unwrap();
    let pum: Vec<_> = pts.iter().filter(|p| p["series"] == "pum_bound").collect();
    assert_eq!(pum.len(), 2);
    assert!(pum.iter().all(|p| p["log2_per_qubit"] == 6.0));
    assert_eq!(pum[1]["log2_kappa_sq"], 384.0);
}

#[test]
fn norm_reports_pauli6_value() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "n.json", r#"{"states": ["zero"], "observables": ["x"]}"#);
    let v: Value = serde_json::from_str(&stdout(&run(&["norm", "--config", &cfg]))).unwrap();
    let value = v["result"]["kappa_sq"]["value"].as_f64().unwrap();
    assert!((value - 18.0).abs() < 1e-12);
    assert_eq!(v["result"]["pum_bound_at_argmax"], 64.0);
}

#[test]
fn simulate_from_toml() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        "states = [\"zero\"]\nobservables = [\"z\"]\nepsilon = 0.25\ndelta = 0.1\nruns = 3\n\n[channel]\nkind = \"depolarizing\"\np = 0.5\n",
    );
    let v: Value = serde_json::from_str(&stdout(&run(&["simulate", "--config", &cfg, "--seed", "3"]))).unwrap();
    let runs = v["result"]["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 3);
    assert_eq!(runs[1]["seed"], 4);
    let truth = runs[0]["estimates"][0]["truth"].as_f64().unwrap();
    assert!((truth - 0.5).abs() < 1e-12);
    assert!(v["result"]["coverage"].as_f64().unwrap() >= 0.0);
}

#[test]
fn optimize_returns_valid_povm() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "o.toml",
        &format!("n_effects = 6\nfamily = {{ haar = 20 }}\n{FAST_ANNEAL}"),
    );
    let v: Value = serde_json::from_str(&stdout(&run(&["optimize", "--config", &cfg]))).unwrap();
    let r = &v["result"];
    assert_eq!(r["best_povm"]["n"], 6);
    assert_eq!(r["best_povm"]["vectors"].as_array().unwrap().len(), 6);
    assert!(r["best_energy"].as_f64().unwrap() >= 1.0);
}

#[test]
fn validation_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad_field = write(dir.path(), "b.toml", "bogus = 1\n");
    assert_eq!(run(&["table1", "--config", &bad_field]).status.code(), Some(2));
    let bad_gamma = write(dir.path(), "g.toml", "n_effects = [4]\n[anneal]\ngamma = 1.5\n");
    assert_eq!(run(&["table1", "--config", &bad_gamma]).status.code(), Some(2));
    let bad_channel = write(
        dir.path(),
        "c.json",
        r#"{"channel": {"kind": "depolarizing", "p": 3.0}, "states": ["zero"], "observables": ["z"], "epsilon": 0.2, "delta": 0.1}"#,
    );
    assert_eq!(run(&["simulate", "--config", &bad_channel]).status.code(), Some(2));
    assert_eq!(run(&["norm"]).status.code(), Some(2));
    assert_eq!(run(&["compare", "--format", "csv"]).status.code(), Some(2));
    assert_eq!(run(&["fig9"]).status.code(), Some(2));
    let o = bin()
        .args(["norm"])
        .env("POVM_SPT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn io_errors_exit_3() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.toml");
    assert_eq!(run(&["table1", "--config", &missing.to_string_lossy()]).status.code(), Some(3));
    let blocker = write(dir.path(), "file", "");
    let cfg = write(dir.path(), "n.json", r#"{"states": ["zero"], "observables": ["x"]}"#);
    let o = run(&["norm", "--config", &cfg, "--out", &format!("{blocker}/sub")]);
    assert_eq!(o.status.code(), Some(3));
}
