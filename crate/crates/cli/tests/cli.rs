use std::path::Path;
use std::process::{Command, Output};

use qphlab_core::games::{GameInstance, Purity, Quantifier, QuantifierPrefix};
use qphlab_core::qstate::linalg;
use qphlab_core::qstate::random::random_effect;
use qphlab_core::{Layout, SeededRng};
use serde_json::Value;
use tempfile::tempdir;

fn qphlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qphlab")).args(args).env_remove("QPHLAB_THREADS").output().unwrap()
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn copy_game_values() {
    let v = json_stdout(&qphlab(&["copy-game", "--n", "1"]));
    assert_eq!(v["pure"], 1.0);
    assert_eq!(v["mixed"], 0.75);
    assert_eq!(v["pass"], true);
}

#[test]
fn qma2_curve_has_minimum_row() {
    let out = qphlab(&["qma2-curve", "--eps", "0", "--step", "0.05"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("eps,delta,value,is_min"));
    let min: Vec<f64> = lines
        .filter(|l| l.ends_with(",true"))
        .flat_map(|l| l.split(',').take(3).map(|x| x.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .collect();
    assert_eq!(min.len(), 3);
    assert!((min[1] - (2f64.sqrt() - 1.0)).abs() < 1e-12);
    assert!((min[2] - (3.0 - 2.0 * 2f64.sqrt()) / 2.0).abs() < 1e-12);
}

#[test]
fn peaked_from_file() {
    let dir = tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    std::fs::write(&inst, r#"{"N": 2, "p": [0.5, 0.5], "q": [0.5, 0.5], "S": [[0, 0]], "gamma": 0.5}"#).unwrap();
    let v = json_stdout(&qphlab(&["peaked", "--file", inst.to_str().unwrap(), "--seeds", "200", "--seed", "3"]));
    for key in ["mean_z", "gamma_eps", "std_error", "pass"] {
        assert!(!v[key].is_null(), "missing {key}: {v}");
    }
    // ε = 1/4, so γε = 1/8.
    assert!((v["gamma_eps"].as_f64().unwrap() - 0.125).abs() < 1e-12);
}

#[test]
fn game_solve_single_slot_is_top_eigenvalue() {
    let dir = tempdir().unwrap();
    let e = random_effect(&Layout::qubits(1), &mut SeededRng::new(11));
    let top = *linalg::eigvalsh(e.matrix()).last().unwrap();
    let prefix = QuantifierPrefix::alternating(Quantifier::Exists, &[2], Purity::Pure).unwrap();
    let game = GameInstance::new(e, prefix).unwrap();
    let path = dir.path().join("game.json");
    std::fs::write(&path, serde_json::to_string(&game).unwrap()).unwrap();
    for method in ["grid", "alternating"] {
        let v = json_stdout(&qphlab(&["game-solve", "--file", path.to_str().unwrap(), "--method", method, "--seed", "1"]));
        let value = v["value"].as_f64().unwrap();
        assert!(value <= top + 1e-9 && value >= top - 1e-3, "{method}: {value} vs {top}");
    }
}

#[test]
fn outputs_are_reproducible_across_thread_counts() {
    let dir = tempdir().unwrap();
    let mut runs = Vec::new();
    for (tag, threads) in [("a", "1"), ("b", "1"), ("c", "3")] {
        let out = dir.path().join(tag);
        let o = qphlab(&["swap-prob", "--seed", "7", "--pairs", "40", "--threads", threads, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let csv = std::fs::read(out.join("swap-prob.csv")).unwrap();
        let manifest = read(&out.join("swap-prob.manifest.json"));
        runs.push((csv, manifest));
    }
    for (csv, manifest) in &runs[1..] {
        assert_eq!(csv, &runs[0].0);
        assert_eq!(manifest["run"], runs[0].1["run"]);
        assert_eq!(manifest["run_sha256"], runs[0].1["run_sha256"]);
    }
    assert_eq!(runs[2].1["timing"]["threads"], 3);
    let other = qphlab(&["swap-prob", "--seed", "8", "--pairs", "40"]);
    assert_ne!(other.stdout, runs[0].0);
}

#[test]
fn missing_seed_is_a_config_error() {
    let out = qphlab(&["swap-prob", "--pairs", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"seed": 1, "params": {"pairz": 3}}"#).unwrap();
    assert_eq!(qphlab(&["swap-prob", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&cfg, r#"{"sed": 1}"#).unwrap();
    assert_eq!(qphlab(&["swap-prob", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&cfg, r#"{"subcommand": "peaked", "seed": 1}"#).unwrap();
    assert_eq!(qphlab(&["swap-prob", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn flags_override_config_file() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("out");
    std::fs::write(&cfg, r#"{"seed": 4, "format": "json", "params": {"pairs": 9, "max_dim": 3}}"#).unwrap();
    let o = qphlab(&["swap-prob", "--config", cfg.to_str().unwrap(), "--pairs", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let m = read(&out.join("swap-prob.manifest.json"));
    assert_eq!(m["run"]["params"]["pairs"], 2);
    assert_eq!(m["run"]["params"]["max_dim"], 3);
    assert_eq!(m["run"]["seed"], 4);
    assert_eq!(m["run"]["output_file"], "swap-prob.json");
    assert_eq!(read(&out.join("swap-prob.json"))["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn guards_and_failed_checks_exit_one() {
    let o = qphlab(&["peaked", "--seed", "1", "--instances", "1", "--sizes", "24", "--seeds", "10", "--exhaustive"]);
    assert_eq!(o.status.code(), Some(1));
    let o = qphlab(&["swap-prob", "--seed", "1", "--pairs", "3", "--tol=-1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn manifest_hashes_match_files() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("k");
    let o = qphlab(&["kitaev", "--circuit", "bell-pair", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let m = read(&out.join("kitaev.manifest.json"));
    let csv = std::fs::read(out.join("kitaev.csv")).unwrap();
    assert_eq!(m["run"]["output_sha256"].as_str().unwrap().len(), 64);
    assert!(String::from_utf8(csv).unwrap().starts_with("circuit,"));
    assert_eq!(m["run"]["pass"], true);
    assert!(m["run"]["seed"].is_null());
}

#[test]
fn psh_yes_fixture_export() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("p");
    let o = qphlab(&["psh-reduce", "--fixture", "yes", "--export", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read(&out.join("psh-reduce.json"));
    let section = v.as_object().unwrap().values().find(|x| x.get("energy_upper_bound").is_some()).unwrap();
    assert!(section["energy_upper_bound"].as_f64().unwrap() < section["a"].as_f64().unwrap());
    let m = read(&out.join("psh-reduce.manifest.json"));
    assert_eq!(m["run"]["extra_files"].as_array().unwrap().len(), 1);
}
