use std::process::{Command, Output};

use serde_json::Value;

fn beamsplit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beamsplit")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn without_runtime(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("runtime_ms");
    v
}

#[test]
fn same_seed_same_report() {
    let args = ["run", "qkd-dv", "--trials", "300", "--seed", "5"];
    let a = without_runtime(json(&beamsplit(&args)));
    let b = without_runtime(json(&beamsplit(&args)));
    assert_eq!(a, b);
}

#[test]
fn exact_section_ignores_seed() {
    for exp in ["hom", "teleport-dv", "mdi-qkd", "qkd-cv"] {
        let reference = json(&beamsplit(&["run", exp, "--trials", "50", "--seed", "0"]))["exact"].clone();
        for seed in ["1", "2", "3", "4"] {
            let got = json(&beamsplit(&["run", exp, "--trials", "50", "--seed", seed]))["exact"].clone();
            assert_eq!(got, reference, "{exp} seed {seed}");
        }
    }
}

#[test]
fn sampled_section_depends_on_seed() {
    let a = json(&beamsplit(&["run", "rng", "--trials", "64", "--seed", "1"]));
    let b = json(&beamsplit(&["run", "rng", "--trials", "64", "--seed", "2"]));
    assert_ne!(a["sampled"]["bits"], b["sampled"]["bits"]);
}

#[test]
fn zero_trials_is_a_validation_error() {
    let out = beamsplit(&["run", "rng", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "validation");
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_parameters_exit_with_two() {
    for args in [
        vec!["run", "photon-subtract", "--theta", "0"],
        vec!["run", "teleport-dv", "--alpha", "1,0", "--beta", "1,0"],
        vec!["run", "hom", "--cutoff", "0"],
        vec!["run", "teleport-cv", "--r", "-1"],
        vec!["run", "mzi", "--theta", "nan"],
        vec!["run", "nonsense"],
    ] {
        let out = beamsplit(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn hom_has_no_coincidences() {
    let v = json(&beamsplit(&["run", "hom", "--trials", "500"]));
    assert!(v["exact"]["coincidence_probability"].as_f64().unwrap().abs() < 1e-12);
    assert!(v["sampled"]["counts"].get("1,1").is_none());
}

#[test]
fn teleportation_succeeds_half_the_time() {
    let v = json(&beamsplit(&["run", "teleport-dv", "--trials", "4000", "--seed", "3"]));
    assert!((v["exact"]["success_probability"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let rate = v["sampled"]["success_rate"].as_f64().unwrap();
    assert!((rate - 0.5).abs() < 4.0 * (0.25f64 / 4000.0).sqrt(), "{rate}");
    assert!((v["sampled"]["min_fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    let out = dir.path().join("report.json");
    std::fs::write(&cfg, format!("# subtraction sweep\ntheta = 0.1\nseed = 11\ntrials = 10\nout = {}\n", out.display())).unwrap();
    let v = json(&beamsplit(&["run", "photon-subtract", "--config", cfg.to_str().unwrap(), "--seed", "12"]));
    assert_eq!(v["params"]["theta"], 0.1);
    assert_eq!(v["seed"], 12);
    assert_eq!(v["params"]["trials"], 10);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(without_runtime(written), without_runtime(v));

    std::fs::write(&cfg, "gamma = 1\n").unwrap();
    assert_eq!(beamsplit(&["run", "hom", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn table_format_is_plain_text() {
    let out = beamsplit(&["run", "cnot", "--format", "table"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("experiment"));
    assert!(text.contains("exact.matrix"));
}

#[test]
fn every_experiment_runs_with_defaults() {
    for exp in [
        "hom", "bell-measure", "teleport-dv", "qkd-dv", "mdi-qkd", "photon-subtract", "hadamard", "cnot", "mzi", "rng",
        "g2", "homodyne", "teleport-cv", "qkd-cv", "physicality",
    ] {
        let v = json(&beamsplit(&["run", exp, "--trials", "16"]));
        assert_eq!(v["experiment"], exp);
        assert!(v["exact"].as_object().is_some_and(|m| !m.is_empty()), "{exp}");
    }
}
