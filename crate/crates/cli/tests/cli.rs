#![allow(clippy::excessive_precision)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn covhyp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covhyp"))
        .args(args)
        .env("COVHYP_THREADS", "1")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fields(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn check_golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("COVHYP_UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e} (set COVHYP_UPDATE_GOLDEN=1 to create)", path.display()));
    assert_eq!(expected, actual, "{name} differs from the golden file");
}

#[test]
fn inspect_rest_state() {
    let o = covhyp(&["inspect", "--system", "circular-elliptic", "--rho", "1.0", "--J", "0.0"]);
    assert_eq!(code(&o), 0);
    let f = fields(&stdout(&o));
    assert_eq!(f["u"].parse::<f64>().unwrap(), 0.0);
    assert_eq!(f["theta"].parse::<f64>().unwrap(), 0.0);
    assert_eq!(f["rho0"].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn inspect_lorentz_matches_oracle_and_golden() {
    let o = covhyp(&[
        "inspect",
        "--system",
        "lorentz-hyperbolic",
        "--rho",
        "0.4",
        "--J",
        "0.2",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let f = fields(&text);
    // 30-digit reference values
    let oracle = [
        ("theta", 0.42111989507361961433, 1e-12),
        ("rho0", 0.32042530724017859436, 1e-12),
        ("u", 0.39787346379910702818, 1e-12),
        ("eta", -0.26450577348296249696, 1e-12),
        ("eta_star", 0.064187154904069830579, 1e-12),
        ("alpha", -0.62516478584115538311, 1e-12),
        ("beta", 0.24873647878784743433, 1e-12),
        ("p0", 0.10267237751996284873, 1e-12),
        ("f1", 0.2, 1e-12),
        ("f2", 0.18224707027978425436, 1e-12),
        ("g1", 0.04085061448035718873, 1e-12),
        ("g2", 0.10267237751996284873, 1e-12),
        ("lambda1", -0.59084964710183574869, 1e-9),
        ("lambda2", 0.90890832669446150955, 1e-9),
        ("delta", -0.45167688676774567069, 1e-12),
        ("det_hessian", 1.1031458389984138455, 1e-12),
        ("d2eta_drho2", 1.647786821992909552, 1e-12),
    ];
    for (k, v, tol) in oracle {
        let got: f64 = f[k].parse().unwrap();
        assert!((got - v).abs() <= tol * v.abs().max(1.0), "{k}: {got} vs {v}");
    }
    check_golden("inspect_lorentz.txt", &text);
}

#[test]
fn inspect_outside_validity_exits_2() {
    let o = covhyp(&[
        "inspect",
        "--system",
        "lorentz-hyperbolic",
        "--rho",
        "0.6",
        "--J",
        "0.0",
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("outside the validity domain"));
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    for system in [
        "circular-elliptic",
        "lorentz-hyperbolic",
        "galileo-hyperbolic",
        "galileo-elliptic",
    ] {
        let out = dir.path().join(format!("{system}.json"));
        let o = covhyp(&["verify", "--system", system, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{system}: {}", stdout(&o));
        let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(report["system"], system);
        assert_eq!(report["n_samples"], 500);
    }
    assert_eq!(
        code(&covhyp(&["verify", "--system", "circular-elliptic", "--samples", "0"])),
        2
    );
    assert_eq!(code(&covhyp(&["verify", "--system", "no-such-system"])), 2);
    let o = covhyp(&["verify", "--system", "lorentz-hyperbolic", "--inject-flux-fault"]);
    assert_eq!(code(&o), 1);
    let table = stdout(&o);
    for check in ["covariance", "compatibility"] {
        let line = table.lines().find(|l| l.starts_with(check)).unwrap();
        assert!(line.ends_with("FAIL"), "{line}");
    }
}

#[test]
fn verify_json_is_deterministic() {
    let args = [
        "verify",
        "--system",
        "galileo-elliptic",
        "--seed",
        "9",
        "--samples",
        "200",
        "--format",
        "json",
    ];
    let a = covhyp(&args);
    let b = covhyp(&[&args[..], &["--sequential"]].concat());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn simulate_shipped_demo() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = repo_root().join("configs/riemann_circular.json");
    let o = covhyp(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let budget = std::fs::read_to_string(dir.path().join("entropy_budget.csv")).unwrap();
    let mut lines = budget.lines();
    assert_eq!(lines.next(), Some("t,total_entropy,D"));
    let totals: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(totals.len() > 2);
    assert!(totals.windows(2).all(|w| w[1] <= w[0] + 1e-10));
    let series = std::fs::read_to_string(dir.path().join("series.csv")).unwrap();
    assert!(series.starts_with("index,step,t,file\n"));
    for line in series.lines().skip(1) {
        let file = line.rsplit(',').next().unwrap();
        let snap = std::fs::read_to_string(dir.path().join(file)).unwrap();
        assert!(snap.starts_with("t,x,rho,J,eta,u\n"));
    }
}

#[test]
fn simulate_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = repo_root().join("configs/riemann_lorentz.json");
    let out = dir.path().join("run");
    let o = covhyp(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--t-end",
        "0.01",
        "--n-cells",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let f = fields(&stdout(&o).replace(' ', "\n"));
    assert_eq!(f["t"].parse::<f64>().unwrap(), 0.01);
    let snap = std::fs::read_to_string(out.join("snapshot_00000.csv")).unwrap();
    assert_eq!(snap.lines().count(), 51);
}

#[test]
fn simulate_config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = repo_root().join("configs/riemann_lorentz.json");
    let out = dir.path().join("run");
    let o = covhyp(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--cfl",
        "1.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);

    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"system": "circular-elliptic", "t_end": 0.1, "colour": "red"}"#,
    )
    .unwrap();
    let o = covhyp(&[
        "simulate",
        "--config",
        bad.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}

#[test]
fn simulate_zero_length_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = repo_root().join("configs/riemann_lorentz.json");
    let o = covhyp(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--t-end",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let series = std::fs::read_to_string(dir.path().join("series.csv")).unwrap();
    assert_eq!(series.lines().count(), 2);
    assert!(!dir.path().join("snapshot_00001.csv").exists());
}

#[test]
fn simulate_left_domain_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("collide.json");
    std::fs::write(
        &cfg,
        r#"{
  "system": "lorentz-hyperbolic",
  "grid": { "n_cells": 100, "x_min": 0.0, "x_max": 1.0 },
  "t_end": 0.5,
  "initial": { "type": "riemann", "left": { "rho": 0.45, "J": 0.44 }, "right": { "rho": 0.45, "J": -0.44 }, "x_split": 0.5 }
}"#,
    )
    .unwrap();
    let out = dir.path().join("run");
    let o = covhyp(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("cell") && err.contains("t ="), "{err}");
    assert!(out.join("snapshot_00000.csv").exists());
}

#[test]
fn catalog_list_names_every_system() {
    let o = covhyp(&["catalog", "list"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    for name in [
        "circular-elliptic",
        "lorentz-hyperbolic",
        "galileo-hyperbolic",
        "galileo-elliptic",
    ] {
        assert!(text.contains(name));
    }
    let o = covhyp(&["catalog", "list", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
}
