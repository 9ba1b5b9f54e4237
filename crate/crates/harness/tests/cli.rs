use std::path::Path;
use std::process::{Command, Output};

fn lanfa(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lanfa"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .env_remove("LANFA_PRECISION_BITS")
        .output()
        .unwrap()
}

const CONFIG: &str = r#"{
  "id": "small-uniform",
  "spectrum": {"kind": "uniform", "d": 12, "lo": 1, "hi": 50},
  "functions": ["sqrt", "inv_power:1"],
  "bounds": {"uniform": true},
  "output_dir": "from-config"
}"#;

#[test]
fn run_writes_reports_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.json"), CONFIG).unwrap();
    for out in ["a", "b"] {
        let o = lanfa(&["run", "--config", "cfg.json", "--out", out], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for label in ["sqrt", "inv_power_1"] {
        let rel = Path::new("small-uniform").join(label);
        let a = std::fs::read(dir.path().join("a").join(&rel).join("report.csv")).unwrap();
        let b = std::fs::read(dir.path().join("b").join(&rel).join("report.csv")).unwrap();
        assert_eq!(a, b, "{label} report differs between runs");
        let header = String::from_utf8(a).unwrap().lines().next().unwrap().to_string();
        assert!(header.starts_with("k,"), "{header}");
        assert!(header.contains("err_lanczos_fa") && header.contains("bound_uniform"), "{header}");
        let meta: serde_json::Value =
            serde_json::from_slice(&std::fs::read(dir.path().join("a").join(&rel).join("meta.json")).unwrap()).unwrap();
        assert_eq!(meta["precision_bits"], 256);
    }
    assert!(dir.path().join("a/index.json").exists());
}

#[test]
fn run_falls_back_to_the_config_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.json"), CONFIG).unwrap();
    let o = lanfa(&["run", "--config", "cfg.json"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("from-config/small-uniform/sqrt/report.csv").exists());
}

#[test]
fn malformed_config_reports_its_position() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\n  \"id\": \"x\",\n  \"spectrum\": 3\n}").unwrap();
    let o = lanfa(&["run", "--config", "bad.json", "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn verify_exit_status_tracks_the_checks() {
    let dir = tempfile::tempdir().unwrap();
    let o = lanfa(&["verify", "--suite", "hard_instance"], dir.path());
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "suite hard_instance: 8 checks, 0 failed");

    // 64 bits cannot resolve the hard-instance equality to 1e-10.
    let o = Command::new(env!("CARGO_BIN_EXE_lanfa"))
        .args(["verify", "--suite", "hard_instance"])
        .env("RUST_LOG", "off")
        .env("LANFA_PRECISION_BITS", "64")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.starts_with("suite hard_instance: 8 checks, ") && !out.contains(" 0 failed"), "{out}");

    let o = lanfa(&["verify", "--suite", "everything"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_writes_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep", "--qs", "1,2", "--kappas", "1e2,1e3", "--d", "12", "--k-max", "8", "--budget", "2", "--out", "s",
    ];
    let o = lanfa(&args, dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fa = std::fs::read_to_string(dir.path().join("s/worst_ratio_lanczos_fa.csv")).unwrap();
    let rows: Vec<&str> = fa.lines().collect();
    assert_eq!(rows[0], "kappa,q=1,q=2");
    assert!(rows[1].starts_with("100,") && rows[2].starts_with("1000,"), "{fa}");
    for name in ["worst_ratio_lanczos_or.csv", "reference.csv", "sweep_points.csv", "meta.json", "index.json"] {
        assert!(dir.path().join("s").join(name).exists(), "{name}");
    }
    let first = std::fs::read(dir.path().join("s/sweep_points.csv")).unwrap();
    let o = lanfa(&args, dir.path());
    assert!(o.status.success());
    assert_eq!(first, std::fs::read(dir.path().join("s/sweep_points.csv")).unwrap());

    let o = lanfa(&["sweep", "--func", "sqrt", "--out", "t"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fig_rejects_unknown_ids() {
    let dir = tempfile::tempdir().unwrap();
    let o = lanfa(&["fig", "--id", "6", "--out", "f"], dir.path());
    assert!(!o.status.success());
    assert!(!dir.path().join("f").exists());
}
