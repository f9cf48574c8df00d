use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn default_config() -> Value {
    let text = std::fs::read_to_string(root().join("configs/default.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn write_config(dir: &Path, cfg: &Value) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn lwt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lwt"))
        .args(args)
        .output()
        .unwrap()
}

fn small_config() -> Value {
    let mut cfg = default_config();
    cfg["trials"] = 300.into();
    cfg["bound_draws"] = 20.into();
    cfg
}

#[test]
fn verify_passes_on_default_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = root().join("configs/default.json");
    let out = tmp.path().join("out");
    let o = lwt(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("verify.csv")).unwrap();
    assert!(csv.starts_with("check,subject,measured,bound,ok\n"));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")), "{csv}");
}

#[test]
fn simulate_is_byte_identical_across_runs_and_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &small_config());
    let run = |dir: &str, threads: &str| {
        let out = tmp.path().join(dir);
        let o = lwt(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "99",
            "--threads",
            threads,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (
            std::fs::read(out.join("error_rate.csv")).unwrap(),
            std::fs::read(out.join("secrecy.csv")).unwrap(),
        )
    };
    let a = run("a", "1");
    let b = run("b", "4");
    let c = run("c", "4");
    assert_eq!(a, b);
    assert_eq!(b, c);
    let text = String::from_utf8(a.0).unwrap();
    assert!(text.lines().skip(1).all(|l| l.starts_with("99,")));
}

#[test]
fn seed_changes_results() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &small_config());
    let run = |seed: &str| {
        let out = tmp.path().join(seed);
        let o = lwt(&[
            "bounds",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            seed,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read_to_string(out.join("bounds.csv")).unwrap()
    };
    let (a, b) = (run("1"), run("2"));
    assert_ne!(a.lines().nth(1), b.lines().nth(1));
    for t in ["tail", "min_distance", "faded_dual", "faded_flatness"] {
        assert!(a.contains(&format!(",{t},")), "{t}");
    }
}

#[test]
fn design_below_threshold_is_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg["R_prime"] = 1.0.into();
    let path = write_config(tmp.path(), &cfg);
    let out = tmp.path().join("out");
    let o = lwt(&[
        "design-code",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("R′ > ln(eG/2)"), "{err}");
}

#[test]
fn design_reports_derived_quantities() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &small_config());
    let out = tmp.path().join("out");
    let o = lwt(&[
        "design-code",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("design.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    for col in [
        "R",
        "index",
        "alpha_b",
        "alpha_e",
        "g_eff",
        "r_prime_threshold",
    ] {
        assert!(header.contains(&col), "{col}");
    }
    let code: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("code.json")).unwrap()).unwrap();
    assert_eq!(code["field_name"], "Q(zeta8)");
    assert!(code["alpha_e"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_errors_cite_lines() {
    let tmp = tempfile::tempdir().unwrap();
    let text = serde_json::to_string_pretty(&small_config()).unwrap();
    let line = text.lines().position(|l| l.contains("\"trials\"")).unwrap() + 1;
    let bad = text.replace("\"trials\": 300", "\"trials\": 0");
    let path = tmp.path().join("bad.json");
    std::fs::write(&path, bad).unwrap();
    let o = lwt(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(&format!("bad.json:{line}: `trials`")), "{err}");

    std::fs::write(&path, "{\n  \"field_name\": \"Q(i)\",\n  \"k\": \n}").unwrap();
    let o = lwt(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.json:4:"));
}

#[test]
fn analyze_lattice_writes_curves() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg["field_name"] = "Q(i)".into();
    cfg["k"] = 1.into();
    let path = write_config(tmp.path(), &cfg);
    let out = tmp.path().join("out");
    let o = lwt(&[
        "analyze-lattice",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lat = std::fs::read_to_string(out.join("lattice.csv")).unwrap();
    assert_eq!(lat.lines().count(), 3);
    let curve = std::fs::read_to_string(out.join("flatness.csv")).unwrap();
    let eps: Vec<f64> = curve
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(5).unwrap().parse().unwrap())
        .collect();
    assert_eq!(eps.len(), 5);
    assert!(eps.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn empirical_leakage_for_k1_code() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg["field_name"] = "Q(i)".into();
    cfg["k"] = 1.into();
    cfg["R_target"] = (2f64.ln()).into();
    cfg["R_prime"] = 3.5.into();
    cfg["eve"]["noise_variance"] = 4.0.into();
    cfg["empirical_leakage"] = true.into();
    let path = write_config(tmp.path(), &cfg);
    let out = tmp.path().join("out");
    let o = lwt(&[
        "simulate",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(o.status.code() != Some(2), "{err}");
    let csv = std::fs::read_to_string(out.join("secrecy.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let leak: f64 = row[14].parse().unwrap();
    assert!((0.0..=2f64.ln() + 1e-6).contains(&leak), "{csv}");
}
