use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn staticgeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_staticgeo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn verify(suite: &str, config: Option<&Path>, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["verify", suite, "--out", out.to_str().unwrap()];
    if let Some(c) = config {
        args.extend(["--config", c.to_str().unwrap()]);
    }
    args.extend(extra);
    staticgeo(&args)
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn lists_every_suite() {
    let o = staticgeo(&["list-suites"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in [
        "euclidean_affine",
        "schwarzschild_static",
        "tod_identities",
        "growth_bound",
        "zero_set_gauss_bonnet",
        "mass_fit",
        "huisken_yau",
        "anisotropy_limit",
        "integral_identities",
        "conformal_double",
        "flow_classify",
    ] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn schwarzschild_static_passes_for_the_lapse() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "metric = \"schwarzschild(2)\"\npotential = \"schwarzschild_N(2)\"\n");
    let o = verify("schwarzschild_static", Some(&cfg), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(dir.path());
    assert_eq!(r["passed"], true);
    assert_eq!(r["config"]["metric"]["source"], "config");
    assert_eq!(r["config"]["tolerance"]["value"], 1e-7);
    assert_eq!(r["config"]["tolerance"]["source"], "default");
}

#[test]
fn non_static_potential_fails_with_its_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "potential = \"x1^2\"\n");
    let o = verify("schwarzschild_static", Some(&cfg), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(dir.path());
    let check = r["checks"].as_array().unwrap().iter().find(|c| c["name"] == "static_residual").unwrap();
    assert_eq!(check["pass"], false);
    assert!(check["message"].as_str().unwrap().starts_with("NotStatic"));
}

#[test]
fn euclidean_affine_passes_without_config() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(verify("euclidean_affine", None, dir.path(), &[]).status.code(), Some(0));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let typo = write_config(dir.path(), "typo.toml", "tolerence = 1e-3\n");
    let unused = write_config(dir.path(), "unused.toml", "window = [50.0, 400.0]\n");
    let mismatch = write_config(dir.path(), "mismatch.toml", "suite = \"mass_fit\"\n");
    let bad_metric = write_config(dir.path(), "metric.toml", "metric = \"kerr(1)\"\n");
    let out = dir.path().join("out");
    for cfg in [&typo, &unused, &mismatch, &bad_metric] {
        let o = verify("tod_identities", Some(cfg), &out, &[]);
        assert_eq!(o.status.code(), Some(2), "{}", cfg.display());
        assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
    }
    assert_eq!(verify("no_such_suite", None, &out, &[]).status.code(), Some(2));
    assert_eq!(
        verify("tod_identities", Some(&dir.path().join("missing.toml")), &out, &[]).status.code(),
        Some(2)
    );
    assert!(!out.join("report.json").exists());
}

#[test]
fn reports_are_deterministic_across_runs_and_parallelism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    verify("conformal_double", None, &a, &["--seed", "9"]);
    verify("conformal_double", None, &b, &["--seed", "9"]);
    verify("conformal_double", None, &c, &["--seed", "9", "--parallel"]);
    let bytes = |d: &Path| std::fs::read(d.join("report.json")).unwrap();
    assert_eq!(bytes(&a), bytes(&b));
    assert_eq!(bytes(&a), bytes(&c));
    assert_eq!(report(&a)["config"]["seed"]["source"], "cli");
    let d = dir.path().join("d");
    verify("conformal_double", None, &d, &["--seed", "10"]);
    assert_ne!(bytes(&a), bytes(&d));
}

#[test]
fn gauss_bonnet_table_has_one_row_per_radius() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "horizon_masses = []\nradii = [50.0, 100.0, 200.0]\n");
    let o = verify("zero_set_gauss_bonnet", Some(&cfg), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("gauss_bonnet.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "R,kappa_integral");
    assert_eq!(lines.len(), 4);
    let radii: Vec<f64> = lines[1..].iter().map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(radii, [50.0, 100.0, 200.0]);
}

#[test]
fn huisken_yau_reports_log_pairs_and_slope() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "metric = \"anisotropic(1, 1)\"\nradii = [20.0, 40.0, 80.0]\n");
    let o = verify("huisken_yau", Some(&cfg), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(dir.path());
    let slope = r["tables"][0]["fields"]["slope"].as_f64().unwrap();
    assert!((slope + 4.0).abs() < 0.3, "{slope}");
    let csv = std::fs::read_to_string(dir.path().join("huisken_yau.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn dump_curvature_prints_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write_config(dir.path(), "p.txt", "# x y z\n10 0 0\n0.1, 0, 0\n");
    let o = staticgeo(&["dump-curvature", "--metric", "schwarzschild(2)", "--points", pts.to_str().unwrap()]);
    assert!(o.status.success());
    let rows: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0]["scalar"].as_f64().unwrap().abs() < 1e-12);
    assert!(rows[0]["distinctness"]["TwoEqual"].is_object());
    assert!(rows[1]["error"].as_str().unwrap().starts_with("Domain"));
    let bad = staticgeo(&["dump-curvature", "--metric", "kerr", "--points", pts.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn shipped_configs_pass() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&root).unwrap() {
        let cfg = entry.unwrap().path();
        if cfg.extension().is_none_or(|e| e != "toml") {
            continue;
        }
        let table: toml::Table = std::fs::read_to_string(&cfg).unwrap().parse().unwrap();
        let suite = table["suite"].as_str().unwrap().to_string();
        let dir = tempfile::tempdir().unwrap();
        let o = verify(&suite, Some(&cfg), dir.path(), &[]);
        assert_eq!(o.status.code(), Some(0), "{}: {}", cfg.display(), String::from_utf8_lossy(&o.stdout));
        seen += 1;
    }
    assert!(seen >= 4);
}
