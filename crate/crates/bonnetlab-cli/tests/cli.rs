//! End-to-end runs of the `bonnetlab` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const TORUS: &str = r#"
[surface]
name = "product_circles"
params = { r1 = 0.5, r2 = 1.0 }

[grid]
size = [32, 32]
"#;

fn bonnetlab(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bonnetlab"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("BONNETLAB_THREADS", t),
        None => cmd.env_remove("BONNETLAB_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("report is JSON: {e}\n{}", stderr(o)))
}

fn block<'a>(r: &'a Value, command: &str) -> &'a Value {
    r["commands"].as_array().unwrap().iter().find(|b| b["command"] == command).unwrap()
}

fn all_checks(r: &Value) -> Vec<&Value> {
    r["commands"].as_array().unwrap().iter().flat_map(|b| b["checks"].as_array().unwrap()).collect()
}

#[test]
fn torus_analysis_has_a_flat_metric() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "torus.toml", TORUS);
    let o = bonnetlab(&["analyze", "--config", &cfg], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = stdout_json(&o);
    let k = &block(&r, "analyze")["data"]["grids"]["k"]["values"];
    let vals: Vec<f64> = k.as_array().unwrap().iter().flat_map(|row| row.as_array().unwrap().iter().map(|x| x.as_f64().unwrap())).collect();
    assert_eq!(vals.len(), 16 * 16);
    assert!(vals.iter().all(|x| x.abs() < 1e-12));
    assert_eq!(r["provenance"]["grid"]["nu"], 32);
    assert_eq!(r["summary"]["pass"], true);
}

#[test]
fn ellipsoid_umbilic_indices_sum_to_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "ellipsoid.toml",
        "[surface]\nname = \"triaxial_ellipsoid\"\nparams = { a = 1.0, b = 1.2, c = 1.5 }\n[index]\nexpected_sum = 4.0\n",
    );
    let o = bonnetlab(&["index", "--config", &cfg, "--grid", "48x48"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = stdout_json(&o);
    for s in block(&r, "index")["data"]["signs"].as_array().unwrap() {
        assert_eq!(s["points"].as_array().unwrap().len(), 4);
        assert!((s["sum"].as_f64().unwrap() - 4.0).abs() < 0.05, "{s}");
    }
}

#[test]
fn malformed_toml_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "[surface]\nname = \"plane\"\nparams = { r = }\n");
    let o = bonnetlab(&["analyze", "--config", &cfg], None);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("bad.toml:3:"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "torus.toml", TORUS);
    for args in [
        vec!["analyze", "--config", &cfg, "--tol", "nonsense=1"],
        vec!["analyze", "--config", &cfg, "--tol", "mate=-1"],
        vec!["analyze", "--config", &cfg, "--grid", "8x8"],
        vec!["analyze", "--config", &cfg, "--grid", "big"],
        // no commands listed
        vec!["run", "--config", &cfg],
        vec!["analyze", "--config", "/nonexistent/config.toml"],
    ] {
        let o = bonnetlab(&args, None);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    let unknown = write_config(dir.path(), "zoo.toml", "[surface]\nname = \"klein_bottle\"\n");
    assert_eq!(bonnetlab(&["analyze", "--config", &unknown], None).status.code(), Some(2));
    assert_eq!(bonnetlab(&["analyze", "--config", &cfg], Some("zero")).status.code(), Some(2));
}

#[test]
fn failing_checks_exit_with_three_and_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "torus.toml", TORUS);
    let o = bonnetlab(&["analyze", "--config", &cfg, "--tol", "identity=1e-30"], None);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("ellipse_identities"), "{}", stderr(&o));
    let r = stdout_json(&o);
    assert_eq!(r["summary"]["pass"], false);
}

#[test]
fn module_errors_exit_with_three_and_later_commands_still_run() {
    let dir = tempfile::tempdir().unwrap();
    let body = "commands = [\"global-checks\", \"analyze\"]\n[surface]\nname = \"plane\"\n";
    let cfg = write_config(dir.path(), "plane.toml", body);
    let o = bonnetlab(&["run", "--config", &cfg], None);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("global-checks: error"), "{}", stderr(&o));
    let r = stdout_json(&o);
    assert_eq!(block(&r, "global-checks")["ok"], false);
    assert_eq!(block(&r, "analyze")["ok"], true);
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("commands = [\"analyze\", \"classify\", \"index\", \"lines\", \"mates\"]\n{TORUS}[mates]\ntheta_minus = [0.0, 1.0]\ntheta_plus = [0.0, 2.0]\n[lines]\nseeds = 2\n");
    let cfg = write_config(dir.path(), "torus.toml", &body);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let oa = bonnetlab(&["run", "--config", &cfg, "--out", a.to_str().unwrap()], Some("1"));
    let ob = bonnetlab(&["run", "--config", &cfg, "--out", b.to_str().unwrap()], Some("3"));
    assert_eq!(oa.status.code(), Some(0), "{}", stderr(&oa));
    assert_eq!(ob.status.code(), Some(0), "{}", stderr(&ob));
    let ra = std::fs::read(a.join("report.json")).unwrap();
    let rb = std::fs::read(b.join("report.json")).unwrap();
    assert!(ra == rb, "reports differ");
    for f in ["lines.csv", "mate_003.obj", "invariants.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn meshes_and_sidecars_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "torus.toml", TORUS);
    let out = dir.path().join("out");
    let o = bonnetlab(&["analyze", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let obj = std::fs::read_to_string(out.join("surface.obj")).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 32 * 32);
    // closed torus: two triangles per vertex
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 2 * 32 * 32);
    let side = std::fs::read_to_string(out.join("surface_x4.csv")).unwrap();
    assert_eq!(side.lines().count(), 32 * 32 + 1);
    let r: Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    let arts: Vec<&str> = block(&r, "analyze")["artifacts"].as_array().unwrap().iter().map(|a| a.as_str().unwrap()).collect();
    assert_eq!(arts, ["invariants.csv", "surface.obj", "surface_x4.csv"]);
}

#[test]
fn every_pass_flag_follows_from_its_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let body = "commands = [\"verify\", \"mates\", \"deform\"]\n[surface]\nname = \"product_curves\"\n[grid]\nsize = [24, 24]\n[mates]\ntheta_minus = [0.0, 2.0]\n";
    let cfg = write_config(dir.path(), "clothoids.toml", body);
    let o = bonnetlab(&["run", "--config", &cfg], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = stdout_json(&o);
    let checks = all_checks(&r);
    assert!(checks.len() > 10);
    for c in checks {
        let (x, t, e) = (c["value"].as_f64().unwrap(), c["target"].as_f64().unwrap(), c["tolerance"].as_f64().unwrap());
        let expect = match c["comparison"].as_str().unwrap() {
            "within" => (x - t).abs() <= e,
            "at_most" => x <= t + e,
            "at_least" => x >= t - e,
            other => panic!("{other}"),
        };
        assert_eq!(c["pass"].as_bool().unwrap(), expect, "{c}");
    }
}

#[test]
fn polynomial_charts_and_subdomains() {
    let dir = tempfile::tempdir().unwrap();
    let body = "[surface]\npolynomial = [[1, 0, 1], [0, 1, 1], [2, 0, 1, 0, 2, -1], [1, 1, 2]]\ndomain = [-1, 1, -1, 1]\nisothermal = true\n[grid]\nsize = [16, 16]\nsubdomain = [0.2, 0.8, 0.2, 0.8]\n";
    let cfg = write_config(dir.path(), "graph.toml", body);
    let o = bonnetlab(&["verify", "--config", &cfg], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = stdout_json(&o);
    assert_eq!(r["provenance"]["grid"]["domain"]["u0"], 0.2);
    let outside = body.replace("0.2, 0.8, 0.2, 0.8", "0.2, 1.8, 0.2, 0.8");
    let cfg = write_config(dir.path(), "outside.toml", &outside);
    assert_eq!(bonnetlab(&["verify", "--config", &cfg], None).status.code(), Some(2));
}
