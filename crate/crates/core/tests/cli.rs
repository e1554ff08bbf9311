use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn geodesy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geodesy"))
        .args(args)
        .env_remove("GEODESY_DEFAULT_TOL")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("geodesy-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn curvature_from_flags() {
    let out = geodesy(&["curvature", "--family", "hyperbolic", "--h", "sin(x)+3", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["command"], "curvature");
    assert_eq!(v["pass"], true);
    let s = &v["scenarios"][0];
    assert_eq!(s["scenario"]["family"], "hyperbolic");
    assert_eq!(s["scenario"]["h"], "sin(x)+3");
    assert!(s["records"].as_array().unwrap().iter().all(|r| r["pass"] == true));
}

#[test]
fn negative_leading_h_is_accepted() {
    let out = geodesy(&["solve", "--family", "hyperbolic", "--h", "-1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn input_errors_exit_2() {
    for args in [
        &["curvature", "--family", "hyperbolic", "--h", "sin(x"][..],
        &["curvature", "--family", "nope", "--h", "1"],
        &["curvature", "--family", "hyperbolic", "--h", "1", "--tol", "-1"],
        &["curvature", "--family", "hyperbolic", "--h", "z^2"],
        &["curvature", "--scenario", "/nonexistent/file.pool"],
        &["no-such-command"],
    ] {
        let out = geodesy(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let out = geodesy(&["curvature", "--family", "hyperbolic", "--h", "sin(x"]);
    assert_eq!(json(&out)["error"]["kind"], "expression");
}

#[test]
fn empty_pool_exits_2() {
    let p = scratch("empty.pool", "# nothing here\n\n");
    let out = geodesy(&["verify-all", "--scenario", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn negative_control_fails_unless_expected() {
    let body = "command = solve\nfamily = hyperbolic\nh = -1\nconstant = 2\nspan = 0,1\n";
    let p = scratch("control.scn", body);
    let out = geodesy(&["solve", "--scenario", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["scenarios"][0]["checks_pass"], false);

    let p = scratch("control-expected.scn", &format!("{body}expect = fail\n"));
    let out = geodesy(&["solve", "--scenario", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["scenarios"][0]["pass"], true);
}

#[test]
fn expected_failure_that_passes_is_a_failure() {
    let p = scratch(
        "wrong.scn",
        "command = curvature\nfamily = ads+\nh = 1\nexpect = fail\n",
    );
    let out = geodesy(&["curvature", "--scenario", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_all_default_pool() {
    let out = geodesy(&["verify-all", "--pretty"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let scenarios = v["scenarios"].as_array().unwrap();
    assert!(scenarios.len() >= 30);
    let control = scenarios.iter().find(|s| s["scenario"]["expect"] == "fail").unwrap();
    assert_eq!(control["checks_pass"], false);
    assert_eq!(control["pass"], true);
    let table = String::from_utf8_lossy(&out.stderr);
    assert!(table.contains("PASS"));
}

#[test]
fn runs_are_deterministic() {
    let strip = |out: &Output| {
        let mut v = json(out);
        v["wall_time_s"] = Value::Null;
        v.to_string()
    };
    let a = geodesy(&["verify-all", "--seed", "5"]);
    let b = geodesy(&["verify-all", "--seed", "5"]);
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn csv_output() {
    let dir = std::env::temp_dir().join(format!("geodesy-csv-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("samples.csv");
    let out = geodesy(&["solve", "--family", "ads+", "--h", "1", "--csv", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let mut r = csv::Reader::from_path(&path).unwrap();
    let header = r.headers().unwrap().clone();
    assert_eq!(&header[0], "scenario");
    let rows: Vec<_> = r.records().map(Result::unwrap).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|row| row.len() == header.len()));
}

#[test]
fn tolerance_precedence() {
    let p = scratch(
        "tol.scn",
        "command = curvature\nfamily = hyperbolic\nh = 1\ntol = 1e-7\n",
    );
    let tol_of = |out: &Output| json(out)["scenarios"][0]["scenario"]["tol"].as_f64().unwrap();
    let path = p.to_str().unwrap();

    let run_env = |args: &[&str], env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_geodesy"));
        c.args(args).env_remove("GEODESY_DEFAULT_TOL");
        if let Some(e) = env {
            c.env("GEODESY_DEFAULT_TOL", e);
        }
        c.output().unwrap()
    };
    assert_eq!(
        tol_of(&run_env(&["curvature", "--family", "hyperbolic", "--h", "1"], None)),
        1e-6
    );
    assert_eq!(
        tol_of(&run_env(
            &["curvature", "--family", "hyperbolic", "--h", "1"],
            Some("1e-5")
        )),
        1e-5
    );
    assert_eq!(tol_of(&run_env(&["curvature", "--scenario", path], Some("1e-5"))), 1e-7);
    assert_eq!(
        tol_of(&run_env(
            &["curvature", "--scenario", path, "--tol", "1e-8"],
            Some("1e-5")
        )),
        1e-8
    );
    assert_eq!(
        run_env(&["curvature", "--family", "hyperbolic", "--h", "1"], Some("abc"))
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(geodesy(&["--help"]).status.code(), Some(0));
    assert_eq!(geodesy(&["--version"]).status.code(), Some(0));
}
