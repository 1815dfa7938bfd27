use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use mucorr::io::read_grid;
use serde_json::Value;

fn mucorr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mucorr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_csv(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const DATA: &str = "a,b,c,y\n\
1,2.5,0.3,4.1\n\
2,1.0,1.7,5.9\n\
3,3.5,0.2,8.2\n\
4,2.0,2.9,9.7\n\
5,4.5,1.1,12.3\n\
6,3.0,3.8,13.8\n\
7,6.0,0.4,16.1\n\
8,4.0,2.2,18.4\n";

#[test]
fn mcc_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_csv(dir.path(), "d.csv", DATA);
    let out = mucorr(&["mcc", "--input", &input, "--cols", "a,b,c"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["route"], "determinant");
    assert_eq!(v["m"], 3);
    assert_eq!(v["n"], 8);
    let mcc = v["mcc"].as_f64().unwrap();
    let muc = v["muc"].as_f64().unwrap();
    assert!((mcc * mcc + muc * muc - 1.0).abs() < 1e-12);
    assert!(v["cross_check"]["minors"].is_f64());
    assert!(v["cross_check"]["max_abs_diff"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn mcc_all_routes_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_csv(dir.path(), "d.csv", DATA);
    let out = mucorr(&[
        "mcc", "--input", &input, "--cols", "a,b,c,y", "--route", "all",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert!(v["cross_check"]["ipd"].is_f64());
    assert!(v["cross_check"]["max_abs_diff"].as_f64().unwrap() <= 1e-9);

    let out = mucorr(&[
        "mcc", "--input", &input, "--cols", "a,b", "--route", "ipd", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("mcc,muc,muc_squared,route,m,n,minors,max_abs_diff")
    );
    assert!(lines.next().unwrap().contains(",ipd,2,8,"));
}

#[test]
fn mcc_reads_stdin_and_drops_rows() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_mucorr"))
        .args(["mcc", "--input", "-", "--cols", "a,b", "--drop-missing"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"a,b\n1,2\n2,\n3,1\n4,5\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("1 row dropped"));
    assert_eq!(json(&out)["n"], 3);
}

#[test]
fn validation_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_csv(dir.path(), "d.csv", DATA);
    let blank = write_csv(dir.path(), "blank.csv", "a,b\n1,2\n2,\n3,1\n");
    let cases: Vec<Vec<&str>> = vec![
        vec!["mcc", "--input", &input, "--cols", "a,zz"],
        vec!["mcc", "--input", &blank, "--cols", "a,b"],
        vec!["mcc", "--input", "/nonexistent/file.csv", "--cols", "a,b"],
        vec!["mcc", "--input", &input, "--cols", "a,a"],
        vec!["mcc", "--input", &input, "--cols", "a", "--route", "bogus"],
        vec!["surface", "--alpha", "200", "--out", "-"],
        vec!["surface", "--alpha", "90", "--step", "7", "--out", "-"],
        vec![
            "select", "--input", &input, "--target", "y", "--pool", "a,b", "--m", "3",
        ],
        vec!["verify", "--m", "1"],
        vec!["surface", "--alpha", "90", "--out", "-", "--cut", "0,0,90"],
        vec![
            "surface",
            "--alpha",
            "90",
            "--out",
            "-",
            "--cut",
            "200,0,300,50",
        ],
    ];
    for args in cases {
        let out = mucorr(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(stderr(&out).contains("error"), "{args:?}: {}", stderr(&out));
        assert!(!stderr(&out).contains("panicked"), "{args:?}");
    }
    let out = mucorr(&["mcc", "--input", &blank, "--cols", "a,b"]);
    assert!(
        stderr(&out).contains("row 3") && stderr(&out).contains("'b'"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn decompose_reports_identities() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_csv(dir.path(), "d.csv", DATA);
    let out = mucorr(&[
        "decompose",
        "--input",
        &input,
        "--target",
        "y",
        "--predictors",
        "a,b,c",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["coefficients"].as_array().unwrap().len(), 3);
    let r2 = v["r_squared"].as_f64().unwrap();
    let omega = v["omega_ratio"].as_f64().unwrap();
    assert!((1.0 - r2 - omega * omega).abs() < 1e-9);
    for key in ["mse", "r_squared", "omega", "fitted_variance"] {
        assert!(
            v["identity_residuals"][key].as_f64().unwrap() < 1e-8,
            "{key}"
        );
    }
}

#[test]
fn decompose_exact_linear_target() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("v1,v2,t\n");
    for (a, b) in [
        (1.0, 0.5),
        (2.0, -1.0),
        (0.0, 3.0),
        (4.0, 1.0),
        (-1.0, 2.0),
        (3.0, 0.0),
    ] {
        text.push_str(&format!("{a},{b},{}\n", 2.0 * a + 3.0 * b + 7.0));
    }
    let input = write_csv(dir.path(), "lin.csv", &text);
    let out = mucorr(&[
        "decompose",
        "--input",
        &input,
        "--target",
        "t",
        "--predictors",
        "v1,v2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    let c: Vec<f64> = v["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!((c[0] - 2.0).abs() < 1e-9 && (c[1] - 3.0).abs() < 1e-9);
    assert!((v["intercept"].as_f64().unwrap() - 7.0).abs() < 1e-9);
    assert!(v["mse"].as_f64().unwrap().abs() < 1e-12);
    assert!(v["omega_ratio"].as_f64().unwrap() < 1e-6);
}

#[test]
fn select_exhaustive_and_greedy() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_csv(dir.path(), "d.csv", DATA);
    for (strategy, trace_len) in [("exhaustive", 3), ("greedy", 2)] {
        let out = mucorr(&[
            "select",
            "--input",
            &input,
            "--target",
            "y",
            "--pool",
            "a,b,c",
            "--m",
            "2",
            "--strategy",
            strategy,
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let v = json(&out);
        assert_eq!(v["chosen"].as_array().unwrap().len(), 2);
        assert_eq!(v["trace"].as_array().unwrap().len(), trace_len);
        assert!(v["objective"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn surface_grid_profile_and_contours() {
    let dir = tempfile::tempdir().unwrap();
    let grid_path = dir.path().join("grid.csv");
    let grid_str = grid_path.to_string_lossy().into_owned();
    let out = mucorr(&[
        "surface",
        "--alpha",
        "90",
        "--step",
        "5",
        "--out",
        &grid_str,
        "--cut",
        "90,0,90,180",
        "--levels",
        "0.5,0.9",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let text = fs::read_to_string(&grid_path).unwrap();
    assert!(text.starts_with("beta,gamma,mcc,feasible\n"));
    let rows = read_grid(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 37 * 37);
    let center = rows
        .iter()
        .find(|r| r.beta == 90.0 && r.gamma == 90.0)
        .unwrap();
    assert_eq!(center.mcc, 0.0);

    let profile = fs::read_to_string(dir.path().join("grid-profile.csv")).unwrap();
    assert_eq!(profile.lines().count(), 1 + 37);
    assert!(profile.lines().nth(1).unwrap().ends_with(",1,true"));

    let contours = fs::read_to_string(dir.path().join("grid-contours.csv")).unwrap();
    assert!(contours.starts_with("level,line,beta,gamma\n"));
    assert!(contours.lines().count() > 1);
}

#[test]
fn surface_to_stdout_is_deterministic() {
    let a = mucorr(&["surface", "--alpha", "30", "--step", "10", "--out", "-"]);
    let b = mucorr(&["surface", "--alpha", "30", "--step", "10", "--out", "-"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(
        String::from_utf8_lossy(&a.stdout).lines().count(),
        1 + 19 * 19
    );
}

#[test]
fn verify_gate() {
    let out = mucorr(&["verify", "--m", "4", "--trials", "200", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).ends_with("all identities within tolerance\n"));

    let out = mucorr(&["verify", "--m", "5", "--trials", "10", "--tol", "1e-300"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("identity violated"));
}

#[test]
fn minor_budget_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_csv(dir.path(), "d.csv", DATA);
    let out = Command::new(env!("CARGO_BIN_EXE_mucorr"))
        .args([
            "mcc", "--input", &input, "--cols", "a,b,c", "--route", "minors",
        ])
        .env("MUCORR_MINOR_BUDGET", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("budget"));

    // the determinant route still succeeds, skipping the cross-check
    let out = Command::new(env!("CARGO_BIN_EXE_mucorr"))
        .args(["mcc", "--input", &input, "--cols", "a,b,c"])
        .env("MUCORR_MINOR_BUDGET", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(json(&out)["cross_check"]["minors"].is_null());
}
