use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

const BIN: &str = env!("CARGO_BIN_EXE_polyball-lab");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(command: &str, config: Option<&Path>, out: &Path) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.arg(command).arg("--out").arg(out);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.output().expect("binary runs")
}

fn run_json(command: &str, config: &Value, dir: &Path) -> Output {
    let path = dir.join("config.json");
    std::fs::write(&path, config.to_string()).unwrap();
    run(command, Some(&path), &dir.join("out"))
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn check_status<'a>(rep: &'a Value, name: &str) -> &'a str {
    rep["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap()["status"].as_str().unwrap()
}

#[test]
fn torus_is_a_member_but_not_pure() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("check", Some(&configs().join("torus.json")), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep = report(dir.path());
    assert_eq!(rep["command"], "check");
    assert_eq!(rep["results"]["is_member"], true);
    assert_eq!(rep["results"]["is_pure"], false);
    assert!(rep["checks"].as_array().unwrap().iter().all(|c| c["status"] == "PASS"));

    let csv = std::fs::read_to_string(dir.path().join("spectra.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,eigenvalue"));
    assert_eq!(lines.count(), 4);
    let m: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("matrices/defect.json")).unwrap()).unwrap();
    assert_eq!(m["dim"], 4);
    assert_eq!(m["entries"].as_array().unwrap().len(), 16);
}

#[test]
fn jordan_von_neumann_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("vn", Some(&configs().join("vn_jordan.json")), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep = report(dir.path());
    let lhs = rep["results"]["lhs"].as_f64().unwrap();
    let rhs = rep["results"]["rhs"].as_f64().unwrap();
    assert!((lhs - 1.0).abs() < 1e-12);
    assert!((rhs - 2.0 * (std::f64::consts::PI / 5.0).cos()).abs() < 1e-12);
    assert_eq!(rep["results"]["pass"], true);
}

#[test]
fn non_conjugate_lambda_points_at_second_entry() {
    let dir = tempfile::tempdir().unwrap();
    let config = json!({
        "n": [1, 1],
        "lambda": [
            {"i": 1, "j": 2, "s": 1, "t": 1, "turns": "1/4"},
            {"i": 2, "j": 1, "s": 1, "t": 1, "turns": "1/4"}
        ],
        "tuple": [[[[0]]], [[[0]]]]
    });
    let o = run_json("check", &config, dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/lambda/1"), "{}", stderr(&o));
    assert!(!dir.path().join("out/report.json").exists());
}

#[test]
fn schema_violations_carry_pointers() {
    let dir = tempfile::tempdir().unwrap();
    let config = json!({"n": [1, 1], "tuple": [[[[0]]], [[["x"]]]]});
    let o = run_json("check", &config, dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/tuple/1/0/0/0"), "{}", stderr(&o));

    let o = run_json("suite", &json!({"samples": 2}), dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));
}

#[test]
fn shape_errors_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_json("check", &json!({"n": [1], "tuple": [[[[0, 0], [0]]]]}), dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/tuple/0/0/1"), "{}", stderr(&o));
    let o = run_json("check", &json!({"n": [2], "tuple": [[[[0]]]]}), dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/tuple/0"), "{}", stderr(&o));
}

#[test]
fn numerical_rejection_fails_with_module_message() {
    let dir = tempfile::tempdir().unwrap();
    let config = json!({"n": [1], "tuple": [[[[2]]]], "polynomial": [{"word": "S[1:1]"}], "model_degree": 2});
    let o = run_json("vn", &config, dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let rep = report(&dir.path().join("out"));
    let check = &rep["checks"][0];
    assert_eq!(check["name"], "von_neumann");
    assert_eq!(check["status"], "FAIL");
    assert!(check["reason"].as_str().unwrap().contains("member"));
}

#[test]
fn failing_checks_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = json!({"n": [1], "tuple": [[[[0, 2], [0, 0]]]]});
    let o = run_json("check", &config, dir.path());
    assert_eq!(o.status.code(), Some(2));
    let rep = report(&dir.path().join("out"));
    assert_eq!(check_status(&rep, "row_contraction"), "FAIL");
    assert_eq!(rep["results"]["is_member"], false);
}

#[test]
fn suite_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("suite.json");
    std::fs::write(&config, json!({"seed": 11, "samples": 3, "degree": 3}).to_string()).unwrap();
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("wall_time");
        v
    };
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run("suite", Some(&config), &a).status.code(), Some(0));
    assert_eq!(run("suite", Some(&config), &b).status.code(), Some(0));
    assert_eq!(strip(report(&a)), strip(report(&b)));
    let text_a = std::fs::read_to_string(a.join("report.json")).unwrap();
    let text_b = std::fs::read_to_string(b.join("report.json")).unwrap();
    let no_time = |s: &str| s.lines().filter(|l| !l.contains("wall_time")).collect::<Vec<_>>().join("\n");
    assert_eq!(no_time(&text_a), no_time(&text_b));
}

#[test]
fn suite_skips_empty_interiors() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_json("suite", &json!({"seed": 5, "samples": 2, "degree": 1}), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep = report(&dir.path().join("out"));
    for cfg in ["cfg-a", "cfg-b"] {
        assert_eq!(check_status(&rep, &format!("{cfg} interior_relations")), "SKIPPED");
        assert_eq!(check_status(&rep, &format!("{cfg} beurling_factorization")), "SKIPPED");
        assert_eq!(check_status(&rep, &format!("{cfg} confluence")), "PASS");
    }
    for c in rep["checks"].as_array().unwrap() {
        assert!(!c["reason"].as_str().unwrap().is_empty(), "{c}");
    }
}

#[test]
fn default_suite_uses_documented_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("suite", None, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep = report(dir.path());
    assert_eq!(rep["config"]["seed"], 20_240_601);
    assert!(String::from_utf8_lossy(&o.stdout).contains("0 failed"));
}

#[test]
fn schemas_are_emitted_as_json() {
    for command in ["check", "rewrite", "vn", "berezin", "dilate", "wold", "beurling", "suite"] {
        let o = Command::new(BIN).args([command, "--emit-schema"]).output().unwrap();
        assert_eq!(o.status.code(), Some(0));
        let schema: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(schema["type"], "object", "{command}");
    }
}

#[test]
fn shipped_configs_pass() {
    let cases = [
        ("check", "torus.json"),
        ("vn", "vn_jordan.json"),
        ("rewrite", "rewrite.json"),
        ("berezin", "berezin.json"),
        ("dilate", "dilate.json"),
        ("dilate", "dilate_torus.json"),
        ("wold", "wold.json"),
        ("beurling", "beurling.json"),
        ("beurling", "beurling_subspaces.json"),
        ("beurling", "beurling_counterexample.json"),
    ];
    for (command, file) in cases {
        let dir = tempfile::tempdir().unwrap();
        let o = run(command, Some(&configs().join(file)), dir.path());
        assert_eq!(o.status.code(), Some(0), "{file}: {}{}", String::from_utf8_lossy(&o.stdout), stderr(&o));
    }
}

#[test]
fn wold_compare_separates_spectra() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("wold", Some(&configs().join("wold.json")), dir.path());
    assert_eq!(o.status.code(), Some(0));
    let rep = report(dir.path());
    assert_eq!(rep["results"]["compare"]["equivalence"]["verdict"], "not");
    assert_eq!(rep["results"]["dim"], 22);
}

#[test]
fn positive_degree_subspace_is_not_beurling() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("beurling", Some(&configs().join("beurling_counterexample.json")), dir.path());
    assert_eq!(o.status.code(), Some(0));
    let rep = report(dir.path());
    assert_eq!(rep["results"]["conditions"]["is_beurling"], false);
    assert_eq!(check_status(&rep, "defect_iff_doubly"), "PASS");
    assert_eq!(check_status(&rep, "factorization"), "SKIPPED");
}
