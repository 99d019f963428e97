use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn ldsq(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ldsq"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn ldsq");
    if let Some(text) = stdin {
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    }
    drop(child.stdin.take());
    child.wait_with_output().unwrap()
}

fn json_out(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad stdout ({e}): {}\nstderr: {}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const F: &str = r#"{"n": 2, "points": [[0, 0, 0], [1, 1, 0]]}"#;
const G: &str = r#"{"n": 2, "points": [[0, 0, 0], [1, 2, 0]]}"#;

#[test]
fn classify_light_like_example() {
    let out = ldsq(&["classify"], Some(F));
    assert_eq!(out.status.code(), Some(0));
    let v = json_out(&out);
    assert_eq!(v["normal_form"]["tag"], "lightlike_fold");
    assert_eq!(v["theorem_case"], "Theorem 1(1c)");
    assert_eq!(v["borderline"], false);
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(
        keys,
        ["borderline", "general_position", "k", "likeness", "n", "normal_form", "recognition_dim", "theorem_case"]
    );
}

#[test]
fn classify_same_point_and_time_like() {
    let v = json_out(&ldsq(&["classify"], Some(r#"{"n": 2, "points": [[1, 2, 3], [1, 2, 3]]}"#)));
    assert_eq!(v["normal_form"]["tag"], "same_point");
    assert_eq!(v["theorem_case"], "Appendix (3)");
    let v = json_out(&ldsq(&["classify"], Some(r#"{"n": 2, "points": [[0, 0, 0], [-2, -1, -1]]}"#)));
    assert_eq!(v["normal_form"]["tag"], "definite_fold");
    assert_eq!(v["k"], 1);
}

#[test]
fn output_is_canonical() {
    let a = ldsq(&["classify"], Some(G));
    let b = ldsq(&["classify"], Some(r#"{"points": [[0, 0, 0], ["1/1", "2", 0]], "n": 2}"#));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn malformed_input_exits_2() {
    let out = ldsq(&["classify"], Some("{\"n\": 2, \"points\": "));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));
    let out = ldsq(&["classify"], Some(r#"{"n": 2, "points": [[0, 0, 0], [1, 1]]}"#));
    assert_eq!(out.status.code(), Some(2));
    let out = ldsq(&["classify", "--exact"], Some(r#"{"n": 2, "points": [[0, 0, 0], [1.5, 1, 0]]}"#));
    assert_eq!(out.status.code(), Some(2));
    let out = ldsq(&["frobnicate"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn witness_round_trip_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let out = ldsq(&["witness"], Some(G));
    assert_eq!(out.status.code(), Some(0));
    let w = write(dir.path(), "g.json", std::str::from_utf8(&out.stdout).unwrap());
    let out = ldsq(&["verify", "--witness", &w], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json_out(&out);
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["samples"], 100);
    assert_eq!(v["seed"], 42);
    assert_eq!(v["tol"], 1e-8);

    // explicit config file instead of the embedded one
    let c = write(dir.path(), "c.json", G);
    let again = ldsq(&["verify", &c, "--witness", &w], None);
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn corrupted_witness_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc: Value = serde_json::from_slice(&ldsq(&["witness"], Some(G)).stdout).unwrap();
    doc["witness"]["source"]["translation"][1] = Value::from(0.25);
    let w = write(dir.path(), "bad.json", &doc.to_string());
    let out = ldsq(&["verify", "--witness", &w], None);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_out(&out)["verdict"], "fail");

    let w = write(dir.path(), "garbage.json", "not json");
    assert_eq!(ldsq(&["verify", "--witness", &w], None).status.code(), Some(2));
}

#[test]
fn verify_flags_override_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(dir.path(), "w.json", std::str::from_utf8(&ldsq(&["witness"], Some(F)).stdout).unwrap());
    let v = json_out(&ldsq(&["verify", "--witness", &w, "--samples", "7", "--seed", "3", "--tol", "1e-6"], None));
    assert_eq!(v["samples"], 7);
    assert_eq!(v["seed"], 3);
    assert_eq!(v["verdict"], "pass");
    assert_eq!(ldsq(&["verify", "--witness", &w, "--samples", "0"], None).status.code(), Some(2));
}

#[test]
fn every_branch_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        r#"{"n": 2, "points": [[0, 0, 0], [2, 1, 0]]}"#,
        r#"{"n": 2, "points": [[0, 0, 0], [0, 1, 0], [0, 0, 1]]}"#,
        r#"{"n": 2, "points": [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]}"#,
        r#"{"n": 2, "points": [[0, 0, 0], [1, 0, 0], [2, 0, 0]]}"#,
        r#"{"n": 2, "points": [[0, 0, 0], [0, 1, 0], [0, 2, 0], [0, 3, 0]]}"#,
        r#"{"n": 2, "points": [[0, 0, 0], [1, 1, 0], [2, 2, 0]]}"#,
        r#"{"n": 1, "points": [["1/2", 3], ["1/2", 3], ["1/2", 3]]}"#,
        r#"{"n": 3, "points": [[0, 0, 0, 0], ["1/3", 1, 0, "-2/5"], [1, 0, 1, 0]]}"#,
    ];
    for (i, c) in configs.iter().enumerate() {
        let out = ldsq(&["witness"], Some(c));
        assert_eq!(out.status.code(), Some(0), "{c}: {}", String::from_utf8_lossy(&out.stderr));
        let w = write(dir.path(), &format!("w{i}.json"), std::str::from_utf8(&out.stdout).unwrap());
        let v = ldsq(&["verify", "--witness", &w], None);
        assert_eq!(v.status.code(), Some(0), "{c}");
    }
}

#[test]
fn euclid_commands() {
    let phi = r#"{"n": 2, "points": [[0, 0, 0], [-1, -2, -1]]}"#;
    let v = json_out(&ldsq(&["compare"], Some(phi)));
    assert_eq!(v["equivalent_to_euclidean"], false);
    let v = json_out(&ldsq(&["classify", "--euclid"], Some(phi)));
    assert_eq!(v["normal_form"]["tag"], "definite_fold");
    let dir = tempfile::tempdir().unwrap();
    let w = write(dir.path(), "e.json", std::str::from_utf8(&ldsq(&["witness", "--euclid"], Some(phi)).stdout).unwrap());
    assert_eq!(ldsq(&["verify", "--witness", &w], None).status.code(), Some(0));
    let collinear = r#"{"n": 2, "points": [[0, 0, 0], [0, 1, 0], [0, 2, 0]]}"#;
    assert_eq!(ldsq(&["classify", "--euclid"], Some(collinear)).status.code(), Some(2));
}

#[test]
fn fiber_json_and_csv() {
    let out = ldsq(&["fiber", "--y", "-1,3", "--count", "6"], Some(G));
    assert_eq!(out.status.code(), Some(0));
    let v = json_out(&out);
    assert_eq!(v["conic"], "equilateral_hyperbola");
    assert_eq!(v["points"].as_array().unwrap().len(), 6);

    let out = ldsq(&["fiber", "--y", "1,2", "--count", "4", "--csv"], Some(F));
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x0,x1,x2");
    assert_eq!(lines.len(), 5);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 3));
}

#[test]
fn fiber_target_from_document() {
    let doc = r#"{"n": 2, "points": [[0, 0, 0], [2, 1, 0]], "y": [1, -2], "count": 5}"#;
    let v = json_out(&ldsq(&["fiber"], Some(doc)));
    assert_eq!(v["conic"], "circle");
    assert_eq!(v["count"], 5);
}

#[test]
fn singular_parabola_fiber_exits_2() {
    // y = L(p_0): the fiber passes through the apex of the degenerate parabola
    let out = ldsq(&["fiber", "--y", "0,0"], Some(F));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("singular or empty fiber"));
    let out = ldsq(&["fiber"], Some(F));
    assert_eq!(out.status.code(), Some(2));
}
