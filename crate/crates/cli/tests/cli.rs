use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(scenario: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alphabeta"))
        .arg("--scenario")
        .arg(scenario)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

#[test]
fn invalid_matsumoto_exits_with_property_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&scenario("validate_matsumoto.json"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    let report = std::fs::read_to_string(dir.path().join("validate_matsumoto.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(v["pass"], false);
    let failures = v["report"]["failures"].as_array().unwrap();
    assert!(failures.iter().any(|f| f.as_str().unwrap().starts_with("Φ failure")));
}

#[test]
fn indicatrix_equidistance_writes_distance_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&scenario("foliation_indicatrix.json"), dir.path(), &["--threads", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("foliation_indicatrix.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("level,x1,x2,future,past"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 64);
    for r in rows {
        // distance from F = 1 to F = level is level - 1 both ways
        assert!((r[3] - (r[0] - 1.0)).abs() < 1e-6 && (r[4] - (r[0] - 1.0)).abs() < 1e-6);
    }
    assert!(!csv.contains('\r'));
}

#[test]
fn malformed_json_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"command": "validate", "payload": {"norm": "#).unwrap();
    let out = run(&bad, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn schema_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"command": "tensor", "payload": {"norm": {"dim": 2, "a": [1, 0, 0, 1], "bvec": [0, 0], "phi": {"family": "randers", "colour": 1}}, "vectors": [[1, 0]]}}"#,
    )
    .unwrap();
    let out = run(&bad, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("payload.norm.phi"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for name in ["submersion_vertical_randers.json", "average_randers.json", "foliation_rank.json"] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let first = run(&scenario(name), a.path(), &["--threads", "1"]);
        let second = run(&scenario(name), b.path(), &["--threads", "3"]);
        assert_eq!(first.status.code(), Some(0), "{name}");
        assert_eq!(second.status.code(), Some(0), "{name}");
        let file = name.to_string();
        assert_eq!(
            std::fs::read(a.path().join(&file)).unwrap(),
            std::fs::read(b.path().join(&file)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn every_bundled_scenario_runs() {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(scenario("")).unwrap() {
        let path = entry.unwrap().path();
        let expected = if path.file_name().unwrap() == "validate_matsumoto.json" { 1 } else { 0 };
        let out = run(&path, dir.path(), &[]);
        assert_eq!(out.status.code(), Some(expected), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn csv_is_rejected_where_undefined() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("legendre_quadratic.json"))
        .unwrap()
        .replace(r#""format": "json""#, r#""format": "csv""#);
    let path = dir.path().join("s.json");
    std::fs::write(&path, text).unwrap();
    assert_eq!(run(&path, dir.path(), &[]).status.code(), Some(2));
}
