use std::io::Write;
use std::process::{Command, Output};

fn crsf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crsf"))
        .args(args)
        .env_remove("CRSF_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Value of a `key: value` line.
fn field(text: &str, key: &str) -> String {
    let prefix = format!("{key}: ");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
        .to_string()
}

fn real(text: &str, key: &str) -> f64 {
    field(text, key).parse().unwrap()
}

/// Real and imaginary parts of `a+bi`.
fn complex(text: &str, key: &str) -> (f64, f64) {
    let s = field(text, key);
    let s = s.strip_suffix('i').unwrap();
    // the first sign that is not part of an exponent
    let b = s.as_bytes();
    let at = (1..b.len())
        .find(|&i| (b[i] == b'+' || b[i] == b'-') && b[i - 1] != b'e')
        .unwrap();
    (s[..at].parse().unwrap(), s[at..].parse().unwrap())
}

fn graph_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn cycle_determinant_has_closed_form() {
    // one generator on a cycle of unit conductances: 2 - z - 1/z
    let z = (0.6f64, 0.8f64);
    let out = crsf(&["det", "--preset", "cycle:5", "--mono", "0.6+0.8i"]);
    assert!(out.status.success(), "{out:?}");
    let (re, im) = complex(&stdout(&out), "det");
    let norm = z.0 * z.0 + z.1 * z.1;
    let expect = (2.0 - z.0 - z.0 / norm, -z.1 + z.1 / norm);
    assert!((re - expect.0).abs() < 1e-10 && (im - expect.1).abs() < 1e-10);
}

#[test]
fn file_determinant_agrees_with_oracle() {
    let f = graph_file("v 3\ne 0 1 1\ne 1 2 2\ne 0 2 0.5\nphi 0 1 0 1\n");
    let out = crsf(&["det", "--file", f.path().to_str().unwrap(), "--oracle"]);
    assert!(out.status.success(), "{out:?}");
    assert!(real(&stdout(&out), "relative_error") < 1e-12);
}

#[test]
fn unreadable_input_exits_with_two() {
    let f = graph_file("v 2\ne 0 1 0\n");
    let out = crsf(&["det", "--file", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert_eq!(
        crsf(&["det", "--preset", "ladder:3"]).status.code(),
        Some(2)
    );
}

#[test]
fn oversized_oracle_exits_with_three() {
    let out = crsf(&["det", "--preset", "grid:5x5", "--oracle"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
}

#[test]
fn sampling_is_deterministic() {
    let args = [
        "sample",
        "--preset",
        "cylinder:3x4",
        "--seed",
        "11",
        "--count",
        "4",
    ];
    let a = crsf(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, crsf(&args).stdout);
    let other = crsf(&[
        "sample",
        "--preset",
        "cylinder:3x4",
        "--seed",
        "12",
        "--count",
        "4",
    ]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn annulus_single_cycle_probability() {
    let out = crsf(&["annulus", "--preset", "cylinder:8x8"]);
    assert!(out.status.success(), "{out:?}");
    let p = real(&stdout(&out), "single_cycle_probability");
    assert!(p > 0.9 && p < 1.0, "{p}");
}

#[test]
fn torus_class_probability() {
    let out = crsf(&["torus", "--probability", "1,0,1"]);
    assert!(out.status.success(), "{out:?}");
    let p = real(&stdout(&out), "probability");
    assert!((p - 0.4069).abs() < 1e-3, "{p}");
    assert_eq!(
        crsf(&["torus", "--probability", "1,0"]).status.code(),
        Some(2)
    );
}

#[test]
fn json_output_parses_and_matches_text() {
    let text = stdout(&crsf(&[
        "lerw", "--preset", "grid:4x4", "--face", "1.5,1.5",
    ]));
    let out = crsf(&[
        "lerw", "--preset", "grid:4x4", "--face", "1.5,1.5", "--json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["command"], "lerw");
    let p = v["probability_left"].as_f64().unwrap();
    assert_eq!(p, real(&text, "probability_left"));
    assert!((p - 0.5).abs() < 1e-9);
}

#[test]
fn output_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.txt");
    let out = crsf(&[
        "annulus",
        "--preset",
        "cylinder:4x6",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(field(&written, "command"), "annulus");
}

#[test]
fn thread_count_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_crsf"))
        .args(["det", "--preset", "cycle:4"])
        .env("CRSF_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
