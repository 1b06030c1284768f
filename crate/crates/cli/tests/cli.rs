use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn diskharm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diskharm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn help_documents_every_flag() {
    let top = diskharm(&["--help"]);
    assert_eq!(top.status.code(), Some(0));
    let verify = diskharm(&["verify", "--help"]);
    assert_eq!(verify.status.code(), Some(0));
    let text = String::from_utf8_lossy(&verify.stdout);
    for flag in [
        "--input", "--preset", "--p", "--K", "--Kprime", "--levels", "--N", "--tol", "--seed",
        "--out", "--format",
    ] {
        let line = text
            .lines()
            .find(|l| l.trim_start().starts_with(&format!("{flag} ")))
            .unwrap_or_else(|| panic!("{flag} missing from help"));
        let described = line.split_once('>').map_or("", |(_, rest)| rest).trim();
        assert!(!described.is_empty(), "{flag} has no description");
    }
}

#[test]
fn constants_reports_c_of_1() {
    let out = diskharm(&["constants", "--p", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let c = v[0]["c_value"].as_f64().unwrap();
    assert!((c - 4.0 * std::f64::consts::LN_2 / std::f64::consts::PI).abs() < 1e-9);
    assert!(v[0]["upper_bound"].as_f64().unwrap() > c);
}

#[test]
fn verify_lemma_ft_passes() {
    let out = diskharm(&["verify", "lemma-ft", "--preset", "abs-sin", "--p", "1"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    assert_eq!(v["statement_id"], "lemma-ft");
    assert_eq!(v["pass"], true);
    assert!(v["lhs"].as_f64().unwrap() <= 2.0 / std::f64::consts::PI);
}

#[test]
fn counterexample_passes_as_csv() {
    let out = diskharm(&["verify", "thm1-counterexample", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "statement_id,boundary,p,K,Kprime,lhs,rhs,margin,pass"
    );
    let row = lines.next().unwrap();
    assert!(row.starts_with("thm1-counterexample,abs-sin,inf,"));
    assert!(row.ends_with(",true"));
}

#[test]
fn thm2_without_k_is_a_usage_error() {
    let out = diskharm(&["verify", "thm2-finite-p", "--preset", "mode:1", "--p", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_statement_and_preset_exit_2() {
    assert_eq!(
        diskharm(&["verify", "lemma-xx", "--preset", "mode:1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        diskharm(&["verify", "lemma-ft", "--preset", "nope"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn empty_preset_list_exits_2() {
    let out = diskharm(&["suite", "--presets", ""]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("preset list is empty"));
}

#[test]
fn low_truncation_flags_degraded_accuracy() {
    let out = diskharm(&["suite", "--presets", "abs-sin", "--N", "8", "--p", "inf"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let reports = v["reports"].as_array().unwrap();
    assert!(reports.iter().any(|r| r["degraded"] == true));
    assert_eq!(v["config"]["truncation"], 8);
}

#[test]
fn reruns_are_byte_identical() {
    let args = |path: &str| {
        vec![
            "suite".to_string(),
            "--presets".into(),
            "mode:1,elliptic-trace,affine:0.5".into(),
            "--p".into(),
            "2,inf".into(),
            "--levels".into(),
            "8".into(),
            "--out".into(),
            path.into(),
        ]
    };
    let a = scratch("rerun-a.json");
    let b = scratch("rerun-b.json");
    for path in [&a, &b] {
        let list = args(path.to_str().unwrap());
        let out = diskharm(&list.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let first = std::fs::read(&a).unwrap();
    assert!(!first.is_empty());
    assert_eq!(first, std::fs::read(&b).unwrap());
}

#[test]
fn input_document_matches_preset() {
    let doc = scratch("mode1.json");
    std::fs::write(
        &doc,
        r#"{"kind": "fourier", "coefficients": [[1, 1.0, 0.0]]}"#,
    )
    .unwrap();
    let from_file = diskharm(&[
        "extend",
        "--input",
        doc.to_str().unwrap(),
        "--at",
        "0.3,0.4",
    ]);
    let from_preset = diskharm(&["extend", "--preset", "mode:1", "--at", "0.3,0.4"]);
    assert_eq!(
        from_file.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&from_file.stderr)
    );
    let a = &json(&from_file)["points"][0]["value"];
    let b = &json(&from_preset)["points"][0]["value"];
    assert!(a.is_array(), "{a}");
    assert_eq!(a, b);
}

#[test]
fn failing_check_exits_1() {
    // Without K' the elliptic trace breaks the p = 1 bound: lhs → 2, rhs = 4/π.
    let out = diskharm(&[
        "verify",
        "thm2-finite-p",
        "--preset",
        "elliptic-trace",
        "--K",
        "1",
        "--Kprime",
        "0",
        "--p",
        "1",
    ]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert_eq!(json(&out)["pass"], false);
}
