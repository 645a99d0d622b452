use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_skewbraid"))
}

fn run_json(args: &[&str]) -> Value {
    let output = bin().args(args).output().expect("binary runs");
    assert!(
        output.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

#[test]
fn analyze_preset_reports_agreement() {
    let report = run_json(&["analyze", "--preset", "d3-ex3-adm", "--steps", "512"]);
    assert_eq!(report["schema"], "skewbraid/1");
    assert_eq!(report["admissibility"]["admissible"], true);
    assert_eq!(report["monodromy"]["cycle_type"], serde_json::json!([1, 2]));
    assert_eq!(report["braid"]["exponent_sum"], 3);
    assert_eq!(report["agreement"]["windings_match"], true);
    assert_eq!(report["agreement"]["exponent_sum_matches_linking"], true);
}

#[test]
fn braid_writes_svg_and_csv() {
    let dir = std::env::temp_dir().join("skewbraid-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let svg = dir.join("strands.svg");
    let csv = dir.join("strands.csv");
    let report = run_json(&[
        "braid",
        "--preset",
        "d3-ex1-adm",
        "--steps",
        "256",
        "--svg",
        svg.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(report["exponent_sum"], 6);
    assert_eq!(report["quasipositive_word"], true);
    let svg_text = std::fs::read_to_string(&svg).unwrap();
    assert!(svg_text.starts_with("<svg"));
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with("strand_id,t,re_w,im_w"));
}

#[test]
fn img_verify_matches() {
    let report = run_json(&[
        "img-verify",
        "--preset",
        "d3-ex2-adm",
        "--level",
        "2",
        "--turns",
        "2",
        "--steps",
        "512",
    ]);
    assert_eq!(report["matches"], true);
    assert_eq!(report["s"]["cycle_type"], serde_json::json!([3]));
}

#[test]
fn scan_e_detects_circle_roots() {
    // A_0 = (z + 1)³ vanishes at z = −1, so the discriminant meets the circle
    let dir = std::env::temp_dir().join("skewbraid-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("on-circle.json");
    std::fs::write(
        &path,
        r#"{"d": 2, "a": [[[1.0, 0.0], [1.0, 0.0], [0.0, 0.0]]]}"#,
    )
    .unwrap();
    let report = run_json(&["scan-e", "--params", path.to_str().unwrap()]);
    assert_eq!(report["in_e"], true);
    let roots = report["circle_roots"].as_array().unwrap();
    assert_eq!(roots.len(), 1);
    assert!((roots[0][0].as_f64().unwrap() + 1.0).abs() < 1e-6);
}

#[test]
fn quad_counts_disk_roots() {
    for (preset, s) in [("d2-s0", 0), ("d2-s1", 1), ("d2-s2", 2)] {
        let report = run_json(&["quad", "--preset", preset]);
        assert_eq!(report["s"], s, "{preset}");
    }
}

#[test]
fn factory_emits_loadable_parameters() {
    let dir = std::env::temp_dir().join("skewbraid-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("factory.json");
    let output = bin()
        .args(["factory", "--d", "3", "--fixed", "1", "--cycles", "2", "--out", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(output.status.success());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written["expected_cycle_type"], serde_json::json!([1, 2]));
    // round-trip the generated parameter through analyze
    let param_path = dir.join("factory-lambda.json");
    std::fs::write(&param_path, serde_json::to_string(&written["lambda"]).unwrap()).unwrap();
    let analysis = run_json(&["analyze", "--params", param_path.to_str().unwrap(), "--steps", "256"]);
    assert_eq!(analysis["monodromy"]["cycle_type"], serde_json::json!([1, 2]));
}

#[test]
fn suspension_seam_equality() {
    let report = run_json(&[
        "suspension", "--perm", "(2 3)", "--d", "3", "--t1", "0", "--code1", ":2", "--t2", "1",
        "--code2", ":3",
    ]);
    assert_eq!(report["equal"], true);
    assert_eq!(report["component_of_point1"]["winding"], 2);
}

#[test]
fn inadmissible_parameter_exits_one() {
    let dir = std::env::temp_dir().join("skewbraid-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("zero.json");
    std::fs::write(
        &path,
        r#"{"d": 2, "a": [[[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]]}"#,
    )
    .unwrap();
    let output = bin()
        .args(["analyze", "--params", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&output.stderr).expect("structured stderr");
    assert_eq!(err["error"]["kind"], "precondition");
}

#[test]
fn unknown_preset_exits_one() {
    let output = bin().args(["analyze", "--preset", "nope"]).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn reports_are_deterministic() {
    let a = bin().args(["analyze", "--preset", "d3-ex1-adm", "--steps", "256"]).output().unwrap();
    let b = bin().args(["analyze", "--preset", "d3-ex1-adm", "--steps", "256"]).output().unwrap();
    assert_eq!(a.stdout, b.stdout);
}
