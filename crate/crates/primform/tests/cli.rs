//! End-to-end CLI checks: exit codes, spec files, and JSON report stability.

use primform::cli::run;
use primform::report::Report;

fn tmp_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("primform-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn verify_cp1_exits_zero() {
    let out = tmp_dir().join("verify_cp1.json");
    let code = run([
        "primform",
        "verify",
        "cp1",
        "--json",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let report: Report = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let v = report.verification.unwrap();
    assert!(v.all_passed);
    assert_eq!(v.conditions.len(), 5);
    assert_eq!(v.r.as_deref(), Some("0"));
}

#[test]
fn ring_from_spec_file() {
    let dir = tmp_dir();
    let spec_path = dir.join("a2.json");
    let spec = primform::specfile::builtin_spec("a2").unwrap();
    std::fs::write(&spec_path, serde_json::to_string_pretty(&spec).unwrap()).unwrap();
    let out = dir.join("ring_a2.json");
    let code = run([
        "primform",
        "ring",
        "--spec",
        spec_path.to_str().unwrap(),
        "--json",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let report: Report = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let ring = report.ring.unwrap();
    assert_eq!(ring.mu, 2);
    assert_eq!(ring.basis.len(), 2);
}

#[test]
fn bad_zeta_fails_with_homogeneity_witness() {
    let dir = tmp_dir();
    let spec_path = dir.join("cp1_bad_zeta.json");
    // cp1 with zeta = (1 + z) dz/z
    let spec_json = r#"{
      "kind": "laurent",
      "variables": [{"name": "z"}],
      "superpotential": [
        {"coefficient": "1", "exponents": {"z": 1}},
        {"coefficient": "1", "exponents": {"z": -1}, "parameters": {"q": 1}}
      ],
      "zeta": {
        "terms": [
          {"coefficient": "1"},
          {"coefficient": "1", "exponents": {"z": 1}}
        ],
        "volume": "dz/z"
      }
    }"#;
    std::fs::write(&spec_path, spec_json).unwrap();
    let out = dir.join("bad_zeta.json");
    let code = run([
        "primform",
        "verify",
        "--spec",
        spec_path.to_str().unwrap(),
        "--json",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 1, "a failing candidate must exit 1");
    let report: Report = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let v = report.verification.unwrap();
    assert!(!v.all_passed);
    let hom = v
        .conditions
        .iter()
        .find(|c| c.name == "homogeneity")
        .unwrap();
    assert!(!hom.passed);
    assert!(hom.witness.is_some());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(["primform", "ring"]), 2);
    assert_eq!(run(["primform", "ring", "nosuchsystem"]), 2);
    let dir = tmp_dir();
    let bad = dir.join("malformed.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run(["primform", "ring", "--spec", bad.to_str().unwrap()]), 2);
}

#[test]
fn json_reports_round_trip_byte_identical() {
    let dir = tmp_dir();
    for (sub, name) in [("ring", "a3"), ("verify", "cp1"), ("frobenius", "a2")] {
        let out = dir.join(format!("{}_{}.json", sub, name));
        let code = run(["primform", sub, name, "--json", out.to_str().unwrap()]);
        assert_eq!(code, 0, "{} {}", sub, name);
        let text = std::fs::read_to_string(&out).unwrap();
        let parsed: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed.to_json(), text, "round trip for {} {}", sub, name);
    }
}

#[test]
fn mirror_compare_small_caps_exits_zero() {
    let out = tmp_dir().join("mirror.json");
    let code = run([
        "primform",
        "mirror-compare",
        "cp1",
        "--max-insertions",
        "3",
        "--max-level",
        "2",
        "--max-degree",
        "2",
        "--json",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let report: Report = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let cmp = report.comparison.unwrap();
    assert!(cmp.matched);
    assert_eq!(cmp.max_discrepancy, "0");
}

#[test]
fn descendants_small_caps_exits_zero() {
    let out = tmp_dir().join("descendants.json");
    let code = run([
        "primform",
        "descendants",
        "cp1",
        "--max-insertions",
        "3",
        "--max-level",
        "2",
        "--max-degree",
        "2",
        "--json",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let report: Report = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let c = report.correlators.unwrap();
    assert!(c.axioms.string_ok && c.axioms.dilaton_ok && c.axioms.divisor_ok);
    assert!(c.axioms.pipelines_agree);
    // the one-point tower rows carry 1/(d!)^2
    assert_eq!(c.one_point_tower[0].b_value, "1");
    assert_eq!(c.one_point_tower[1].b_value, "1/4");
}
