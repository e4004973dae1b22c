use std::path::Path;
use std::process::{Command, Output};

use gpe_core::PolyMap;

fn gpe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpe"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn classify_worked_example_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.toml", "blocks = [2, 2, 2]\nexponents = [4, 6]\n");
    let t = write(dir.path(), "t.toml", "blocks = [3, 10, 2]\nexponents = [2, 3]\n");
    let nf_dir = dir.path().join("nf");
    let out = gpe(&[
        "classify", "--source", &s, "--target", &t, "--emit-normal-forms",
        nf_dir.to_str().unwrap(), "--samples", "200", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    let list = report["admissible"].as_array().unwrap();
    assert_eq!(list.len(), 1);
    assert_eq!(list[0]["sigma"], serde_json::json!([1, 2, 3]));
    assert_eq!(list[0]["multipliers"], serde_json::json!([2, 2]));
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));

    let file = list[0]["normal_form_file"].as_str().unwrap();
    let map = PolyMap::load(file).unwrap();
    assert_eq!(PolyMap::from_toml_str(&map.to_toml_string()).unwrap(), map);
    let again = gpe(&["verify-proper", "--map", file, "--samples", "200"]);
    assert_eq!(again.status.code(), Some(0));
}

#[test]
fn regime_example_lists_only_linear_forms() {
    let dir = tempfile::tempdir().unwrap();
    // n_j < 2 m_sigma(j) - 1 for every block
    let s = write(dir.path(), "s.toml", "blocks = [3, 3, 1]\nexponents = [2, 2]\n");
    let t = write(dir.path(), "t.toml", "blocks = [4, 3, 2]\nexponents = [2, 2]\n");
    let out = gpe(&["classify", "--source", &s, "--target", &t, "--samples", "100", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    let list = report["admissible"].as_array().unwrap();
    assert_eq!(list.len(), 2);
    for a in list {
        assert!(a["multipliers"].as_array().unwrap().iter().all(|m| m == 1));
    }
}

#[test]
fn empty_list_exit_code_and_caveat() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.toml", "blocks = [2, 2]\nexponents = [2]\n");
    let t = write(dir.path(), "t.toml", "blocks = [2, 2]\nexponents = [3]\n");
    let out = gpe(&["classify", "--source", &s, "--target", &t]);
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains(gpe_core::classify::EMPTY_LIST_CAVEAT));
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "blocks = [2, 2]\nexponent = [3]\n");
    let out = gpe(&["verify-frame", "--sig", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bad.toml") && err.contains("line 2") && err.contains("exponent"), "{err}");

    let s = write(dir.path(), "s.toml", "blocks = [1, 2]\nexponents = [2]\n");
    let out = gpe(&["classify", "--source", &s, "--target", &s]);
    assert_eq!(out.status.code(), Some(2));

    let good = write(dir.path(), "g.toml", "blocks = [2, 2]\nexponents = [2]\n");
    let out = gpe(&["verify-frame", "--sig", &good, "--tol", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_frame_defaults_pass() {
    let dir = tempfile::tempdir().unwrap();
    let sig = write(dir.path(), "sig.toml", "blocks = [2, 2]\nexponents = [2]\n");
    let out = gpe(&["verify-frame", "--sig", &sig, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    let checks = report["checks"].as_array().unwrap();
    let gap = checks.iter().find(|c| c["name"] == "levi_w_diagonal_fd_vs_table").unwrap();
    assert_eq!(gap["informational"], true);
    assert!(checks.iter().filter(|c| c["informational"] == false).all(|c| c["pass"] == true));
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let sig = write(dir.path(), "sig.toml", "blocks = [2, 3, 1]\nexponents = [3, 2]\n");
    let run = || {
        let out = gpe(&["verify-frame", "--sig", &sig, "--samples", "50", "--seed", "7", "--format", "json"]);
        let mut v = json(&out);
        v.as_object_mut().unwrap().remove("wall_time_s");
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn h_map_table() {
    let out = gpe(&["h-map", "--dim", "2", "--degree", "2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    let terms = report["terms"].as_array().unwrap();
    let coeffs: Vec<&str> = terms.iter().map(|t| t["coefficient"].as_str().unwrap()).collect();
    let monos: Vec<&str> = terms.iter().map(|t| t["monomial"].as_str().unwrap()).collect();
    assert_eq!(coeffs, ["1", "sqrt(2)", "1"]);
    assert_eq!(monos, ["z1^2", "z1*z2", "z2^2"]);
}

#[test]
fn equivalence_detects_degree_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.toml", "blocks = [2, 1]\nexponents = [4]\n");
    let t2 = write(dir.path(), "t2.toml", "blocks = [3, 1]\nexponents = [2]\n");
    let t1 = write(dir.path(), "t1.toml", "blocks = [3, 1]\nexponents = [4]\n");
    let d2 = dir.path().join("m2");
    let d1 = dir.path().join("m1");
    for (t, d) in [(&t2, &d2), (&t1, &d1)] {
        let out = gpe(&["classify", "--source", &s, "--target", t, "--samples", "50", "--emit-normal-forms", d.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    let quad = d2.join("normal_form_1.toml");
    let lin = d1.join("normal_form_1.toml");
    let same = gpe(&["equivalence", "--map", quad.to_str().unwrap(), "--map2", quad.to_str().unwrap()]);
    assert_eq!(same.status.code(), Some(0));
    let diff = gpe(&["equivalence", "--map", quad.to_str().unwrap(), "--map2", lin.to_str().unwrap()]);
    assert_eq!(diff.status.code(), Some(1));
}
