use std::process::{Command, Output};

use serde_json::Value;

fn conichom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conichom"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: stdout {:?}, stderr {:?}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn theta_of_the_pentagon() {
    let out = conichom(&["theta", "cycle:5", "--cone", "splus"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!((v["value"].as_f64().unwrap() - 5f64.sqrt()).abs() < 1e-6);
    assert_eq!(v["parameter"], "theta");
    assert_eq!(v["cone"], "splus");
    assert_eq!(v["attained"], true);
}

#[test]
fn theta_of_complete_graph_over_cp() {
    let out = conichom(&["theta", "complete:4", "--cone", "cp"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["value"].as_f64(), Some(1.0));
}

#[test]
fn theta_of_petersen() {
    let out = conichom(&["theta", "petersen", "--cone", "splus"]);
    assert_eq!(code(&out), 0);
    assert!((json(&out)["value"].as_f64().unwrap() - 4.0).abs() < 1e-5);
}

#[test]
fn big_theta_kind() {
    let out = conichom(&["theta", "cycle:5", "--cone", "cp", "--kind", "big_theta"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["parameter"], "big_theta");
    assert!((v["value"].as_f64().unwrap() - 2.5).abs() < 1e-9);
}

#[test]
fn theta_reads_graph_files() {
    let dir = std::env::temp_dir().join(format!("conichom-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("c5.json");
    std::fs::write(
        &path,
        r#"{"n": 5, "edges": [[0,1],[1,2],[2,3],[3,4],[0,4]]}"#,
    )
    .unwrap();
    let out = conichom(&["theta", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!((json(&out)["value"].as_f64().unwrap() - 5f64.sqrt()).abs() < 1e-6);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn hom_exit_codes() {
    let out = conichom(&["hom", "cycle:5", "complete:3", "--cone", "cp"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["verdict"], "yes");

    let out = conichom(&["hom", "complete:3", "cycle:5", "--cone", "splus"]);
    assert_eq!(code(&out), 3);
    let v = json(&out);
    assert_eq!(v["verdict"], "no");
    assert!(v["reason"].is_string());

    let out = conichom(&[
        "hom", "cycle:5", "cycle:5", "--cone", "dnn", "--mode", "weak",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["verdict"], "yes");
}

#[test]
fn weak_psd_is_rejected() {
    let out = conichom(&[
        "hom", "cycle:5", "cycle:5", "--cone", "splus", "--mode", "weak",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn products() {
    let v = json(&conichom(&[
        "product",
        "homomorphic",
        "cycle:5",
        "complete:3",
    ]));
    assert_eq!(v["n"], 15);

    let v = json(&conichom(&[
        "product",
        "categorical",
        "complete:2",
        "complete:2",
    ]));
    assert_eq!(v["n"], 4);
    assert_eq!(v["edges"], serde_json::json!([[0, 3], [1, 2]]));

    let v = json(&conichom(&["product", "union", "complete:2", "complete:3"]));
    assert_eq!(v["n"], 5);
    assert_eq!(v["edges"].as_array().unwrap().len(), 4);
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["product", "cartesian", "complete:2", "complete:2"],
        vec!["theta", "cycle:2"],
        vec!["theta", "no-such-graph"],
        vec!["theta", "cycle:5", "--cone", "copositive"],
        vec!["hom", "cycle:5"],
        vec!["verify", "no-such-suite"],
        vec!["frobnicate"],
        vec!["theta", "cycle:5", "--feas-tol", "-1"],
    ] {
        let out = conichom(&args);
        assert_eq!(
            code(&out),
            1,
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert_eq!(code(&conichom(&["--help"])), 0);
    assert_eq!(code(&conichom(&["--version"])), 0);
}

#[test]
fn json_flag_writes_the_printed_result() {
    let path = std::env::temp_dir().join(format!("conichom-theta-{}.json", std::process::id()));
    let out = conichom(&["theta", "cycle:7", "--json", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let written = std::fs::read(&path).unwrap();
    assert_eq!(written, out.stdout);
    std::fs::remove_file(&path).ok();
}

#[test]
fn verify_suite_passes_and_reports() {
    let path = std::env::temp_dir().join(format!("conichom-verify-{}.json", std::process::id()));
    let out = conichom(&["verify", "theta-product", "--json", path.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 0, "{stdout}");
    assert!(stdout.starts_with("PASS"), "{stdout}");
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let entry = &report["suites"][0];
    assert_eq!(entry["suite"], "theta-product");
    assert_eq!(entry["status"], "pass");
    assert!(entry["instances"].as_u64().unwrap() >= 8);
    assert_eq!(entry["fail"], 0);
    std::fs::remove_file(&path).ok();
}

#[test]
fn verify_list_names_every_suite() {
    let out = conichom(&["verify", "--list"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 20);
}

#[test]
fn runs_are_deterministic() {
    let a = conichom(&["hom", "petersen", "complete:3", "--cone", "dnn"]);
    let b = conichom(&["hom", "petersen", "complete:3", "--cone", "dnn"]);
    assert_eq!(a.stdout, b.stdout);

    let strip = |out: &Output| -> Vec<String> {
        String::from_utf8_lossy(&out.stdout)
            .lines()
            .map(|l| l.rsplit_once("  ").map_or(l, |(head, _)| head).to_string())
            .collect()
    };
    let a = conichom(&["verify", "closure", "--seed", "7"]);
    let b = conichom(&["verify", "closure", "--seed", "7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(strip(&a), strip(&b));
}
