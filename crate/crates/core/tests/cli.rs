use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_szlenk-lab"));
    c.env("SZLENK_LAB_THREADS", "2");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn tsirelson_curve_csv() {
    let out = run(&["curves", "--space", "tsirelson", "--eps-grid", "0.5:1.5:0.5", "--out", "csv"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.splitn(6, ',').collect()).collect();
    assert_eq!(rows[0], ["eps", "rLower", "rUpper", "RLower", "RUpper", "provenance"]);
    assert_eq!(rows.len(), 4);
    for (row, r) in rows[1..].iter().zip(["0.875000000000", "0.750000000000", "0.625000000000"]) {
        assert_eq!(row[1], r);
        assert_eq!(row[2], r);
        assert_eq!(row[3], "1.00000000000");
    }
}

#[test]
fn baernstein_curve_matches_mq_radius() {
    let out = run(&["curves", "--space", "baernstein", "--eps-grid", "0.5:1.5:0.5", "--budget", "4", "--out", "json"]);
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    for s in doc["samples"].as_array().unwrap() {
        let eps = s["eps"].as_f64().unwrap();
        let mq = szlenk_lab::szlenk::mq_radius(eps, 2.0).unwrap();
        assert!((s["rLower"].as_f64().unwrap() - mq).abs() < 1e-11);
        assert_eq!(s["partial"], true);
    }
}

#[test]
fn empty_grid_writes_header_only() {
    let dir = std::env::temp_dir().join(format!("szlenk-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("curve.csv");
    let out = run(&["curves", "--space", "schlumprecht", "--eps-grid", "", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "eps,rLower,rUpper,RLower,RUpper,provenance\n");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    assert_eq!(code(&run(&["verify", "--suite", "nonsense"])), 2);
    assert_eq!(code(&run(&["norm", "--space", "hilbert", "--vec", "[[1,1]]"])), 2);
    assert_eq!(code(&run(&["norm", "--space", "tsirelson", "--vec", "[[0,1]]"])), 2);
    assert_eq!(code(&run(&["norm", "--space", "tsirelson"])), 2);
    assert_eq!(code(&run(&["verify", "--oracle-cap", "3"])), 2);
    let unwritable = run(&["curves", "--space", "tsirelson", "--eps-grid", "0.5:0.5:0.1", "--out", "/nonexistent-dir/c.csv"]);
    assert_eq!(code(&unwritable), 3);
    assert_eq!(code(&run(&["norm", "--space", "tsirelson", "--vec", "@/nonexistent-file.json"])), 3);
    // the Tsirelson construction needs a point strictly inside the ball
    assert_eq!(code(&run(&["certify", "--space", "tsirelson", "--point", "[[1,1.0]]", "--eps", "1"])), 1);
}

#[test]
fn injected_fault_fails_orlicz_suite() {
    let ok = run(&["verify", "--suite", "orlicz", "--samples", "200"]);
    assert_eq!(code(&ok), 0);
    let bad = run(&["verify", "--suite", "orlicz", "--samples", "200", "--inject-fault", "swap-v1v2"]);
    assert_eq!(code(&bad), 1);
    let doc: serde_json::Value = serde_json::from_slice(&bad.stdout).unwrap();
    let failed: Vec<&str> = doc["records"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["status"] == "fail")
        .map(|r| r["id"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["orlicz.kkt"]);
}

#[test]
fn verify_is_deterministic_and_anchored() {
    let args = ["verify", "--suite", "all", "--seed", "7", "--samples", "50"];
    let a = run(&args);
    let b = bin().args(args).env("SZLENK_LAB_THREADS", "1").output().unwrap();
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    for r in doc["records"].as_array().unwrap() {
        assert!(!r["anchor"].as_str().unwrap().is_empty());
        assert!(r["tolerance"].is_number());
        assert!(r["measured"].is_object());
    }
}

#[test]
fn baernstein_suite_records() {
    let out = run(&["verify", "--suite", "baernstein", "--out", "csv"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for id in ["baernstein.easy_lemma", "baernstein.partition_lemma", "baernstein.ball_radius", "baernstein.mstar_failure"] {
        assert!(text.lines().any(|l| l.starts_with(&format!("{id},")) && l.contains(",pass,")), "{id}");
    }
}

#[test]
fn norms_and_witnesses() {
    let out = run(&["norm", "--space", "tsirelson", "--vec", "[[3,1],[4,1],[5,1]]", "--exact", "--witness"]);
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["exact"], "3/2");
    assert_eq!(doc["value"], 1.5);
    assert_eq!(doc["witness"]["node"], "family");

    let out = run(&["norm", "--space", "baernstein", "--vec", "[[2,1],[3,0.1],[4,1]]", "--format", "csv", "--out", "csv"]);
    assert_eq!(stdout(&out), "space,value\nbaernstein,2.00000000000\n");

    let out = run(&["orlicz", "--A", "2", "--B", "3", "norm", "--vec", "[[1,0.5],[4,-2]]"]);
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["discrepancy"].as_f64().unwrap() < 1e-10);
}

#[test]
fn certify_writes_a_valid_certificate() {
    let out = run(&["certify", "--space", "baernstein", "--point", "[[1,0.5]]", "--eps", "1"]);
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["validation"]["valid"], true);
    let cert: szlenk_lab::DerivationCertificate = serde_json::from_value(doc["certificate"].clone()).unwrap();
    assert!(szlenk_lab::szlenk::validate_certificate(&cert).unwrap());
}

#[test]
fn orlicz_subcommands() {
    for action in ["kkt", "claim", "demo"] {
        let out = run(&["orlicz", "--A", "3", "--B", "2", action, "--samples", "300", "--eps", "1"]);
        assert_eq!(code(&out), 0, "{action}");
        let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(doc["passed"], true, "{action}");
    }
}
