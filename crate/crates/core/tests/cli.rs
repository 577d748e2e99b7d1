use std::process::{Command, Output};

fn hexlat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hexlat")).args(args).output().expect("run hexlat")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn summary(body: &str, key: &str) -> String {
    let prefix = format!("# {key} = ");
    body.lines().rev().find_map(|l| l.strip_prefix(&prefix)).unwrap_or_else(|| panic!("{key} missing")).to_string()
}

#[test]
fn shells_first_rows() {
    let o = hexlat(&["shells", "--r-max", "1.7"]);
    assert_eq!(o.status.code(), Some(0));
    let body = stdout(&o);
    assert!(body.starts_with("# hexlat shells\n"));
    let rows: Vec<&str> = body.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "radius,k,l,triple_id");
    let first: Vec<&str> = rows[1].split(',').collect();
    assert!((first[0].parse::<f64>().unwrap() - 0.620_403_239_401_399_7).abs() < 1e-15);
    assert_eq!(rows.len() - 1, 3 + 3 + 6);
}

#[test]
fn output_is_deterministic() {
    let args = ["perturb", "--r-max", "3", "--directions", "4", "--seed", "7"];
    let a = hexlat(&args);
    let b = hexlat(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_hexlat")).args(args).env("HEXLAT_THREADS", "1").output().unwrap();
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn config_file_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\nr_max = 2\ndirections = 3\nformat = json\n").unwrap();
    let out = dir.path().join("gaps.jsonl");
    let o = hexlat(&["perturb", "--config", cfg.to_str().unwrap(), "--directions", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let config = &lines[0]["config"];
    assert_eq!(config["r_max"], "2");
    assert_eq!(config["directions"], "5");
    let summary = &lines.last().unwrap()["summary"];
    assert_eq!(summary["squared_all_gaps_positive"], true);
    assert_eq!(summary["linear_all_gaps_positive"], true);
    let records = &lines[1..lines.len() - 1];
    assert!(records.iter().all(|r| r["direction"].as_i64().unwrap() < 5));
}

#[test]
fn verify_hessian_small_box() {
    let o = hexlat(&["verify-hessian", "--kl-bound", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let body = stdout(&o);
    assert_eq!(summary(&body, "squared_equality_set"), "(0,0);(0,1);(1,0)");
    assert_eq!(summary(&body, "pass"), "true");
    let lin: f64 = summary(&body, "linear_min_lambda_min").parse().unwrap();
    assert!((lin - 0.685_146_087_164_968_5).abs() < 1e-4);
}

#[test]
fn variational_default_and_failing_precondition() {
    let o = hexlat(&["variational", "--directions", "4", "--d-grid", "1e-2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(summary(&stdout(&o), "all_negative"), "true");

    let o = hexlat(&["variational", "--kernel", "linear"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("precondition"));

    let o = hexlat(&["variational", "--kernel", "gauss"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn invalid_input_exits_2() {
    for args in [
        &["perturb", "--d-grid", "1e-3,1e-2"][..],
        &["shells", "--r-max", "-1"],
        &["shells", "--format", "xml"],
        &["bogus"],
        &["perturb", "--kernel", "poly:coeffs=1/x"],
    ] {
        let o = hexlat(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}
