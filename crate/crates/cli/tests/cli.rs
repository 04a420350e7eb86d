use std::process::{Command, Output};

fn qcalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcalc")).args(args).output().expect("qcalc runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn derive_values() {
    let out = qcalc(&["--kind", "h", "--h", "1", "derive", "--fn", "x^2", "--at", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "3");

    let out = qcalc(&["--kind", "q", "--q", "2", "derive", "--fn", "x^3", "--at", "1", "--order", "3"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "21");

    let out = qcalc(&["--kind", "h", "--h", "1", "derive", "--fn", "x^2", "--at", "1", "--order", "0"]);
    assert_eq!(stdout(&out).trim(), "1");
}

#[test]
fn excluded_point_is_a_domain_error() {
    let out = qcalc(&["--kind", "q", "--q", "2", "derive", "--fn", "x", "--at", "0"]);
    assert_eq!(code(&out), 3);
    assert!(out.stdout.is_empty());
}

#[test]
fn taylor_expansion_and_degree_refusal() {
    let out = qcalc(&["--kind", "h", "--h", "1", "taylor", "--fn", "x^2", "--base", "0", "--n", "2"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    let lambdas: Vec<&str> = text.lines().skip(1).take(3).map(|l| l.split('\t').nth(2).unwrap()).collect();
    assert_eq!(lambdas, ["0", "1", "2"]);

    let out = qcalc(&["--kind", "h", "--h", "1", "taylor", "--fn", "x^3", "--n", "2"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn verify_suites_pass() {
    let out = qcalc(&["--kind", "q", "--q", "3/2", "verify", "--suite", "descent", "--max-order", "4"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("\tpass\t"));

    let out = qcalc(&["verify", "--suite", "algebra", "--instance", "forward", "--n", "6", "--m", "3"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));

    let out = qcalc(&["verify", "--suite", "leibniz", "--cases", "10"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&qcalc(&["verify", "--suite", "bogus"])), 2);
    assert_eq!(code(&qcalc(&["--kind", "h", "derive", "--fn", "x", "--at", "1"])), 2);
    assert_eq!(code(&qcalc(&["--kind", "h", "--h", "1", "derive", "--fn", "x^", "--at", "1"])), 2);
}

#[test]
fn non_tension_config_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("frame.json");
    std::fs::write(
        &path,
        r#"{"kind": "custom", "theta": "product",
            "sigma": {"scale": "1", "offset": "0"}, "tau": {"scale": "1", "offset": "1"}}"#,
    )
    .unwrap();
    let out = qcalc(&["--config", path.to_str().unwrap(), "verify", "--suite", "tension"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn config_file_supplies_frame() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, r#"{"frame": {"kind": "q", "q": "2"}, "function": "x^3", "points": ["1"]}"#).unwrap();
    let out = qcalc(&["--config", path.to_str().unwrap(), "derive"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).trim(), "7");
}

#[test]
fn json_output_is_deterministic_and_can_be_written_to_file() {
    let args = [
        "--kind", "h", "--h", "1/2", "--format", "json", "verify", "--suite", "leibniz", "--cases", "5", "--seed", "7",
    ];
    let a = qcalc(&args);
    let b = qcalc(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let value: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(value["passed"], true);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let c = qcalc(&with_out);
    assert_eq!(code(&c), 0);
    assert!(c.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), a.stdout);
}
