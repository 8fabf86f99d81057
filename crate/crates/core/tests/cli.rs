use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fde-toeplitz"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn pcg_table_layout() {
    let text = stdout(&["pcg", "--sizes", "32,64", "--precs", "TN,TF"]);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "Size,TN,TF");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("32,"));
}

#[test]
fn random_rhs_is_deterministic_per_seed() {
    let args = ["pcg", "--sizes", "64", "--precs", "I", "--rhs", "random-solution", "--seed", "3"];
    assert_eq!(stdout(&args), stdout(&args));
}

#[test]
fn json_output_parses() {
    let text = stdout(&["outliers", "--sizes", "32", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rows = v.as_array().unwrap();
    // two preconditioners, two eps values
    assert_eq!(rows.len(), 4);
    assert!(rows[0]["report"]["n_out_left"].is_u64());
}

#[test]
fn writes_to_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mgm.csv");
    stdout(&["mgm", "--sizes", "31", "--case", "delta", "--out", path.to_str().unwrap()]);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some("Size,Case,TGM,Vcycle"));
    assert!(text.lines().nth(1).unwrap().starts_with("31,delta,"));
}

#[test]
fn invalid_input_exits_nonzero() {
    for args in [
        &["mgm", "--sizes", "32"][..],
        &["pcg", "--precs", "XY"],
        &["outliers", "--eps", "-1"],
        &["pcg", "--rhs", "zeros"],
    ] {
        let out = run(args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(!out.stderr.is_empty());
    }
}
