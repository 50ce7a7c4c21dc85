use std::path::PathBuf;
use std::process::{Command, Output};

fn selfsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selfsim")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Writes `contents` to a per-test file in the temp directory.
fn scratch(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("selfsim-cli-{}-{name}.json", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

fn membrane_document() -> PathBuf {
    let out = selfsim(&["run", "membrane", "--format", "json-doc"]);
    assert!(out.status.success());
    scratch("membrane", &stdout(&out))
}

#[test]
fn table1_prints_both_columns_and_the_final_row() {
    let out = selfsim(&["table1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let last = text.lines().find(|l| l.trim_start().starts_with("final")).unwrap();
    assert!(last.contains("0.0778") && last.contains("0.0771"), "{last}");
    assert!(text.contains("0.0829f"));
}

#[test]
fn table1_csv_has_the_documented_columns() {
    let out = selfsim(&["table1", "--format", "csv"]);
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("k,method,value,error_percent,status"));
    assert!(text.lines().any(|l| l.starts_with("3,power_restriction,0.1497,")));
}

#[test]
fn unknown_scenario_is_a_usage_error() {
    let out = selfsim(&["run", "no-such-scenario"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("built-ins are"));
}

#[test]
fn all_unavailable_exits_with_two() {
    let out = selfsim(&["run", "oscillator", "--pipelines", "power-restriction", "--orders", "1..3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn schema_errors_name_the_field_and_exit_with_three() {
    let path = scratch("schema", r#"{"prefactor": {"amplitude": 1, "exponent": "-2"}, "power_step": 1}"#);
    let out = selfsim(&["extrapolate", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("coefficients"), "{}", stderr(&out));
}

#[test]
fn unnormalized_series_emits_a_notice() {
    let doc = r#"{"prefactor": {"amplitude": 1, "exponent": "-2"}, "power_step": 1, "coefficients": [2, 1, -1, 1]}"#;
    let path = scratch("notice", doc);
    let out = selfsim(&["extrapolate", "--input", path.to_str().unwrap()]);
    assert!(stderr(&out).contains("notice:"), "{}", stderr(&out));
}

#[test]
fn extrapolate_and_omega_on_a_document() {
    let path = membrane_document();
    let out = selfsim(&["omega", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("selected,1.926983,order 4"), "{}", stdout(&out));

    let out = selfsim(&["extrapolate", "--input", path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("final,transformation,0.0823")), "{text}");
}

#[test]
fn bad_arguments_exit_with_one() {
    let out = selfsim(&["run", "string", "--orders", "9..3"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(selfsim(&["--help"]).status.code(), Some(0));
}
