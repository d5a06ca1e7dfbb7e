use std::path::PathBuf;
use std::process::{Command, Output};

fn wiggle(out: &str, args: &[&str]) -> Output {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(out);
    Command::new(env!("CARGO_BIN_EXE_wiggle")).arg("--out").arg(&dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn invalid_spec_exits_with_3() {
    let o = wiggle("invalid", &["tract", "validate", "--spec", "20:22"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).starts_with("violation at wiggle 0"));
    let o = wiggle("valid", &["tract", "validate", "--spec", "20:30"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "ok: N = 1");
}

#[test]
fn eval_fixes_five() {
    let o = wiggle("eval", &["map", "eval", "--at", "5,0"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["lambda"].as_f64().unwrap() - 5f64.ln()).abs() < 1e-9);
    assert!(v["theta"].as_f64().unwrap().abs() < 1e-9);
    let o = wiggle("eval-outside", &["map", "eval", "--at", "3,0"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn straight_strip_is_never_crooked() {
    let o = wiggle("crooked", &["crooked", "check", "--q", "9,10,11,12", "--n", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "0 of 1 crooked");
}

#[test]
fn family_dump_has_log_ends() {
    let o = wiggle("family", &["un", "enumerate", "--spec", "20:30", "--q", "21,23,25,27", "--n", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("family/family.json");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let ivs = v["intervals"].as_array().unwrap();
    assert_eq!(ivs.len(), 3);
    assert!(ivs.windows(2).all(|w| w[0]["log_d"].as_f64() <= w[1]["log_a"].as_f64()));
}
