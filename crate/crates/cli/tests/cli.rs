use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn chemowave(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chemowave"))
        .current_dir(dir)
        .env_remove("CHEMOWAVE_OUT")
        .args(args)
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn constants_for_fisher() {
    let tmp = tempfile::tempdir().unwrap();
    let o = chemowave(tmp.path(), &["constants", "--out-dir", "out"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&tmp.path().join("out/constants/constants.json"));
    assert_eq!(v["c_star"], 2.0);
    assert_eq!(v["c_star_star"], 2.0);
    let m = json(&tmp.path().join("out/constants/manifest.json"));
    assert_eq!(m["subcommand"], "constants");
    assert!(m["artifacts"].as_array().unwrap().iter().any(|a| a.as_str().unwrap().ends_with("constants.json")));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = chemowave(tmp.path(), &["wave", "--chi", "-1", "--c", "1.5", "--out-dir", "out"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("c below c_star"), "{}", stderr(&o));

    let o = chemowave(tmp.path(), &["constants", "--chi", "abc"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("chi"));

    assert_eq!(chemowave(tmp.path(), &["frobnicate"]).status.code(), Some(64));
    assert_eq!(chemowave(tmp.path(), &["--config", "missing.cfg", "constants"]).status.code(), Some(64));

    let o = chemowave(tmp.path(), &["stability", "--chi", "0", "--c", "3", "--eta", "0.3", "--out-dir", "out"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("eta"));
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("run.cfg"), "chi=-1\nout_dir=from_file\n").unwrap();
    let o = chemowave(tmp.path(), &["--config", "run.cfg", "constants", "--chi", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&tmp.path().join("from_file/constants/constants.json"));
    assert_eq!(v["chi"], 0.0);
    let o = chemowave(tmp.path(), &["--config", "run.cfg", "constants"]);
    assert!(o.status.success());
    assert_eq!(json(&tmp.path().join("from_file/constants/constants.json"))["chi"], -1.0);
}

#[test]
fn empty_config_gives_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("empty.cfg"), "").unwrap();
    let o = chemowave(tmp.path(), &["--config", "empty.cfg", "constants"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&tmp.path().join("out/constants/constants.json"));
    assert_eq!((v["chi"].as_f64(), v["m"].as_f64()), (Some(0.0), Some(1.0)));
}

#[test]
fn bad_config_value_names_key() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.cfg"), "chi=abc\n").unwrap();
    let o = chemowave(tmp.path(), &["--config", "bad.cfg", "constants"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("chi"), "{}", stderr(&o));
}

#[test]
fn env_overrides_out_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_chemowave"))
        .current_dir(tmp.path())
        .env("CHEMOWAVE_OUT", "env_out")
        .args(["constants", "--out-dir", "flag_out"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(tmp.path().join("env_out/constants/constants.json").exists());
    assert!(!tmp.path().join("flag_out").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for d in ["a", "b"] {
        let o = chemowave(tmp.path(), &["wave", "--chi", "-1", "--c", "4", "--out-dir", d]);
        assert!(o.status.success(), "{}", stderr(&o));
        let o = chemowave(tmp.path(), &["simulate", "--chi", "-0.5", "--t-end", "2", "--out-dir", d]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["wave/wave_profile.csv", "simulate/simulate_final.csv", "simulate/simulate_monitor.csv"] {
        let a = std::fs::read(tmp.path().join("a").join(f)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(f)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{f}");
    }
    let m = json(&tmp.path().join("a/wave/manifest.json"));
    assert_eq!(m["config"]["chi"], -1.0);
    assert!(m["tolerances"].is_object());
}

#[test]
fn certify_reports_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let o = chemowave(tmp.path(), &["certify", "--chi", "-1", "--c", "3", "--out-dir", "out"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS"));
    assert_eq!(json(&tmp.path().join("out/certify/certify.json"))["pass"], true);
}
