use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn dynmask(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynmask")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn zeros_subcommand() {
    let o = dynmask(&["zeros", scenario("example.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("1.1") && text.contains("1.3"), "{text}");
}

#[test]
fn identify_subcommand() {
    let o = dynmask(&["identify", scenario("example.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("1.300000"));
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = dynmask(&[
        "run",
        scenario("example.toml").to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
        "--seed",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["report.toml", "detector.csv", "attack_trace.csv", "config.resolved.toml"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let resolved = std::fs::read_to_string(dir.path().join("config.resolved.toml")).unwrap();
    assert!(resolved.contains("seed = 3"));
}

#[test]
fn sweep_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let o = dynmask(&[
        "sweep",
        scenario("unmasked.toml").to_str().unwrap(),
        "--param",
        "threshold",
        "--values",
        "0.1,1.0",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("sweep_threshold.csv").exists());
}

#[test]
fn bad_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[scenario]\nseed = 1\nmystery = 2\n[lti]\nplant_num = [1.0]\n").unwrap();
    let o = dynmask(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("scenario.mystery") && err.contains("lti.plant_den"), "{err}");
}

#[test]
fn missing_file_and_bad_seed_exit_with_two() {
    assert_eq!(dynmask(&["run", "/nonexistent/scenario.toml"]).status.code(), Some(2));
    let o = dynmask(&["zeros", scenario("example.toml").to_str().unwrap(), "--seed", "18446744073709551615"]);
    assert_eq!(o.status.code(), Some(2));
}
