use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"
seed = 5
trials = 4
r = 2.0
n = 50

[kernel]
basis = "fourier"
rule = "polynomial"
s = 1.0

[density]
kind = "head-tail"

[m_rule]
rule = "explicit"
m = 3
"#;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rkhs-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn recover_writes_outputs_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = dir.path().join("out");
    let output = lab(&["recover", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert_eq!(output.status.code(), Some(0), "{stdout}\n{}", String::from_utf8_lossy(&output.stderr));
    assert!(stdout.contains("PASS bound-violation-rate"), "{stdout}");
    assert!(out.join("trials.csv").exists());
    let summary = std::fs::read_to_string(out.join("summary.json")).unwrap();
    assert!(summary.contains("\"kind\": \"recover\""));
    assert!(summary.contains("\"seed\": 5"));
}

#[test]
fn seed_override_changes_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    for (out, seed) in [(&a, "5"), (&b, "5"), (&c, "99")] {
        let output = lab(&["recover", "--config", &cfg, "--seed", seed, "--threads", "1", "--out", out.to_str().unwrap()]);
        assert_eq!(output.status.code(), Some(0));
    }
    let read = |p: &Path| std::fs::read(p.join("trials.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert!(std::fs::read_to_string(c.join("summary.json")).unwrap().contains("\"seed\": 99"));
}

#[test]
fn kind_mismatch_and_bad_config_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("kind = \"sweep\"\n{CONFIG}"));
    let output = lab(&["recover", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("sweep"));

    let cfg = write_config(dir.path(), &CONFIG.replace("r = 2.0", "r = 0.5"));
    let output = lab(&["recover", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("r"));

    let output = lab(&["recover", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn concentration_writes_tail_curve() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
seed = 1
trials = 50
r = 2.0
n = 500

[kernel]
basis = "fourier"
rule = "polynomial"
s = 1.0

[concentration]
family = "sphere"
dim = 4
radius = 1.0
"#;
    let cfg = write_config(dir.path(), text);
    let out = dir.path().join("out");
    let output = lab(&["concentration", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stdout));
    assert!(out.join("tail_curve.csv").exists());
}
