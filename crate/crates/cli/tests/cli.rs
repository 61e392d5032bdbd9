use std::path::Path;
use std::process::{Command, Output};

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sim")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const RAMSEY: &str = r#"
experiment = "ramsey"
shots = 400
[bath]
sigma_static = 2.9
[ramsey]
tau = { start = 0.0, stop = 250.0, points = 26 }
fit = "gaussian"
"#;

#[test]
fn run_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "r.toml", RAMSEY);
    let out = dir.path().join("out");
    let o = sim(&["run", &cfg, "--out", out.to_str().unwrap(), "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["envelope.csv", "fit.csv", "summary.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.starts_with("quantity,value\n"));
    assert!(summary.contains("\nt2_star,"));
}

#[test]
fn outputs_are_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "r.toml", RAMSEY);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(sim(&["run", &cfg, "--out", a.to_str().unwrap(), "--threads", "1"]).status.success());
    assert!(sim(&["run", &cfg, "--out", b.to_str().unwrap(), "--threads", "3"]).status.success());
    for f in ["envelope.csv", "fit.csv", "summary.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("unknown.toml", "experiment = \"teleport\"\n"),
        ("typo.toml", "experiment = \"ramsey\"\nshotz = 10\n"),
        ("invalid.toml", "experiment = \"ramsey\"\nshots = 0\n"),
        ("syntax.toml", "experiment = \n"),
    ];
    for (name, text) in cases {
        let cfg = write(dir.path(), name, text);
        let o = sim(&["run", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(sim(&["run", "no-such-preset"]).status.code(), Some(2));
    assert_eq!(sim(&["presets", "show", "no-such-preset"]).status.code(), Some(2));
}

#[test]
fn presets_are_listed() {
    let o = sim(&["presets", "list"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let names: Vec<&str> = text.lines().filter_map(|l| l.split_whitespace().next()).collect();
    assert_eq!(names.len(), 13);
    for n in ["fig1d", "fig3a", "fig3e", "supp_t1", "hh_scan"] {
        assert!(names.contains(&n), "{n}");
    }
    let show = sim(&["presets", "show", "fig1d"]);
    assert!(String::from_utf8(show.stdout).unwrap().contains("experiment = \"rabi\""));
}
