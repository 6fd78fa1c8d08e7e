use std::path::Path;
use std::process::{Command, Output};

fn jcgp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jcgp")).args(args).current_dir(dir).env_remove("JCGP_WORKERS").output().unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn berry_table_from_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = jcgp(dir.path(), &["berry", "-s", "sweep_axis=delta_over_lambda", "-s", "sweep_values=0, 2", "-o", "b"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "b.csv");
    let text = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert!(text.starts_with("# jcgp "));
    let rows = csv_rows(&dir.path().join("b.csv"));
    assert_eq!(rows.len(), 2);
    // At resonance the upper dressed state picks up exactly π.
    assert!(rows[0].contains(&"3.14159265359e0".to_string()), "{:?}", rows[0]);
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "mode = unitary\ndelta_over_lambda = 1\nt_final_in_tau = 1\noutput = first\n",
    )
    .unwrap();
    let out = jcgp(dir.path(), &["run", "-c", "run.cfg", "--set", "delta_over_lambda=0", "-o", "second"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("first.csv").exists());
    let text = std::fs::read_to_string(dir.path().join("second.csv")).unwrap();
    assert!(text.lines().any(|l| l == "# delta_over_lambda = 0.0"), "{text}");
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "mode = unitary\nno_such_key = 1\n").unwrap();
    let out = jcgp(dir.path(), &["run", "-c", "bad.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    // No mode at all.
    assert_eq!(jcgp(dir.path(), &["run"]).status.code(), Some(2));
    // Malformed override.
    assert_eq!(jcgp(dir.path(), &["unitary", "-s", "delta_over_lambda"]).status.code(), Some(2));
    // Unknown subcommand.
    assert_eq!(jcgp(dir.path(), &["frobnicate"]).status.code(), Some(2));
    // Missing config file.
    assert_eq!(jcgp(dir.path(), &["run", "-c", "missing.cfg"]).status.code(), Some(2));
}

#[test]
fn write_failure_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("blocker"), "").unwrap();
    let out = jcgp(dir.path(), &["unitary", "-s", "delta_over_lambda=1", "-o", "blocker/out"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let args = |w: &'static str, o: &'static str| {
        vec![
            "correction-map",
            "-s",
            "sweep_axis=delta_over_lambda",
            "-s",
            "sweep_values=0, 0.5, 1, 2",
            "-s",
            "gamma_over_lambda=0.1",
            "-s",
            "observe_at=1, 2",
            "-w",
            w,
            "-o",
            o,
        ]
    };
    assert_eq!(jcgp(dir.path(), &args("1", "m")).status.code(), Some(0));
    let one = std::fs::read(dir.path().join("m.csv")).unwrap();
    assert_eq!(jcgp(dir.path(), &args("3", "m")).status.code(), Some(0));
    let three = std::fs::read(dir.path().join("m.csv")).unwrap();
    assert_eq!(one, three);
    assert_eq!(csv_rows(&dir.path().join("m.csv")).len(), 8);
}
