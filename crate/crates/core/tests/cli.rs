//! The `spinodal` binary: exit codes, file layout, precedence and reruns.

use std::path::Path;
use std::process::Command;

fn spinodal(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_spinodal")).args(args).env_remove("SPINODAL_OUT").output().unwrap()
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(spinodal(&["verify-a", "--eps", "2.0"]).status.code(), Some(2));
    assert_eq!(spinodal(&[]).status.code(), Some(2));
    assert_eq!(spinodal(&["--help"]).status.code(), Some(0));
}

#[test]
fn help_documents_defaults() {
    let out = String::from_utf8(spinodal(&["--help"]).stdout).unwrap();
    for needle in ["--eps", "1e-6", "--seed", "--threads", "SPINODAL_OUT", "verify-coupling"] {
        assert!(out.contains(needle), "{needle}");
    }
}

#[test]
fn config_file_errors_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "eps = 1e-6\nepsilon = 2\n").unwrap();
    let out = spinodal(&["verify-det", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon"));
    std::fs::write(&bad, "seed = 3\neps = \"tiny\"\n").unwrap();
    let out = spinodal(&["verify-det", "--config", bad.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn rerun_is_byte_identical_and_flags_beat_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "subcommand = \"verify-comparison\"\neps = 0.1\nn_replicas = 3\nlabel = \"x\"\n").unwrap();
    let out_dir = dir.path().join("out");
    let o = out_dir.to_str().unwrap();
    for label in ["a", "b"] {
        let st = spinodal(&["--config", cfg.to_str().unwrap(), "--eps", "1e-2", "--out", o, "--label", label, "--threads", "1"]);
        assert_eq!(st.status.code(), Some(0), "{}", String::from_utf8_lossy(&st.stderr));
    }
    let a = out_dir.join("comparison/a");
    let b = out_dir.join("comparison/b");
    assert_eq!(read(&a.join("summary.csv")), read(&b.join("summary.csv")));
    assert_eq!(read(&a.join("data/replicas.csv")), read(&b.join("data/replicas.csv")));
    let manifest = String::from_utf8(read(&a.join("manifest.toml"))).unwrap();
    assert!(manifest.contains("eps = \"1.0000000000000000e-2\""), "{manifest}");
    assert!(manifest.contains("n_replicas = 3"));
}

#[test]
fn output_directory_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let st = Command::new(env!("CARGO_BIN_EXE_spinodal"))
        .args(["kernels", "--eps", "1e-2", "--label", "k"])
        .env("SPINODAL_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(0));
    let run = dir.path().join("kernels/k");
    for f in ["summary.csv", "manifest.toml", "plot.svg", "data/kernels.csv", "data/survival_mass.csv"] {
        assert!(run.join(f).is_file(), "{f}");
    }
}

#[test]
fn failing_check_exits_one() {
    // A threshold file that no run can meet.
    let dir = tempfile::tempdir().unwrap();
    let text = spinodal::verify::DEFAULT_THRESHOLDS.replace("det_reflect_tol = 1e-8", "det_reflect_tol = -1.0");
    assert_ne!(text, spinodal::verify::DEFAULT_THRESHOLDS);
    let th = dir.path().join("th.toml");
    std::fs::write(&th, text).unwrap();
    let out = dir.path().join("out");
    let st = spinodal(&["verify-det", "--eps", "1e-3", "--thresholds", th.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(st.status.code(), Some(1), "{}", String::from_utf8_lossy(&st.stderr));
}
