use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn acidfront(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acidfront"))
        .args(args)
        .current_dir(dir)
        .env_remove("ACIDFRONT_WORKERS")
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path
}

/// The single subdirectory created under `out`.
fn only_run(out: &Path) -> PathBuf {
    let dirs: Vec<_> = fs::read_dir(out).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs.into_iter().next().unwrap()
}

const SHORT: &str = "coarse_n = 8\nt_final = 0.2\nmax_nodes = 2000\n";

#[test]
fn simulate_writes_every_level() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), SHORT);
    let out = acidfront(&["simulate", "--config", cfg.to_str().unwrap(), "--out", "o"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = only_run(&tmp.path().join("o"));
    for name in ["config.txt", "manifest.txt", "mesh.txt", "schedule.txt", "summary.csv"] {
        assert!(run.join(name).is_file(), "{name}");
    }
    for k in 0..3 {
        for f in ["u1", "u2", "u3"] {
            assert!(run.join(format!("{f}_{k:05}.txt")).is_file());
        }
    }
    assert!(!run.join("u1_00003.txt").exists());
    assert_eq!(fs::read_to_string(run.join("summary.csv")).unwrap().lines().count(), 4);
}

#[test]
fn same_config_same_files() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let runs: Vec<PathBuf> = dirs
        .iter()
        .map(|d| {
            let cfg = config(d.path(), SHORT);
            let args = ["simulate", "--config", cfg.to_str().unwrap(), "--out", "o", "--seed", "3"];
            assert!(acidfront(&args, d.path()).status.success());
            only_run(&d.path().join("o"))
        })
        .collect();
    let mut names: Vec<_> = fs::read_dir(&runs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 10);
    for name in names {
        assert_eq!(fs::read(runs[0].join(&name)).unwrap(), fs::read(runs[1].join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn missing_data_fails_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), SHORT);
    let out = acidfront(
        &["estimate", "--config", cfg.to_str().unwrap(), "--out", "o", "--data", "nowhere"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    assert!(!tmp.path().join("o").exists() || fs::read_dir(tmp.path().join("o")).unwrap().next().is_none());
}

#[test]
fn bad_configs_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    for text in ["delta1_init = 30\n", "bogus = 1\n", "tau = 0.1\nbounds = 3\n"] {
        let cfg = config(tmp.path(), text);
        let out = acidfront(&["simulate", "--config", cfg.to_str().unwrap(), "--out", "o"], tmp.path());
        assert_eq!(out.status.code(), Some(1), "{text}");
    }
    assert!(!tmp.path().join("o").exists());
    assert_eq!(acidfront(&["frobnicate"], tmp.path()).status.code(), Some(1));
}

#[test]
fn empty_experiment_writes_header() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), &format!("{SHORT}true_delta1 =\n"));
    let out = acidfront(&["experiment", "--config", cfg.to_str().unwrap(), "--out", "o"], tmp.path());
    assert!(out.status.success());
    let table = fs::read_to_string(only_run(&tmp.path().join("o")).join("table.csv")).unwrap();
    assert_eq!(table, "true_delta1,sigma,n_runs,mean,std,rel_error,failures\n");
}

#[test]
fn simulate_then_estimate_recovers_delta1() {
    let tmp = tempfile::tempdir().unwrap();
    let desk = "coarse_n = 8\nt_final = 2\nmax_nodes = 2000\n";
    let cfg = config(tmp.path(), &format!("{desk}delta1 = 4\n"));
    assert!(acidfront(&["simulate", "--config", cfg.to_str().unwrap(), "--out", "sim"], tmp.path())
        .status
        .success());
    let data = only_run(&tmp.path().join("sim"));
    let cfg = config(tmp.path(), &format!("{desk}delta1_init = 10\n"));
    let out = acidfront(
        &["estimate", "--config", cfg.to_str().unwrap(), "--out", "est", "--data", data.to_str().unwrap()],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let result = fs::read_to_string(only_run(&tmp.path().join("est")).join("result.csv")).unwrap();
    let row = result.lines().nth(1).unwrap();
    let delta1: f64 = row.split(',').next().unwrap().parse().unwrap();
    assert!((delta1 - 4.0).abs() <= 0.04, "{delta1}");
}
