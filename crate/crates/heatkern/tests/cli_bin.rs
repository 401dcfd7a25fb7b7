//! End-to-end checks of the `heatkern` binary: exit codes, report files,
//! and rerun determinism through the process boundary.

use std::path::Path;
use std::process::Command;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_heatkern"))
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join("heatkern-cli-bin").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn config_errors_exit_2() {
    let out = binary().args(["--experiment", "warp"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert_eq!(msg.lines().count(), 1, "single-line diagnostic: {msg}");
    assert!(msg.contains("unknown experiment"));

    let out = binary().output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // operator/model mismatch is a config error
    let out = binary()
        .args(["--experiment", "expand", "--model", "sphere:1", "--operator", "schroedinger"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn module_errors_exit_1() {
    // resolution below the minimum surfaces as a module error
    let dir = tmp("module-error");
    let out = binary()
        .args([
            "--experiment",
            "bounds",
            "--resolution",
            "2",
            "--out",
            dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert_eq!(msg.lines().count(), 1, "single-line diagnostic: {msg}");
}

#[test]
fn riesz_experiment_passes_and_writes_reports() {
    let dir = tmp("riesz");
    let out = binary()
        .args(["--experiment", "riesz", "--out", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("pass=true"), "{stdout}");
    assert!(dir.join("riesz.csv").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["experiment"], "riesz");
    assert_eq!(summary["pass"], true);
    for key in ["experiment", "params", "results", "pass"] {
        assert!(summary.get(key).is_some(), "missing key {key}");
    }
    // header of the check CSV
    let csv = std::fs::read_to_string(dir.join("riesz.csv")).unwrap();
    assert!(csv.starts_with("case,param1,param2,lhs,rhs,abs_err,rel_err"));
}

#[test]
fn env_thread_cap_does_not_change_results() {
    let dir1 = tmp("threads-1");
    let dir8 = tmp("threads-8");
    for (threads, dir) in [("1", &dir1), ("8", &dir8)] {
        let out = binary()
            .env("HEATKERN_THREADS", threads)
            .args([
                "--experiment",
                "convolve",
                "--operator",
                "schroedinger",
                "--resolution",
                "96",
                "--partitions",
                "4,8,16",
                "--out",
                dir.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["convergence.csv", "summary.json"] {
        let a = std::fs::read(dir1.join(name)).unwrap();
        let b = std::fs::read(dir8.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs across thread counts");
    }
}

#[test]
fn expand_on_flat_laplacian_reports_degenerate_pass() {
    // every correction coefficient vanishes, so there is no remainder
    // power law to fit; the run reports the degeneracy and passes
    let dir = tmp("expand-flat");
    let out = binary()
        .args(["--experiment", "expand", "--out", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["results"]["degenerate_expansion"], true);
    assert!(summary["results"]["fitted_order"].is_null());
}

#[test]
fn config_file_round_trip() {
    let dir = tmp("config-file");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("exp.cfg");
    std::fs::write(
        &cfg,
        "# comment line\nexperiment=transmute\nresolution=48\nseed=9\n",
    )
    .unwrap();
    let out_dir = dir.join("out");
    let out = binary()
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(Path::new(&out_dir.join("transmute.csv")).exists());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["params"]["seed"], "9");
    assert_eq!(summary["pass"], true);
}
