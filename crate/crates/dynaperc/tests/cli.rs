//! End-to-end checks of the `dynaperc` binary: config loading, seed
//! overrides, output artifacts, and exit codes.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dynaperc"))
}

fn tmp_dir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("dynaperc-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn analytic_table_writes_artifacts() {
    let dir = tmp_dir("table");
    let out = bin()
        .args(["analytic-table", "--seed", "42", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("analytic.csv")).unwrap();
    assert!(csv.starts_with("# dynaperc v"));
    assert!(csv.contains("seed=42"));
    assert!(csv.lines().nth(1).unwrap().starts_with("p,mu,"));
    let manifest = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(v["seed"], 42);
    assert_eq!(v["artifact_version"], env!("CARGO_PKG_VERSION"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_file_drives_a_sweep() {
    let dir = tmp_dir("sweep");
    let config_path = dir.join("sweep.json");
    std::fs::write(
        &config_path,
        r#"{
            "kind": "speed-sweep",
            "graph": { "regular_tree": { "degree": 3 } },
            "p_grid": [0.7],
            "mu_grid": [0.5, 1.0, 2.0],
            "horizon": { "fixed": { "value": 150.0 } },
            "n_runs": 8,
            "seed": 7,
            "assertions": { "min_speed": 0.01 }
        }"#,
    )
    .unwrap();
    let out = bin()
        .args(["speed-sweep", "--config"])
        .arg(&config_path)
        .args(["--workers", "2", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("speed.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 3); // comment + header + one row per mu
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn env_var_overrides_seed() {
    let dir = tmp_dir("seedenv");
    let out = bin()
        .args(["analytic-table", "--seed", "1", "--out"])
        .arg(&dir)
        .env("DYNAPERC_SEED", "777")
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.join("analytic.csv")).unwrap();
    assert!(csv.contains("seed=777"), "env override lost: {csv}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn same_seed_same_bytes_across_worker_counts() {
    let reference = {
        let dir = tmp_dir("det1");
        let config = dir.join("c.json");
        std::fs::write(
            &config,
            r#"{"kind":"speed-sweep","p_grid":[0.5],"mu_grid":[1.0,2.0],
                "horizon":{"fixed":{"value":100.0}},"n_runs":8,"seed":99}"#,
        )
        .unwrap();
        let mut bodies = Vec::new();
        for workers in ["1", "4"] {
            let sub = dir.join(format!("w{workers}"));
            let out = bin()
                .args(["speed-sweep", "--config"])
                .arg(&config)
                .args(["--workers", workers, "--out"])
                .arg(&sub)
                .output()
                .unwrap();
            assert!(out.status.success());
            bodies.push(std::fs::read(sub.join("speed.csv")).unwrap());
        }
        std::fs::remove_dir_all(&dir).ok();
        bodies
    };
    assert_eq!(reference[0], reference[1], "worker count changed CSV bytes");
}

#[test]
fn bad_inputs_exit_nonzero() {
    let out = bin().arg("no-such-kind").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown experiment kind"));

    // Config kind must match the subcommand.
    let dir = tmp_dir("mismatch");
    let config = dir.join("c.json");
    std::fs::write(&config, r#"{"kind":"one-arm","seed":1}"#).unwrap();
    let out = bin().args(["speed-sweep", "--config"]).arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn finite_graph_loads_from_adjacency_file() {
    // 4-cycle as a plain-text adjacency list, driven end to end.
    let dir = tmp_dir("file");
    let graph_path = dir.join("cycle.adj");
    std::fs::write(&graph_path, "1 3\n0 2\n1 3\n2 0\n").unwrap();
    let config = dir.join("c.json");
    std::fs::write(
        &config,
        format!(
            r#"{{"kind":"speed-sweep",
                "graph": {{"finite_file": {{"path": {:?}}}}},
                "p_grid":[0.9],"mu_grid":[1.0,2.0,4.0],
                "horizon":{{"fixed":{{"value":50.0}}}},"n_runs":4,"seed":3,
                "assertions": {{}}}}"#,
            graph_path
        ),
    )
    .unwrap();
    let out = bin().args(["speed-sweep", "--config"]).arg(&config).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::remove_dir_all(&dir).ok();
}
