use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dymart(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dymart"))
        .args(args)
        .env_remove("DYMART_DEPTH_CAP")
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    dymart(args).status.code().expect("exited normally")
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn assert_golden(args: &[&str], name: &str) {
    let out = dymart(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let expected = std::fs::read(golden(name)).unwrap();
    assert!(out.stdout == expected, "{args:?} differs from {name}:\n{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn golden_outputs() {
    assert_golden(&["walsh-table", "--depth", "2"], "walsh_table_depth2.csv");
    assert_golden(&["bm-stats", "--depths", "2,4"], "bm_stats_2_4.csv");
    assert_golden(&["mrt", "--depth", "4", "--trials", "3", "--seed", "7"], "mrt_depth4_seed7.csv");
    assert_golden(&["generate", "walk", "--depth", "3"], "walk_depth3.csv");
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        &["mrt", "--depth", "8", "--trials", "5", "--seed", "42"][..],
        &["verify-all", "--depth", "6", "--trials", "3"][..],
        &["sde", "ou", "--depths", "4,6"][..],
        &["generate", "martingale", "--depth", "5", "--seed", "3", "--format", "json"][..],
    ] {
        let (a, b) = (dymart(args), dymart(args));
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn seed_changes_random_output() {
    let a = dymart(&["mrt", "--depth", "6", "--trials", "2", "--seed", "1"]).stdout;
    let b = dymart(&["mrt", "--depth", "6", "--trials", "2", "--seed", "2"]).stdout;
    assert_ne!(a, b);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["verify-all", "--depth", "6", "--trials", "5"]), 0);
    assert_eq!(code(&["verify-all", "--depth", "1", "--trials", "2"]), 0);
    assert_eq!(code(&["verify-all", "--depth", "6", "--trials", "5", "--tol", "all=0"]), 1);
    assert_eq!(code(&["walsh-table", "--depth", "11"]), 2);
    assert_eq!(code(&["sde", "heston"]), 2);
    assert_eq!(code(&["sde", "gbm", "--param", "kappa=1"]), 2);
    assert_eq!(code(&["mrt", "--depth", "41"]), 2);
    assert_eq!(code(&["bm-stats", "--depths", "0"]), 2);
    assert_eq!(code(&["no-such-command"]), 2);
    assert_eq!(code(&["mrt", "--depth", "4", "--tol", "oops"]), 2);
}

#[test]
fn zero_trials_is_an_empty_passing_report() {
    let out = dymart(&["mrt", "--depth", "6", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2, "{text}");
}

#[test]
fn walsh_table_exit_message_names_the_limit() {
    let out = dymart(&["walsh-table", "--depth", "11"]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("limit 10"), "{err}");
}

#[test]
fn mrt_on_process_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("y.csv");
    let bin = dir.path().join("y.bin");
    let csv_s = csv.to_str().unwrap();
    let bin_s = bin.to_str().unwrap();
    assert_eq!(code(&["generate", "martingale", "--depth", "6", "--out", csv_s]), 0);
    assert_eq!(code(&["generate", "walk", "--depth", "6", "--out", bin_s]), 0);
    assert_eq!(code(&["mrt", "--input", csv_s]), 0);
    assert_eq!(code(&["mrt", "--input", bin_s]), 0);

    // break adaptedness of the first slice
    let text = std::fs::read_to_string(&csv).unwrap();
    let corrupted: Vec<String> = text
        .lines()
        .map(|l| if l.starts_with("0,1,") { "0,1,5.0e0".to_string() } else { l.to_string() })
        .collect();
    std::fs::write(&csv, corrupted.join("\n") + "\n").unwrap();
    assert_eq!(code(&["mrt", "--input", csv_s]), 1);

    // break the martingale property while keeping adaptedness
    let walk = dir.path().join("w.csv");
    let walk_s = walk.to_str().unwrap();
    assert_eq!(code(&["generate", "walk", "--depth", "3", "--out", walk_s]), 0);
    let text = std::fs::read_to_string(&walk).unwrap();
    let shifted: Vec<String> = text
        .lines()
        .map(|l| match l.strip_prefix("3,") {
            Some(rest) => {
                let (atom, value) = rest.split_once(',').unwrap();
                format!("3,{atom},{:e}", value.parse::<f64>().unwrap() + 1.0)
            }
            None => l.to_string(),
        })
        .collect();
    std::fs::write(&walk, shifted.join("\n") + "\n").unwrap();
    assert_eq!(code(&["mrt", "--input", walk_s]), 1);

    std::fs::write(&csv, "not,a,process\n").unwrap();
    assert_eq!(code(&["mrt", "--input", csv_s]), 2);
    assert_eq!(code(&["mrt", "--input", dir.path().join("missing.csv").to_str().unwrap()]), 2);
}

#[test]
fn transform_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.csv");
    let s = dir.path().join("s.csv");
    let g = dir.path().join("g.csv");
    std::fs::write(&f, "index,value\n0,1\n1,2\n2,3\n3,4\n").unwrap();
    let (f, s, g) = (f.to_str().unwrap(), s.to_str().unwrap(), g.to_str().unwrap());
    assert_eq!(code(&["transform", "--input", f, "--out", s]), 0);
    assert_eq!(code(&["transform", "--input", s, "--inverse", "--out", g]), 0);
    let values: Vec<f64> = std::fs::read_to_string(g)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("index"))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values, vec![1.0, 2.0, 3.0, 4.0]);
}

#[test]
fn sde_defaults_and_zero_coefficients() {
    let out = dymart(&["sde", "ou"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 6, "{text}");

    let out = dymart(&[
        "sde", "poly", "--drift-coeffs", "0", "--diffusion-coeffs", "0", "--param", "x0=1.5",
        "--depths", "3,5", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let records = doc["records"].as_array().unwrap();
    assert_eq!(records.len(), 2);
    for r in records {
        assert_eq!(r["estimate"], 1.5);
    }
}

#[test]
fn json_output_shape() {
    let out = dymart(&["bm-stats", "--depths", "3", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["command"], "bm-stats");
    assert_eq!(doc["records"].as_array().unwrap().len(), 4);
    assert_eq!(doc["records"][1]["k"], 2);
}
