use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ncspectral(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncspectral"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("NCSPECTRAL_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn csv_rows(dir: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(dir.join("results.csv")).unwrap();
    r.records().map(|x| x.unwrap()).collect()
}

#[test]
fn residue_row_for_quartic_in_four_dimensions() {
    let dir = TempDir::new().unwrap();
    let o = ncspectral(
        &[
            "zeta",
            "residue",
            "--n",
            "4",
            "--P",
            "k1^2*k2^2",
            "--shift",
            "8",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(dir.path());
    assert_eq!(rows.len(), 1);
    let hdr = csv::Reader::from_path(dir.path().join("results.csv"))
        .unwrap()
        .headers()
        .unwrap()
        .clone();
    let col = |name: &str| hdr.iter().position(|h| h == name).unwrap();
    assert_eq!(&rows[0][col("pole_present")], "true");
    let residue: f64 = rows[0][col("residue")].parse().unwrap();
    let pi2_12 = std::f64::consts::PI.powi(2) / 12.0;
    assert!((residue - pi2_12).abs() < 1e-13, "{residue}");
    // Stdout carries the same CSV.
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        fs::read_to_string(dir.path().join("results.csv")).unwrap()
    );
}

#[test]
fn residue_away_from_the_pole_is_zero() {
    let dir = TempDir::new().unwrap();
    let o = ncspectral(
        &[
            "zeta",
            "residue",
            "--n",
            "4",
            "--P",
            "k1^2*k2^2",
            "--shift",
            "6",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let s = summary(dir.path());
    assert_eq!(s["status"], "ok");
    let text = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert!(text.lines().nth(1).unwrap().contains(",false,"), "{text}");
}

#[test]
fn summary_records_resolved_config_and_version() {
    let dir = TempDir::new().unwrap();
    let o = ncspectral(
        &[
            "dio", "classify", "--n", "2", "--theta", "golden", "--qmax", "200",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(dir.path());
    assert_eq!(s["command"], "dio classify");
    assert_eq!(s["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(s["config"]["n"], 2);
    assert_eq!(s["config"]["qmax"], 200);
    assert_eq!(s["config"]["delta"], 1.0);
    assert!(s["config"]["c"].is_number());
}

#[test]
fn config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"n": 2, "theta": "golden", "qmax": 50, "delta": 1.0}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = ncspectral(
        &[
            "--config",
            cfg.to_str().unwrap(),
            "dio",
            "classify",
            "--qmax",
            "80",
        ],
        &out,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["config"]["qmax"], 80);
    assert_eq!(s["config"]["theta"], "golden");
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&ncspectral(&["bogus"], dir.path())), 64);
    assert_eq!(code(&ncspectral(&["zeta", "bogus"], dir.path())), 64);
}

#[test]
fn malformed_inputs_are_config_errors() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.json");
    fs::write(&empty, "").unwrap();
    assert_eq!(
        code(&ncspectral(
            &["--config", empty.to_str().unwrap(), "zeta", "eval"],
            dir.path()
        )),
        65
    );
    let unknown = dir.path().join("unknown.json");
    fs::write(&unknown, r#"{"dimension": 3}"#).unwrap();
    assert_eq!(
        code(&ncspectral(
            &["--config", unknown.to_str().unwrap(), "zeta", "eval"],
            dir.path()
        )),
        65
    );
    assert_eq!(
        code(&ncspectral(
            &["zeta", "eval", "--n", "2", "--P", "k1^"],
            dir.path()
        )),
        65
    );
    assert_eq!(
        code(&ncspectral(
            &["dio", "classify", "--theta", "silver"],
            dir.path()
        )),
        65
    );
}

#[test]
fn precondition_failures_exit_two() {
    let dir = TempDir::new().unwrap();
    // Λ range narrower than a factor four.
    let o = ncspectral(
        &[
            "action",
            "fit",
            "--n",
            "2",
            "--lambda-min",
            "10",
            "--lambda-max",
            "20",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    // Twist with the wrong number of components.
    let o = ncspectral(
        &["zeta", "eval", "--n", "2", "--P", "k1^2", "--a", "0.1"],
        dir.path(),
    );
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn tolerance_failure_exits_three() {
    let dir = TempDir::new().unwrap();
    let o = ncspectral(
        &["action", "fit", "--n", "2", "--tolerance", "1e-30"],
        dir.path(),
    );
    assert_eq!(code(&o), 3);
    assert_eq!(summary(dir.path())["status"], "tolerance-failure");
    // The same run passes at a sane tolerance.
    let o = ncspectral(
        &["action", "fit", "--n", "2", "--tolerance", "1e-8"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
}

#[test]
fn partial_grid_flags_fill_from_defaults() {
    let dir = TempDir::new().unwrap();
    let o = ncspectral(
        &["action", "fit", "--n", "2", "--lambda-min", "5"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let grid = &summary(dir.path())["config"]["lambda"];
    assert_eq!(grid["min"], 5.0);
    assert_eq!(grid["max"], 24.0);
    assert_eq!(grid["points"], 8);
}

#[test]
fn operator_identities_pass() {
    let dir = TempDir::new().unwrap();
    let o = ncspectral(&["op", "check", "--all", "--n", "2"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(dir.path());
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| &r[4] == "true"));
}

#[test]
fn output_is_identical_across_runs_and_thread_counts() {
    let args = [
        "action",
        "heat",
        "--n",
        "2",
        "--mode",
        "0:1,0:0.3",
        "--method",
        "stochastic",
        "--t-min",
        "0.5",
        "--t-max",
        "1",
        "--t-points",
        "3",
        "--seed",
        "7",
    ];
    let runs: Vec<String> = ["1", "1", "4"]
        .iter()
        .map(|threads| {
            let dir = TempDir::new().unwrap();
            let o = Command::new(env!("CARGO_BIN_EXE_ncspectral"))
                .args(args)
                .arg("--out")
                .arg(dir.path())
                .env("NCSPECTRAL_THREADS", threads)
                .output()
                .unwrap();
            assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
            assert_eq!(
                summary(dir.path())["config"]["threads"],
                threads.parse::<u64>().unwrap()
            );
            let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
            assert!(
                csv.lines().skip(1).all(|l| l.contains(",stochastic,")),
                "{csv}"
            );
            csv
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn every_command_writes_both_files() {
    let cases: &[&[&str]] = &[
        &[
            "zeta",
            "eval",
            "--n",
            "2",
            "--P",
            "k1^2-k2^2",
            "--a",
            "0.25,0",
            "--s",
            "5",
            "--s",
            "4.5,1",
        ],
        &["dio", "construct", "--profile", "power:4", "--depth", "5"],
        &["action", "constant-term", "--n", "2", "--mode", "0:1,0:0.4"],
        &["action", "correction", "--n", "2", "--t-points", "7"],
    ];
    for args in cases {
        let dir = TempDir::new().unwrap();
        let o = ncspectral(args, dir.path());
        assert_eq!(
            code(&o),
            0,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!csv_rows(dir.path()).is_empty(), "{args:?}");
        assert_eq!(summary(dir.path())["status"], "ok", "{args:?}");
    }
}
