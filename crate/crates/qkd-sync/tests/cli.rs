//! End-to-end checks of the `qkd-sync` binary: exit codes, config-file
//! merging, environment seed, and output-format consistency.

use std::io::Write;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qkd-sync"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn plan_out_of_criterion_multiplier_is_a_usage_error() {
    let out = run(&[
        "plan",
        "--length-km",
        "100",
        "--refractive-index",
        "1.4670",
        "--window-multiplier",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("criterion"));

    let out = run(&[
        "plan",
        "--length-km",
        "100",
        "--refractive-index",
        "1.4670",
        "--window-multiplier",
        "5",
        "--allow-out-of-criterion",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn plan_zero_length_link_is_rejected() {
    let out = run(&["plan", "--length-km", "0", "--refractive-index", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn prob_precision_failure_exits_3_with_partial_sum() {
    let out = run(&[
        "prob",
        "--windows",
        "4",
        "--sample-size",
        "1",
        "--dcp-rate-hz",
        "0",
        "--signal-mean",
        "60",
        "--max-terms",
        "16",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("partial sum"));
}

#[test]
fn prob_zero_signal_is_zero() {
    let out = run(&[
        "prob",
        "--windows",
        "16",
        "--dcp-rate-hz",
        "0",
        "--signal-mean",
        "0",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["rows"][0]["p_exact"].as_f64().unwrap(), 0.0);
    assert_eq!(doc["schema_version"], 1);
}

#[test]
fn comma_decimals_are_accepted() {
    let out = run(&[
        "prob",
        "--windows",
        "524288",
        "--signal-mean",
        "0,001",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let p = doc["rows"][0]["p_approx"].as_f64().unwrap();
    assert!((p - 0.0795).abs() < 0.0005);
}

#[test]
fn table_values_reappear_identically_in_json() {
    let args = [
        "plan",
        "--length-km",
        "100",
        "--refractive-index",
        "1.4670",
    ];
    let table = stdout(&run(&args));
    let json = stdout(&run(&[&args[..], &["--format", "json"]].concat()));
    let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    let formatted = doc["formatted"][0].as_object().unwrap();
    let mut checked = 0;
    for line in table.lines() {
        let (key, value) = line.split_once("  ").expect("aligned table line");
        let key = key.trim();
        let value = value.trim();
        assert_eq!(
            formatted[key].as_str().unwrap(),
            value,
            "table/json mismatch for {key}"
        );
        checked += 1;
    }
    assert!(checked >= 10);
}

#[test]
fn config_file_supplies_values_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("prob.conf");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "# worked example").unwrap();
    writeln!(f, "windows = 524288").unwrap();
    writeln!(f, "sample-size = 256").unwrap();
    writeln!(f, "signal-mean = 0,001").unwrap();
    drop(f);

    let out = run(&["prob", "--config", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let p = doc["rows"][0]["p_approx"].as_f64().unwrap();
    assert!((p - 0.0795).abs() < 0.0005);

    // flag overrides the file's sample size: 1024 gives 27.5%
    let out = run(&[
        "prob",
        "--config",
        path.to_str().unwrap(),
        "--sample-size",
        "1024",
        "--format",
        "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let p = doc["rows"][0]["p_approx"].as_f64().unwrap();
    assert!((p - 0.275).abs() < 0.002);
}

#[test]
fn unknown_config_key_lists_valid_keys() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    std::fs::write(&path, "windows = 16\nwibble = 3\n").unwrap();
    let out = run(&["prob", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("wibble"), "{err}");
    assert!(err.contains("valid keys"), "{err}");
    assert!(err.contains("dcp-rate-hz"), "{err}");
}

#[test]
fn env_seed_is_used_and_flag_overrides_it() {
    let sim_args = [
        "simulate",
        "--windows",
        "64",
        "--sample-size",
        "32",
        "--dcp-rate-hz",
        "10000",
        "--signal-mean",
        "0.02",
        "--trials",
        "400",
        "--format",
        "csv",
    ];
    let with_env = |seed: &str| {
        let out = bin()
            .args(sim_args)
            .env("QKD_SYNC_SEED", seed)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let a = with_env("1");
    let b = with_env("1");
    let c = with_env("2");
    assert_eq!(a, b);
    assert_ne!(a, c, "different env seeds must change the sample path");

    let flag = bin()
        .args(sim_args)
        .args(["--seed", "2"])
        .env("QKD_SYNC_SEED", "1")
        .output()
        .unwrap();
    assert_eq!(flag.stdout, c, "flag seed must override env seed");
}

#[test]
fn simulate_single_trial_notes_degenerate_interval() {
    let out = run(&[
        "simulate",
        "--windows",
        "16",
        "--sample-size",
        "8",
        "--dcp-rate-hz",
        "0",
        "--signal-mean",
        "1",
        "--trials",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("degenerate"), "{}", stdout(&out));
}

#[test]
fn simulate_low_probability_still_exits_zero() {
    let out = run(&[
        "simulate",
        "--windows",
        "1024",
        "--sample-size",
        "16",
        "--dcp-rate-hz",
        "5",
        "--signal-mean",
        "0.0001",
        "--trials",
        "200",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn simulate_compare_naive_emits_ordered_rows() {
    let out = run(&[
        "simulate",
        "--windows",
        "64",
        "--sample-size",
        "64",
        "--detector",
        "geiger",
        "--dcp-rate-hz",
        "5000000",
        "--signal-mean",
        "0.5",
        "--signal-window",
        "40",
        "--use-schedule",
        "--compare-naive",
        "--trials",
        "2000",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["run"], "scheduled");
    assert_eq!(rows[1]["run"], "naive");
    let scheduled = rows[0]["p_mc"].as_f64().unwrap();
    let naive = rows[1]["p_mc"].as_f64().unwrap();
    let se = (scheduled * (1.0 - scheduled) / 2000.0).sqrt().max(1.0 / 4000.0);
    assert!(
        naive <= scheduled + 3.0 * se,
        "blind windows should not help: naive {naive} vs scheduled {scheduled}"
    );
}

#[test]
fn schedule_command_matches_worked_example() {
    let out = run(&["schedule", "--windows", "524288", "--dead-time-ns", "45"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("64"), "{text}");
    assert!(text.contains("32"), "{text}");
    assert!(text.contains("0 32 64 96 128"), "{text}");

    let out = run(&["schedule", "--windows", "63", "--dead-time-ns", "45"]);
    assert_eq!(out.status.code(), Some(2), "non power of two must fail");
}

#[test]
fn schedule_full_dump_covers_every_window() {
    let out = run(&[
        "schedule",
        "--windows",
        "64",
        "--window-width-ns",
        "2",
        "--dead-time-ns",
        "3",
        "--full",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("cycle,position,window"));
    let mut windows: Vec<u64> = lines
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    windows.sort_unstable();
    assert_eq!(windows, (0..64).collect::<Vec<_>>());
}

#[test]
fn sweep_reproduces_published_pair_and_is_stable() {
    let args = [
        "sweep",
        "--axis",
        "sample-size",
        "--from",
        "256",
        "--to",
        "1024",
        "--steps",
        "2",
        "--format",
        "csv",
    ];
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("parameter,value,p_exact,p_approx,rel_gap,p_mc,mc_ci_low,mc_ci_high")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    let p1: f64 = rows[0][3].parse().unwrap();
    let p2: f64 = rows[1][3].parse().unwrap();
    assert!((p1 - 0.0795).abs() < 0.0005);
    assert!((p2 - 0.275).abs() < 0.002);
    // MC columns empty when not requested
    assert_eq!(rows[0][5], "");

    // byte-stable across runs
    assert_eq!(out.stdout, run(&args).stdout);
}

#[test]
fn sweep_identical_endpoints_give_identical_rows() {
    let out = run(&[
        "sweep",
        "--axis",
        "signal-mean",
        "--from",
        "0.001",
        "--to",
        "0.001",
        "--steps",
        "2",
        "--windows",
        "1024",
        "--format",
        "csv",
    ]);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], rows[1]);
}

#[test]
fn sweep_signal_axis_is_monotone_in_exact_probability() {
    let out = run(&[
        "sweep",
        "--axis",
        "signal-mean",
        "--from",
        "0",
        "--to",
        "0.01",
        "--steps",
        "11",
        "--windows",
        "1024",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let values: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 11);
    for pair in values.windows(2) {
        assert!(pair[1] >= pair[0] - 1e-12, "p_exact not nondecreasing: {values:?}");
    }
}

#[test]
fn sweep_unknown_axis_is_a_usage_error() {
    let out = run(&[
        "sweep",
        "--axis",
        "frobnication",
        "--from",
        "1",
        "--to",
        "2",
        "--steps",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_file_writing_works() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.json");
    let out = run(&[
        "plan",
        "--length-km",
        "100",
        "--refractive-index",
        "1.49",
        "--format",
        "json",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let v = doc["rows"][0]["propagation_speed_km_s"].as_f64().unwrap();
    assert!((v - 201_342.0).abs() < 1.0);
}
