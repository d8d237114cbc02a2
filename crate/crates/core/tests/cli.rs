use std::path::Path;
use std::process::{Command, Output};

use balloon_sim::atmosphere::AtmosphereModel;
use balloon_sim::trajectory::read_csv_rewards;

const SHEAR: &str = "layered-shear:bands=0/6000/5/0;6000/12000/-3/2;12000/32000/4/-4:0";

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_balloon-sim"))
        .args(args)
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn float_in_calm_air_keeps_position() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = bin(&["run", "--policy", "constant:float", "--out", path(&out)]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(
        stdout.contains("steps=1440") && stdout.contains("termination=truncated"),
        "{stdout}"
    );
    let text = std::fs::read_to_string(&out).unwrap();
    let rows = rows(&text);
    assert_eq!(rows.len(), 1440);
    for r in &rows {
        assert_eq!(
            (r[2].as_str(), r[3].as_str(), r[4].as_str()),
            ("0", "0", "5000")
        );
    }
}

#[test]
fn runs_are_deterministic_and_replay_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let replayed = dir.path().join("r.csv");
    for out in [&a, &b] {
        let o = bin(&[
            "run",
            "--seed",
            "42",
            "--policy",
            "random",
            "--wind-synth",
            SHEAR,
            "--out",
            path(out),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let recorded = std::fs::read(&a).unwrap();
    assert_eq!(recorded, std::fs::read(&b).unwrap());

    let policy = format!("replay:{}", path(&a));
    let o = bin(&[
        "run",
        "--seed",
        "42",
        "--policy",
        &policy,
        "--wind-synth",
        SHEAR,
        "--out",
        path(&replayed),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(recorded, std::fs::read(&replayed).unwrap());
}

#[test]
fn exhausted_replay_is_an_episode_failure() {
    let dir = tempfile::tempdir().unwrap();
    let actions = dir.path().join("actions.txt");
    std::fs::write(&actions, "1\n1\n").unwrap();
    let policy = format!("replay:{}", path(&actions));
    let o = bin(&[
        "run",
        "--policy",
        &policy,
        "--out",
        path(&dir.path().join("t.csv")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("replay exhausted"));
}

#[test]
fn config_and_usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let missing = dir.path().join("missing.toml");
    let o = bin(&[
        "run",
        "--config",
        path(&missing),
        "--policy",
        "constant:up",
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "schema = 1\ndt_contrl = 60\n").unwrap();
    let o = bin(&[
        "run",
        "--config",
        path(&bad),
        "--policy",
        "constant:up",
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dt_contrl"));

    let o = bin(&["run", "--policy", "greedy", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_writes_one_file_per_seed_and_summary_sums() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = bin(&[
        "sweep",
        "--policy",
        "random",
        "--wind-synth",
        SHEAR,
        "--seeds",
        "3,7,11",
        "--out",
        path(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let mut names: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["seed_11.csv", "seed_3.csv", "seed_7.csv", "summary.csv"]
    );

    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.starts_with("seed,steps,total_reward,termination"));
    for row in rows(&summary) {
        let text = std::fs::read_to_string(out.join(format!("seed_{}.csv", row[0]))).unwrap();
        let rewards = read_csv_rewards(&text).unwrap();
        assert_eq!(rewards.len().to_string(), row[1]);
        let total: f64 = rewards.iter().sum();
        assert_eq!(total, row[2].parse::<f64>().unwrap());
    }
}

#[test]
fn sweep_reports_failed_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let actions = dir.path().join("actions.txt");
    std::fs::write(&actions, "1\n").unwrap();
    let policy = format!("replay:{}", path(&actions));
    let out = dir.path().join("sweep");
    let o = bin(&[
        "sweep",
        "--policy",
        &policy,
        "--seeds",
        "0-1",
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(rows(&summary).iter().filter(|r| r[3] == "error").count(), 2);
}

#[test]
fn jsonl_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = bin(&[
        "sweep",
        "--policy",
        "constant:up",
        "--seeds",
        "0",
        "--format",
        "jsonl",
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(out.join("seed_0.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["step"], 1);
    assert_eq!(first["action"], 2);
}

#[test]
fn altitude_hold_reaches_target_under_shear() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = bin(&[
        "sweep",
        "--policy",
        "altitude-hold:7000",
        "--wind-synth",
        SHEAR,
        "--seeds",
        "0-19",
        "--out",
        path(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let mut held = 0;
    for seed in 0..20 {
        let text = std::fs::read_to_string(out.join(format!("seed_{seed}.csv"))).unwrap();
        let last = rows(&text).pop().unwrap();
        let h: f64 = last[4].parse().unwrap();
        if (h - 7000.0).abs() <= 250.0 {
            held += 1;
        }
    }
    assert!(held >= 18, "{held}/20 seeds ended within hysteresis");
}

#[test]
fn atmosphere_table_rows() {
    let o = bin(&["atmosphere", "--min", "0", "--max", "0", "--step", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows = rows(&text);
    assert_eq!(rows.len(), 1);
    let s = AtmosphereModel::new().sample(0.0).unwrap();
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), s.pressure);

    let o = bin(&[
        "atmosphere",
        "--min",
        "0",
        "--max",
        "11000",
        "--step",
        "11000",
        "--geopotential",
    ]);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows = self::rows(&text);
    assert_eq!(rows.len(), 2);
    let t: f64 = rows[1][1].parse().unwrap();
    let p: f64 = rows[1][2].parse().unwrap();
    let rho: f64 = rows[1][3].parse().unwrap();
    assert!((t - 216.65).abs() < 0.05);
    assert!(((p - 22_632.1) / 22_632.1).abs() < 1e-3);
    assert!(((rho - 0.36392) / 0.36392).abs() < 1e-3);

    let o = bin(&[
        "atmosphere",
        "--min",
        "1000",
        "--max",
        "4500",
        "--step",
        "1000",
    ]);
    assert_eq!(rows_of(&o), 4);

    let o = bin(&[
        "atmosphere",
        "--min",
        "0",
        "--max",
        "87000",
        "--step",
        "1000",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

fn rows_of(o: &Output) -> usize {
    rows(&String::from_utf8_lossy(&o.stdout)).len()
}

#[test]
fn wind_synth_round_trips_through_run() {
    let dir = tempfile::tempdir().unwrap();
    let wind = dir.path().join("wind.txt");
    let o = bin(&["wind-synth", "--wind-synth", SHEAR, "--out", path(&wind)]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let from_file = dir.path().join("f.csv");
    let from_synth = dir.path().join("s.csv");
    bin(&[
        "run",
        "--policy",
        "constant:up",
        "--wind",
        path(&wind),
        "--out",
        path(&from_file),
    ]);
    bin(&[
        "run",
        "--policy",
        "constant:up",
        "--wind-synth",
        SHEAR,
        "--out",
        path(&from_synth),
    ]);
    assert_eq!(
        std::fs::read(&from_file).unwrap(),
        std::fs::read(&from_synth).unwrap()
    );
}
