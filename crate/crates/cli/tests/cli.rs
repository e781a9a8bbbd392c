use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use arx_evolve::data::kse_like_series;
use arx_evolve::genome::Population;
use arx_evolve::{parse_table, ArxModel};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_arx-evolve"));
    cmd.env_remove("ARX_EVOLVE_OUT");
    cmd
}

fn write_data(dir: &Path) -> String {
    let path = dir.join("data.csv");
    fs::write(&path, kse_like_series(11).to_csv()).unwrap();
    path.to_str().unwrap().to_string()
}

fn ok(out: Output) -> Output {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn data_rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn run_writes_three_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    let out = dir.path().join("out");
    ok(bin()
        .args([
            "run",
            "--data",
            &data,
            "--variant",
            "I.I",
            "--pc",
            "0.75",
            "--pm",
            "0.01",
        ])
        .args([
            "--generations",
            "1000",
            "--pop-size",
            "99",
            "--seed",
            "42",
            "--out",
        ])
        .arg(&out)
        .output()
        .unwrap());
    assert_eq!(data_rows(&out.join("stats.csv")), 1001);
    let model: ArxModel = fs::read_to_string(out.join("best_model.txt"))
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(model.a.len(), 5);
    let pop =
        Population::from_snapshot(&fs::read_to_string(out.join("population_final.txt")).unwrap())
            .unwrap();
    assert_eq!(pop.len(), 99);
}

#[test]
fn zero_generations_gives_one_stats_row() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    let out = dir.path().join("out");
    ok(bin()
        .args(["run", "--data", &data, "--generations", "0", "--out"])
        .arg(&out)
        .output()
        .unwrap());
    assert_eq!(data_rows(&out.join("stats.csv")), 1);
}

#[test]
fn missing_data_exits_two_and_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.csv");
    let out = bin()
        .args(["run", "--data"])
        .arg(&missing)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(missing.to_str().unwrap()));
}

#[test]
fn malformed_data_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "year,u1\n1946,1\n").unwrap();
    let out = bin().args(["run", "--data"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn environment_overrides_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    let flag_out = dir.path().join("flag");
    let env_out = dir.path().join("env");
    ok(bin()
        .env("ARX_EVOLVE_OUT", &env_out)
        .args(["run", "--data", &data, "--generations", "2", "--out"])
        .arg(&flag_out)
        .output()
        .unwrap());
    assert!(env_out.join("stats.csv").is_file());
    assert!(!flag_out.exists());
}

#[test]
fn sweep_rows_and_frozen_operators() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    let out = dir.path().join("out");
    ok(bin()
        .args([
            "sweep",
            "--data",
            &data,
            "--generations",
            "20",
            "--sweep-grid",
            "0,0.01,0.1",
        ])
        .args(["--repeats", "2", "--pc", "0", "--no-timing", "--out"])
        .arg(&out)
        .output()
        .unwrap());
    let text = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 7);

    // p_m = 0 and p_c = 0: nothing can improve on the seeded population
    let gen0 = dir.path().join("gen0");
    ok(bin()
        .args(["run", "--data", &data, "--generations", "0", "--out"])
        .arg(&gen0)
        .output()
        .unwrap());
    let stats = fs::read_to_string(gen0.join("stats.csv")).unwrap();
    let gen0_best = stats
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .to_string();
    for line in text.lines().skip(1).filter(|l| l.starts_with("0,0,")) {
        assert_eq!(line.split(',').nth(2).unwrap(), gen0_best);
    }
    assert_eq!(data_rows(&out.join("sweep_summary.csv")), 3);
}

#[test]
fn synth_output_parses() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    ok(bin().arg("synth").arg(&path).output().unwrap());
    assert_eq!(
        parse_table(&fs::read_to_string(&path).unwrap())
            .unwrap()
            .len(),
        62
    );
}

#[test]
fn invalid_flags_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    for args in [
        vec!["--variant", "IV.I"],
        vec!["--pop-size", "1"],
        vec!["--sweep-grid", "0.5,1.5"],
        vec!["--crossover", "sideways"],
    ] {
        let out = bin()
            .args(["sweep", "--data", &data])
            .args(&args)
            .output()
            .unwrap();
        assert!(!out.status.success(), "{args:?}");
    }
}
