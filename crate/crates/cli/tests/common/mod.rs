#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_skillprice"));
    cmd.env_remove("SOURCE_DATE_EPOCH").env("SKILLPRICE_LOG", "error");
    cmd
}

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Runs build → value → complement → analyze → export on the fixture into
/// `dir`; returns the artifact path.
pub fn fixture_pipeline(dir: &Path) -> PathBuf {
    let fx = fixtures();
    let config = fx.join("pipeline.toml");
    let data = fx.join("projects.csv");
    let model = dir.join("model.json");
    let c = config.to_str().unwrap();
    let d = data.to_str().unwrap();
    let m = model.to_str().unwrap();
    run_ok(&["build", "--config", c, "--data", d, "--out", m, "--timestamp", "1700000000"]);
    run_ok(&["value", "--config", c, "--data", d, "--artifact", m]);
    run_ok(&["complement", "--config", c, "--artifact", m]);
    let auto = fx.join("automation.csv");
    run_ok(&["analyze", "--config", c, "--data", d, "--artifact", m, "--automation", auto.to_str().unwrap()]);
    run_ok(&["export", "--artifact", m, "--out-dir", dir.join("export").to_str().unwrap()]);
    model
}

pub const GOLDEN_FILES: [&str; 9] = [
    "edges.csv",
    "nodes.csv",
    "partition.json",
    "valuation.csv",
    "trends.csv",
    "scores.csv",
    "skill_table.csv",
    "models.json",
    "domain_matrix.csv",
];
