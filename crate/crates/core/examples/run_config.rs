//! Drives the `lfl` commands from code: every check on one seeded metric,
//! then a merged report.
//!
//! cargo run --release --example run_config -- [output dir]

use levi_flat::cli::{self, CheckKind, Command, RunConfig};
use std::path::PathBuf;

const CONFIG: &str = r#"{
  "model": { "n": 1, "kind": "PeriodicSheared", "sizes": [32, 32, 32], "shear": [0.41421356237309503] },
  "metric": { "type": "seeded_fourier", "seed": 5, "cutoff": 2, "amplitude": 0.5, "smoothness": 2.0 }
}"#;

fn main() -> levi_flat::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir).join("lfl-run");
    let mut config = RunConfig::from_json(CONFIG)?;
    config.output_dir = dir.clone();

    let mut reports = Vec::new();
    for command in [
        Command::GenMetric,
        Command::Check(CheckKind::Identity),
        Command::Check(CheckKind::Exactness),
        Command::Check(CheckKind::Integral),
        Command::Check(CheckKind::Remark),
        Command::Exponent,
    ] {
        let report = cli::run(command, &config)?;
        println!("{:<16} exit {} {:?}", report.command, report.exit_code, report.outputs);
        reports.push(dir.join(format!("{}.json", command.name())));
    }
    let merged = cli::merge_reports(&reports)?;
    println!("merged: pass = {}, exit code {}", merged.pass, merged.exit_code);
    Ok(())
}
