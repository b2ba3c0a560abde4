use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use levi_flat::cli::{self, CheckKind, Command, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "lfl", version, about = "Diederich-Fornaess index laboratory for Levi-flat models")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a seeded Fourier metric as an LFLD1 field plus sidecar.
    GenMetric(RunArgs),
    /// Run one verification check.
    Check {
        #[arg(value_enum)]
        kind: Kind,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Closed-form exponent of a metric, cross-checked by bisection.
    Exponent(RunArgs),
    /// Search band-limited metrics for the largest exponent.
    Optimize(RunArgs),
    /// Combine run reports.
    Report {
        #[command(subcommand)]
        action: ReportCmd,
    },
}

#[derive(Subcommand)]
enum ReportCmd {
    Merge {
        reports: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Identity,
    Exactness,
    Integral,
    Remark,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(command: Command, args: RunArgs) -> i32 {
    let mut config = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("lfl: {e}");
            return e.exit_code();
        }
    };
    config.apply(&Overrides {
        seed: args.seed,
        size: args.size,
        out: args.out,
    });
    match cli::run(command, &config) {
        Ok(report) => {
            for c in &report.checks {
                let status = if c.pass { "pass" } else { "FAIL" };
                println!("{status} {} residual={:e} tolerance={:e}", c.check, c.residual, c.tolerance);
            }
            if let Some(e) = &report.error {
                eprintln!("lfl: {e}");
            }
            report.exit_code
        }
        Err(e) => {
            eprintln!("lfl: {e}");
            e.exit_code()
        }
    }
}

fn main() -> ExitCode {
    if let Some(threads) = std::env::var("LFL_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let cli = Cli::parse();
    let code = match cli.command {
        Cmd::GenMetric(args) => run(Command::GenMetric, args),
        Cmd::Check { kind, args } => {
            let kind = match kind {
                Kind::Identity => CheckKind::Identity,
                Kind::Exactness => CheckKind::Exactness,
                Kind::Integral => CheckKind::Integral,
                Kind::Remark => CheckKind::Remark,
            };
            run(Command::Check(kind), args)
        }
        Cmd::Exponent(args) => run(Command::Exponent, args),
        Cmd::Optimize(args) => run(Command::Optimize, args),
        Cmd::Report {
            action: ReportCmd::Merge { reports, out },
        } => match cli::merge_reports(&reports) {
            Ok(merged) => match std::fs::write(&out, merged.to_json()) {
                Ok(()) => merged.exit_code,
                Err(e) => {
                    eprintln!("lfl: {e}");
                    3
                }
            },
            Err(e) => {
                eprintln!("lfl: {e}");
                e.exit_code()
            }
        },
    };
    ExitCode::from(code as u8)
}
