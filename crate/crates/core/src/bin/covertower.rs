use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use covertower::experiments::{exit_code_for, run, Command, ExperimentConfig, Overrides, EXIT_USAGE};

/// Bergman kernel and random zero experiments on towers of flat tori.
#[derive(Parser, Debug)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML config; defaults are used for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    /// Bundle power.
    #[arg(long = "N", id = "N")]
    n: Option<u32>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let overrides = Overrides {
        out: cli.out,
        seed: cli.seed,
        samples: cli.samples,
        depth: cli.depth,
        n: cli.n,
    };
    let cfg = cli
        .config
        .as_deref()
        .map(ExperimentConfig::load)
        .unwrap_or_else(|| Ok(ExperimentConfig::default()))
        .and_then(|c| overrides.apply(c));
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("covertower: {e}");
            return ExitCode::from(exit_code_for(&e) as u8);
        }
    };
    let start = Instant::now();
    match run(cli.command, &cfg) {
        Ok(report) => {
            for c in &report.checks {
                let tag = if c.passed { "ok  " } else { "FAIL" };
                println!("{tag} {}  {}", c.name, c.detail);
            }
            println!(
                "{}: {} files in {} ({:.1}s)",
                cli.command.name(),
                report.files.len(),
                cfg.output.dir.display(),
                start.elapsed().as_secs_f64()
            );
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("covertower {}: {e}", cli.command.name());
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
