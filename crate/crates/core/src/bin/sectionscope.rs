use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sectionscope::io::{run, Command, Options};

/// Sections of long trajectories as a numerical test of integrability.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// TOML config, or a manifest.json from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for result files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for scan (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Write the sampled trajectory (simulate).
    #[arg(long, global = true)]
    dump: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Integrate one trajectory and report conserved-quantity drift.
    Simulate,
    /// Intersect a trajectory with the coordinate planes and classify.
    Section,
    /// Monte-Carlo sweep over (eps1, eps2).
    Scan,
    /// Summarize and re-render results found in --out.
    Report,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let command = match cli.command {
        Cmd::Simulate => Command::Simulate,
        Cmd::Section => Command::Section,
        Cmd::Scan => Command::Scan,
        Cmd::Report => Command::Report,
    };
    let opts = Options {
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
        threads: cli.threads,
        dump: cli.dump,
        progress: true,
    };
    match run(command, &opts) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
