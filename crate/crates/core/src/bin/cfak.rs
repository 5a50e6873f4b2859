use std::path::PathBuf;
use std::process::ExitCode;

use cfak_core::cli::{self, Flags};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cfak", version, about = "CSP-free adaptive Kriging reliability analysis")]
struct Args {
    /// Worker threads for independent seeds.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Output directory (overrides the config's out_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// First seed (overrides seed_base and explicit seeds).
    #[arg(long = "seed-base", global = true)]
    seed_base: Option<u64>,
    /// Number of seeds (overrides n_runs and explicit seeds).
    #[arg(long, global = true)]
    runs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write runs.csv, stats.json and logs.
    Run { config: PathBuf },
    /// Write a 2-D lattice of surrogate predictions and the DoE.
    Grid { config: PathBuf },
    /// Print the benchmark registry with default settings.
    List,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let flags = Flags { jobs: args.jobs, out: args.out, seed_base: args.seed_base, runs: args.runs };
    let code = match args.command {
        Command::Run { config } => cli::cmd_run(&config, &flags),
        Command::Grid { config } => cli::cmd_grid(&config, &flags),
        Command::List => cli::cmd_list(),
    };
    ExitCode::from(code as u8)
}
