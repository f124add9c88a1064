use std::path::PathBuf;

use clap::Parser;
use gcfp::cli::{run, RunArgs};

/// Generalized fixed points of maps on eventually constant sequences.
#[derive(Debug, Parser)]
#[command(name = "gcfp", version)]
struct Args {
    /// JSON problem list.
    #[arg(long)]
    config: PathBuf,
    /// Directory for the per-problem CSV tables.
    #[arg(long)]
    out: PathBuf,
    /// Seed for the sampled Lipschitz checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() {
    // Usage errors share exit code 1 with config errors; 2 means "uncertified".
    let a = Args::try_parse().unwrap_or_else(|e| {
        let _ = e.print();
        std::process::exit(if e.use_stderr() { 1 } else { 0 });
    });
    let args = RunArgs {
        config: a.config,
        out: a.out,
        seed: a.seed,
    };
    let code = run(&args, &mut std::io::stdout().lock());
    std::process::exit(code);
}
