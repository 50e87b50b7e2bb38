use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use monotone_contact::config::Format;
use monotone_contact::pipeline::{run, CheckStatus, Command, RunContext};

#[derive(Parser)]
#[command(name = "contactctl", version, about = "Monotone contact Hamiltonian experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the structural assumptions on a sample grid.
    Check(RunArgs),
    /// Integrate one orbit from `flow.initial`.
    Simulate(RunArgs),
    /// Solve the discounted Hamilton-Jacobi equation on the grid.
    SolveHj(RunArgs),
    /// Approximate the attractor by flowing a sampled trapping set.
    Attractor(RunArgs),
    /// Equilibria, connecting orbits and the structure check.
    Analyze(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides `output.directory`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "K")]
    threads: Option<usize>,
    /// Emit only this artifact format.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match cli.command {
        Cmd::Check(a) => (Command::Check, a),
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::SolveHj(a) => (Command::SolveHj, a),
        Cmd::Attractor(a) => (Command::Attractor, a),
        Cmd::Analyze(a) => (Command::Analyze, a),
    };
    match execute(cmd, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(cmd: Command, args: RunArgs) -> anyhow::Result<bool> {
    if let Some(k) = args.threads {
        anyhow::ensure!(k > 0, "--threads must be positive");
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let format = args.format.map(|f| match f {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    });
    let ctx = RunContext::from_file(&args.config, args.out, format)?;
    let manifest = run(cmd, &ctx).with_context(|| format!("{} failed", cmd.name()))?;
    for c in &manifest.checks {
        let tag = match c.status {
            CheckStatus::Passed => "ok",
            CheckStatus::Failed => "FAILED",
            CheckStatus::Skipped => "skipped",
            CheckStatus::Info => "info",
        };
        println!("{tag:>8}  {}: {}", c.name, c.detail);
    }
    println!("artifacts in {}", ctx.out_dir.display());
    Ok(manifest.success())
}
