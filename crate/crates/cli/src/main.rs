use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use dampwave_cli::run::{Run, RunOptions};

#[derive(Parser)]
#[command(name = "dampwave", version, about = "Response solutions of damped, quasi-periodically forced wave equations")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run directory (default: runs/<subcommand>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for scans (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Refuse ε outside the configured domain (default).
    #[arg(long, global = true, conflicts_with = "explore")]
    strict: bool,
    /// Run outside the configured domain and record warnings.
    #[arg(long, global = true)]
    explore: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Zeroth order, Lindstedt series and Picard iteration at one ε.
    Solve,
    /// Lindstedt series and residual-order fit.
    Lindstedt,
    /// Picard iteration over a rectangle of ε values.
    Scan,
    /// Resonant parameter values of the linear part.
    Resonances,
    /// Non-resonance diagnostic of ω.
    OmegaDiag,
    /// Sampled spectral lower bounds.
    Gamma,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Lindstedt => "lindstedt",
            Command::Scan => "scan",
            Command::Resonances => "resonances",
            Command::OmegaDiag => "omega-diag",
            Command::Gamma => "gamma",
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let path = cli.config.context("--config <path> is required")?;
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading {}", path.display()))?;
    let out = cli
        .out
        .unwrap_or_else(|| PathBuf::from("runs").join(cli.command.name()));
    let run = Run::new(
        text,
        RunOptions {
            out: out.clone(),
            seed: cli.seed,
            strict: !cli.explore,
        },
    )?;
    match cli.command {
        Command::Solve => {
            let r = run.solve()?;
            println!(
                "converged in {} iterations, residual {:.3e}",
                r.iterations, r.residual.value
            );
        }
        Command::Lindstedt => run.lindstedt()?,
        Command::Scan => {
            let n = run.scan()?;
            println!("{n} points converged");
        }
        Command::Resonances => {
            let n = run.resonances()?;
            println!("{n} resonances");
        }
        Command::OmegaDiag => {
            let r = run.omega_diag()?;
            match r.max_order {
                Some(m) => println!("sup = {:.9}, max order M = {m}", r.sup),
                None => println!("sup = {:.9}, max order M unbounded", r.sup),
            }
        }
        Command::Gamma => run.gamma()?,
    }
    println!("outputs in {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
