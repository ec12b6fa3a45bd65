use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use smalleig_cli::commands::SWEEP_CSV_COLUMNS;
use smalleig_cli::{cmd_build, cmd_converge, cmd_corollary, cmd_oracle_check, cmd_sweep, Outcome, RunConfig};
use smalleig_core::{MassKind, TestFunctionVariant};

/// Small Laplace eigenvalues of cyclic covers of a genus-2 hyperbolic surface.
#[derive(Parser)]
#[command(name = "smalleig", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Command {
    /// Write the base mesh and one cover mesh per N in HYPMESH format.
    Build,
    /// Solve each cover and evaluate the eigenvalue bound (sweep.csv, sweep.json).
    #[command(after_help = format!("CSV columns: {SWEEP_CSV_COLUMNS}"))]
    Sweep,
    /// Eigenvalues of the base surface at refinement levels 0..=refine.
    Converge,
    /// Witness multicurve length against the collapsing eigenvalue, per N.
    Corollary,
    /// Compare the sparse solver with the dense oracle on small pencils.
    OracleCheck,
}

/// Flags override values read from `--config`.
#[derive(Args)]
struct Flags {
    /// `key = value` file (keys: cuffs, twists, m, refine, n, N, tol, out, seed, mass, testfn).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Comma-separated list of N values.
    #[arg(long = "N", global = true, value_delimiter = ',')]
    big_n: Option<Vec<usize>>,
    #[arg(long, global = true)]
    refine: Option<usize>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// consistent or lumped
    #[arg(long, global = true)]
    mass: Option<MassKind>,
    /// corrected or paper-literal
    #[arg(long, global = true)]
    testfn: Option<TestFunctionVariant>,
}

fn config(flags: &Flags) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &flags.config {
        cfg.load(path)?;
    }
    if let Some(v) = flags.n {
        cfg.n = v;
    }
    if let Some(v) = &flags.big_n {
        cfg.big_n = v.clone();
    }
    if let Some(v) = flags.refine {
        cfg.refine = v;
    }
    if let Some(v) = flags.tol {
        cfg.tol = v;
    }
    if let Some(v) = &flags.out {
        cfg.out = v.clone();
    }
    if let Some(v) = flags.seed {
        cfg.seed = v;
    }
    if let Some(v) = flags.mass {
        cfg.mass = v;
    }
    if let Some(v) = flags.testfn {
        cfg.testfn = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = config(&cli.flags)?;
    match cli.command {
        Command::Build => cmd_build(&cfg),
        Command::Sweep => cmd_sweep(&cfg),
        Command::Converge => cmd_converge(&cfg),
        Command::Corollary => cmd_corollary(&cfg),
        Command::OracleCheck => cmd_oracle_check(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("one or more asserted inequalities failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
