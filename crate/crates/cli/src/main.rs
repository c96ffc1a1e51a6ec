use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand as ClapSubcommand};
use hessiancone_cli::config::{Profile, Settings};
use hessiancone_cli::output::{write_outcome, Provenance};
use hessiancone_cli::{requested_threads, run, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "hessiancone", version, about = "Experiments for complex Hessian equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML file overriding the profile defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Directory receiving the CSV files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Profile::Fast)]
    profile: Profile,
}

#[derive(Debug, Clone, Copy, ClapSubcommand)]
enum Command {
    /// Arrowhead eigenvalue concentration sweeps and deflation.
    LemmaSweep,
    /// Structural checks of the symmetric functions.
    ConeCheck,
    /// Continuity-method solves of a preset problem.
    Solve,
    /// Boundary estimate ratios along a scaled boundary-data family.
    BoundaryScaling,
    /// Shifted solves approaching a degenerate right-hand side.
    Degenerate,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::LemmaSweep => Subcommand::LemmaSweep,
            Command::ConeCheck => Subcommand::ConeCheck,
            Command::Solve => Subcommand::Solve,
            Command::BoundaryScaling => Subcommand::BoundaryScaling,
            Command::Degenerate => Subcommand::Degenerate,
        }
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    if let Some(n) = requested_threads()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let cmd = Subcommand::from(cli.command);
    let settings = Settings::load(cli.profile, cli.config.as_deref())?;
    let start = Instant::now();
    let outcome = run(cmd, &settings, cli.seed)?;
    let provenance = Provenance::new(cmd.name(), cli.profile, cli.seed, &settings);
    let written = write_outcome(&cli.out, &provenance, &outcome)?;
    for a in &outcome.assertions {
        println!("{} {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.detail);
    }
    for path in &written {
        eprintln!("wrote {}", path.display());
    }
    eprintln!("{} finished in {:.1} s", cmd.name(), start.elapsed().as_secs_f64());
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
