//! Batch front end: configuration, the experiment commands and their output files.

pub mod commands;
pub mod config;
pub mod output;

use anyhow::Result;
use hessiancone::solver::SolveConfig;

use config::Settings;
use output::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    LemmaSweep,
    ConeCheck,
    Solve,
    BoundaryScaling,
    Degenerate,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::LemmaSweep => "lemma-sweep",
            Subcommand::ConeCheck => "cone-check",
            Subcommand::Solve => "solve",
            Subcommand::BoundaryScaling => "boundary-scaling",
            Subcommand::Degenerate => "degenerate",
        }
    }
}

/// Runs one subcommand against resolved settings.
pub fn run(cmd: Subcommand, settings: &Settings, seed: u64) -> Result<Outcome> {
    let solver: SolveConfig = settings.solver.into();
    match cmd {
        Subcommand::LemmaSweep => commands::lemma_sweep(&settings.lemma_sweep, seed),
        Subcommand::ConeCheck => commands::cone_check(&settings.cone_check, seed),
        Subcommand::Solve => commands::solve(&settings.solve, &solver),
        Subcommand::BoundaryScaling => commands::boundary_scaling(&settings.boundary_scaling, &solver),
        Subcommand::Degenerate => commands::degenerate(&settings.degenerate, &solver),
    }
}

/// Worker count requested through `HESSIANCONE_THREADS`, if any.
pub fn requested_threads() -> Result<Option<usize>> {
    match std::env::var("HESSIANCONE_THREADS") {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| anyhow::anyhow!("HESSIANCONE_THREADS must be a positive integer, got {v:?}"))?;
            anyhow::ensure!(n > 0, "HESSIANCONE_THREADS must be positive");
            Ok(Some(n))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(e.into()),
    }
}
