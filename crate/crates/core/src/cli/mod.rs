//! Command-line driver: symbolic derivations and checks, space-time runs and
//! refinement studies, configured by a TOML file and writing CSV.

mod commands;
mod config;

use std::path::PathBuf;

pub use commands::{build_problem, cmd_check, cmd_converge, cmd_derive, cmd_run, simulate, ConvergeRow, Outcome, RunResult};
pub use config::{
    parse_phi, ConvergeConfig, DiagnosticsConfig, InitialConfig, MeshConfig, ModelConfig, OutputConfig, RunConfig,
    SolverSection, TimeConfig,
};

use crate::fem::FemError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Solver(_) => EXIT_SOLVER,
        }
    }
}

impl From<FemError> for CliError {
    fn from(e: FemError) -> Self {
        match e {
            FemError::NonPositiveJacobian { .. } | FemError::NoConvergence { .. } | FemError::SingularJacobian { .. } => {
                CliError::Solver(e.to_string())
            }
            FemError::Io(m) => CliError::Io(m),
            e => CliError::Config(e.to_string()),
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Derive,
    Check,
    Run,
    Converge,
}

/// Command-line overrides applied on top of the config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub levels: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, c: &mut RunConfig) {
        if let Some(o) = &self.out {
            c.output.dir = o.to_string_lossy().into_owned();
        }
        if let Some(s) = self.seed {
            c.mesh.seed = s;
        }
        if let Some(l) = self.levels {
            c.converge.levels = l;
        }
    }
}

/// Runs one subcommand and returns its report with the process exit code.
pub fn execute(cmd: Command, config: &RunConfig) -> (String, i32) {
    let r = match cmd {
        Command::Derive => cmd_derive(config),
        Command::Check => cmd_check(config),
        Command::Run => cmd_run(config),
        Command::Converge => cmd_converge(config),
    };
    match r {
        Ok(o) => {
            let code = if o.passed { EXIT_OK } else { EXIT_VERIFICATION };
            (o.report, code)
        }
        Err(e) => (format!("{e}\n"), e.exit_code()),
    }
}
