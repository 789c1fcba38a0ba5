use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use swnoether::cli::{execute, Command, Overrides, RunConfig, EXIT_CONFIG, EXIT_OK, EXIT_SOLVER};

#[derive(Parser)]
#[command(name = "swnoether", version, about = "Noether identities for Lagrangian shallow water")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// TOML configuration file; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Mesh perturbation seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Refinement levels for `converge`.
    #[arg(long, global = true)]
    levels: Option<usize>,
    /// Print nothing unless something fails.
    #[arg(long, global = true)]
    quiet: bool,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    show_config: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Print Euler-Lagrange equations, currents and PV density.
    Derive,
    /// Run the symbolic invariance and identity checks.
    Check,
    /// March all slabs and write the Noether residual report.
    Run,
    /// Weak-PV refinement study.
    Converge,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut config = match &args.config {
        Some(p) => match RunConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(e.exit_code() as u8);
            }
        },
        None => RunConfig::default(),
    };
    Overrides { out: args.out.clone(), seed: args.seed, levels: args.levels }.apply(&mut config);
    if args.show_config {
        print!("{}", config.to_toml());
        return ExitCode::SUCCESS;
    }
    let cmd = match args.command {
        Cmd::Derive => Command::Derive,
        Cmd::Check => Command::Check,
        Cmd::Run => Command::Run,
        Cmd::Converge => Command::Converge,
    };
    let (report, code) = execute(cmd, &config);
    if code == EXIT_CONFIG || code == EXIT_SOLVER {
        eprint!("{report}");
    } else if !args.quiet || code != EXIT_OK {
        print!("{report}");
    }
    ExitCode::from(code as u8)
}
