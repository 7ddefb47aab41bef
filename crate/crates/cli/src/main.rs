use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use fredholm2d_cli::{execute, parse_config_for, CliError, Command};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Nodes,
    Quadtest,
    Solve,
    SolveNonlinear,
    Study,
    Compare,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Nodes => Command::Nodes,
            Cmd::Quadtest => Command::Quadtest,
            Cmd::Solve => Command::Solve,
            Cmd::SolveNonlinear => Command::SolveNonlinear,
            Cmd::Study => Command::Study,
            Cmd::Compare => Command::Compare,
        }
    }
}

/// Meshless Nyström solvers for 2D Fredholm equations of the second kind.
///
/// All numeric settings live in the config file; the flags only pick the
/// command and the file. A `summary.json` from an earlier run is accepted
/// as a config and reproduces that run.
#[derive(Debug, Parser)]
#[command(name = "fredholm2d", version)]
struct Args {
    command: Cmd,
    /// TOML config with a section named after the command, or a summary.json.
    #[arg(long, short)]
    config: PathBuf,
}

fn run(args: &Args) -> Result<Vec<PathBuf>, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        path: args.config.display().to_string(),
        source,
    })?;
    let config = parse_config_for(&text, args.command.into())?;
    execute(&config)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
