use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mtmc_cli::commands::{self, CommandOutcome, Overrides};
use mtmc_cli::config::ScenarioFile;
use mtmc_cli::error::CliError;

/// Reproducible sampling experiments: Metropolis baseline, moving-target
/// sampler, closed-form spectral analysis, and coupling certificates.
#[derive(Debug, Parser)]
#[command(name = "mtmc", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the configured sampler; write trace, diagnostics, and a summary.
    Run(CommonArgs),
    /// Run both samplers on the same seed and compare evaluation budgets.
    Compare(CommonArgs),
    /// Exact eigenvalue analysis of the finite independence chain.
    Spectrum(CommonArgs),
    /// Doeblin minorisation certificate and coupled-chain ensemble.
    Couple(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Scenario file to execute.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Replace the scenario's random seed.
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    /// Write outputs here instead of the scenario's output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Suppress the console summary; errors still print to stderr.
    #[arg(long)]
    quiet: bool,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            out: self.out.clone(),
            quiet: self.quiet,
        }
    }
}

fn dispatch(command: &Command) -> Result<CommandOutcome, CliError> {
    let (args, runner): (&CommonArgs, fn(&ScenarioFile, &Overrides) -> _) = match command {
        Command::Run(args) => (args, commands::run as _),
        Command::Compare(args) => (args, commands::compare as _),
        Command::Spectrum(args) => (args, commands::spectrum as _),
        Command::Couple(args) => (args, commands::couple as _),
    };
    let file = ScenarioFile::load(&args.config)?;
    runner(&file, &args.overrides())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = match &cli.command {
        Command::Run(args) | Command::Compare(args) | Command::Spectrum(args)
        | Command::Couple(args) => args.quiet,
    };
    match dispatch(&cli.command) {
        Ok(outcome) => {
            if !quiet {
                println!("scenario: {}", outcome.scenario);
                for note in &outcome.notes {
                    println!("{note}");
                }
                for file in &outcome.files {
                    println!("wrote {}", file.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(error.exit_code())
        }
    }
}
