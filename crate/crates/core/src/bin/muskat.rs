use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use muskat::experiment::{
    cmd_ck_compare, cmd_evolve, cmd_lp_check, cmd_sweep, cmd_verify_identities, cmd_verify_symbols, Exit,
    ExperimentConfig, Outcome, Overrides,
};
use muskat::Result;

#[derive(Parser)]
#[command(name = "muskat", version, about = "Asymptotic Muskat models on the torus: simulation and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time-step the configured data and run the trajectory monitors.
    Evolve(Common),
    /// Compare the power-series solution with the time stepper.
    CkCompare(Common),
    /// Exhaustive check of the nonlinear symbol inequalities.
    VerifySymbols(Common),
    /// Cross-check the independent evaluation paths on seeded random data.
    VerifyIdentities(Common),
    /// Littlewood-Paley identities and measured constants.
    LpCheck(Common),
    /// Grid of (amplitude scale, nu) runs.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    kmax: Option<i64>,
    #[arg(long)]
    trials: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        cfg.apply(&Overrides {
            seed: self.seed,
            out: self.out.clone(),
            kmax: self.kmax,
            trials: self.trials,
        });
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let (common, cmd): (&Common, fn(&ExperimentConfig) -> Result<Outcome>) = match &cli.command {
        Command::Evolve(c) => (c, cmd_evolve),
        Command::CkCompare(c) => (c, cmd_ck_compare),
        Command::VerifySymbols(c) => (c, cmd_verify_symbols),
        Command::VerifyIdentities(c) => (c, cmd_verify_identities),
        Command::LpCheck(c) => (c, cmd_lp_check),
        Command::Sweep(c) => (c, cmd_sweep),
    };
    cmd(&common.load()?)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{}", out.summary);
            ExitCode::from(out.exit.code() as u8)
        }
        Err(e) => {
            eprintln!("muskat: {e}");
            ExitCode::from(Exit::ConfigError.code() as u8)
        }
    }
}
