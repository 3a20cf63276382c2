use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sprice_cli::commands::{ALLOCATION_FILE, PRICES_FILE};
use sprice_cli::config::Mode;
use sprice_cli::{resolve_out_dir, run_refinement_study, run_solve, run_verify, CliError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "sprice", version, about = "Equilibrium state prices on event trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for an equilibrium and write prices, allocation and summary.
    Solve(Common),
    /// Continuity modulus of a price across refined grids.
    Refine {
        #[command(flatten)]
        common: Common,
        /// Comma-separated step counts, e.g. 8,16,32,64.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
    },
    /// Re-check previously written tables against the scenario.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Defaults to prices.csv in the output directory.
        #[arg(long)]
        prices: Option<PathBuf>,
        /// Defaults to allocation.csv in the output directory.
        #[arg(long)]
        allocation: Option<PathBuf>,
    },
    /// Dispatch on the scenario's `mode` key.
    Run(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<(ScenarioConfig, PathBuf), CliError> {
        let mut cfg = ScenarioConfig::load(&self.config)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        let out = resolve_out_dir(self.out.as_deref(), &cfg);
        Ok((cfg, out))
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let (mode, common, levels, prices, allocation) = match cli.command {
        Command::Solve(c) => (Some(Mode::Solve), c, None, None, None),
        Command::Refine { common, levels } => (Some(Mode::Refine), common, levels, None, None),
        Command::Verify {
            common,
            prices,
            allocation,
        } => (Some(Mode::Verify), common, None, prices, allocation),
        Command::Run(c) => (None, c, None, None, None),
    };
    let (cfg, out) = common.load()?;
    let outcome = match mode.unwrap_or(cfg.mode) {
        Mode::Solve => run_solve(&cfg, &out)?,
        Mode::Refine => run_refinement_study(&cfg, levels.as_deref(), &out)?.0,
        Mode::Verify => {
            let p = prices.unwrap_or_else(|| out.join(PRICES_FILE));
            let a = allocation.unwrap_or_else(|| out.join(ALLOCATION_FILE));
            run_verify(&cfg, &p, &a)?
        }
    };
    println!("{}", outcome.message);
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
