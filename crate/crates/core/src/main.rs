use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vsplit_core::harness::{parse_policy, prepare, prepare_preset, run, Command, Overrides};
use vsplit_core::Result;

/// Offline planner for baseband split placement in solar-powered small
/// cells. Verbosity follows the `VSPLIT_LOG` variable (error, warn, info,
/// debug, trace).
#[derive(Parser)]
#[command(name = "vsplit", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Optimal schedule over the horizon.
    Solve(Common),
    /// One static split policy.
    Policy {
        #[command(flatten)]
        common: Common,
        /// CRAN, UpperLower or MACPHY.
        #[arg(long, default_value = "CRAN")]
        policy: String,
    },
    /// Optimum against every static policy.
    Compare(Common),
    /// Write the scenario's energy and demand traces.
    GenTraces(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Bundled scenario: residential_jan, residential_jul, office_jan, office_jul.
    #[arg(long)]
    preset: Option<String>,
    /// Run directory.
    #[arg(long)]
    out: PathBuf,
    /// Trace CSV replacing the generated traces.
    #[arg(long)]
    traces: Option<PathBuf>,
    /// Use the literal single-label search.
    #[arg(long)]
    fidelity_mode: bool,
    /// Seed for trace jitter.
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(cli: Cli) -> Result<()> {
    let (command, common) = match cli.command {
        Sub::Solve(c) => (Command::Solve, c),
        Sub::Policy { common, policy } => (Command::Policy(parse_policy(&policy)?), common),
        Sub::Compare(c) => (Command::Compare, c),
        Sub::GenTraces(c) => (Command::GenTraces, c),
    };
    let overrides = Overrides {
        traces: common.traces,
        seed: common.seed,
        fidelity_mode: common.fidelity_mode,
    };
    let scenario = match (&common.config, &common.preset) {
        (Some(path), _) => prepare(path, &overrides)?,
        (None, Some(name)) => prepare_preset(name, &overrides)?,
        (None, None) => unreachable!("clap requires one of --config and --preset"),
    };
    let out = run(command, &scenario, &common.out)?;
    print!("{}", out.table);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("VSPLIT_LOG", "warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vsplit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
