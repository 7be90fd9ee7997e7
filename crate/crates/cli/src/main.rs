use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pulse_squeeze::commands::{cmd_modes, cmd_state, cmd_sweep};
use pulse_squeeze::config::ExperimentConfig;
use pulse_squeeze::error::{CliError, CliResult};
use pulse_squeeze::recipes;
use pulse_squeeze::verify::run_verify;

/// Environment variable holding the worker-thread count.
const THREADS_VAR: &str = "PULSE_SQUEEZE_THREADS";

#[derive(Parser)]
#[command(name = "pulse-squeeze", version, about = "Quantum pulses through parametric amplifiers: modes, states and sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Output temporal modes and their occupations
    Modes(RunArgs),
    /// Output quantum state in the dominant mode, its Wigner function and metrics
    State(RunArgs),
    /// Heatmaps over one or two swept parameters
    Sweep(RunArgs),
    /// Run the built-in invariant suite
    Verify {
        /// Perturb the OPO kernels so the symplectic check must fail
        #[arg(long)]
        corrupt_injection: bool,
    },
    /// List bundled recipes, or print one
    Recipes { name: Option<String> },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML)
    #[arg(long, conflicts_with = "recipe", required_unless_present = "recipe")]
    config: Option<PathBuf>,
    /// Bundled recipe name
    #[arg(long)]
    recipe: Option<String>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override a parameter, e.g. `--set device.pump.area=2.0`
    #[arg(long = "set", value_name = "PATH=VALUE")]
    overrides: Vec<String>,
}

impl RunArgs {
    fn load(&self) -> CliResult<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.recipe) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(name)) => recipes::recipe(name)?,
            (None, None) => return Err(CliError::Config("either --config or --recipe is required".into())),
        };
        for o in &self.overrides {
            cfg = cfg.with_override(o)?;
        }
        Ok(cfg)
    }
}

fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    if n == 0 {
        return Err(CliError::Config(format!("{THREADS_VAR} must be at least 1")));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    init_threads()?;
    let (args, f): (&RunArgs, fn(&ExperimentConfig, &std::path::Path, Option<&str>) -> CliResult<_>) = match &cli.command {
        Command::Modes(a) => (a, cmd_modes),
        Command::State(a) => (a, cmd_state),
        Command::Sweep(a) => (a, cmd_sweep),
        Command::Verify { corrupt_injection } => {
            let report = run_verify(*corrupt_injection);
            print!("{}", report.table());
            return match report.failures() {
                0 => Ok(()),
                n => Err(CliError::Verify(n)),
            };
        }
        Command::Recipes { name } => {
            match name {
                Some(n) => print!("{}", recipes::recipe_text(n)?),
                None => recipes::names().iter().for_each(|n| println!("{n}")),
            }
            return Ok(());
        }
    };
    let cfg = args.load()?;
    let manifest = f(&cfg, &args.out, args.recipe.as_deref())?;
    for file in &manifest.files {
        println!("{}", args.out.join(&file.name).display());
    }
    if !manifest.failures.is_empty() {
        eprintln!("{} sweep point(s) failed; details in manifest.json", manifest.failures.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
