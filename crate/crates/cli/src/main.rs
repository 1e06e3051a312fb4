//! Command-line front end: parse scenario files, run experiments, and write
//! deterministic tables for downstream plotting.
//!
//! Exit codes: 0 success, 2 usage error (clap), 3 config file not found,
//! 4 config parse error, 5 config/parameter validation error, 6 scenario
//! execution error, 7 output write error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use specshare::allocator::{optimize_partition, AllocationProblem};
use specshare::config::{parse_config, ConfigError};
use specshare::harness::{run_scenario, ScenarioConfig};
use specshare::output::{write_results, OutputFormat};

#[derive(Parser)]
#[command(
    name = "specshare",
    version,
    about = "Partition a shared resource pool between two networks from demand statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file and write result tables.
    Run {
        /// Scenario config file (TOML; see the repository README for the grammar).
        #[arg(long)]
        config: PathBuf,
        /// Directory for the result tables.
        #[arg(long, default_value = "out")]
        output_dir: PathBuf,
        /// Override the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Table file format.
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
    /// Run the canonical reference experiment (pools 20/60/100, 1000x1000,
    /// mean- and maxima-based modes at the lower 95 % CI bound).
    Reproduce {
        /// Directory for the result tables.
        #[arg(long, default_value = "out")]
        output_dir: PathBuf,
        /// Override the documented default seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Table file format.
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
    /// Parse and validate a config file without running anything.
    ValidateConfig {
        /// Scenario config file to check.
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve one partition instance from flags and print "n_a n_b objective".
    SweepSingle {
        /// Resource pool size.
        #[arg(long)]
        pool: u32,
        /// Weighting factor in [0, 1].
        #[arg(long)]
        gamma: f64,
        /// Demand statistic for network A.
        #[arg(long)]
        x_a: f64,
        /// Demand statistic for network B.
        #[arg(long)]
        x_b: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(arg: FormatArg) -> Self {
        match arg {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

enum CliError {
    Config(ConfigError),
    Validation(String),
    Scenario(String),
    Output(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(ConfigError::FileNotFound(_)) => 3,
            CliError::Config(ConfigError::Io { .. }) => 3,
            CliError::Config(ConfigError::Parse(_)) => 4,
            CliError::Config(ConfigError::Validation(_)) | CliError::Validation(_) => 5,
            CliError::Scenario(_) => 6,
            CliError::Output(_) => 7,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(e) => e.to_string(),
            CliError::Validation(msg) => msg.clone(),
            CliError::Scenario(msg) => msg.clone(),
            CliError::Output(msg) => msg.clone(),
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            output_dir,
            seed,
            format,
        } => {
            let mut scenario = parse_config(&config).map_err(CliError::Config)?;
            if let Some(seed) = seed {
                scenario.base_seed = seed;
            }
            execute(&scenario, &output_dir, format)
        }
        Command::Reproduce {
            output_dir,
            seed,
            format,
        } => {
            let mut scenario = ScenarioConfig::reference();
            if let Some(seed) = seed {
                scenario.base_seed = seed;
            }
            execute(&scenario, &output_dir, format)
        }
        Command::ValidateConfig { config } => {
            let scenario = parse_config(&config).map_err(CliError::Config)?;
            println!("ok: scenario {:?} is valid", scenario.name);
            Ok(())
        }
        Command::SweepSingle {
            pool,
            gamma,
            x_a,
            x_b,
        } => {
            let problem = AllocationProblem::new(pool, gamma, x_a, x_b)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let alloc = optimize_partition(&problem);
            println!("{} {} {}", alloc.n_a, alloc.n_b, alloc.objective);
            Ok(())
        }
    }
}

fn execute(
    scenario: &ScenarioConfig,
    output_dir: &std::path::Path,
    format: FormatArg,
) -> Result<(), CliError> {
    let result = run_scenario(scenario).map_err(|e| CliError::Scenario(e.to_string()))?;
    let written = write_results(&result, output_dir, format.into())
        .map_err(|e| CliError::Output(e.to_string()))?;
    for path in &written {
        println!("{}", path.display());
    }
    Ok(())
}
