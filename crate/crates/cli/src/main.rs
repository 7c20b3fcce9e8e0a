use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use island_cli::{cmd_report, cmd_simulate, cmd_sweep, CliError, SimulateArgs, SweepArgs, SweepParam};

#[derive(Parser, Debug)]
#[command(version, about = "Edge redundancy simulator for a 5G island")]
struct Cli {
    /// Suppress summaries and progress output
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ParamArg {
    CmMultiplier,
    Density,
    LambdaDown,
}

impl From<ParamArg> for SweepParam {
    fn from(p: ParamArg) -> Self {
        match p {
            ParamArg::CmMultiplier => SweepParam::CmMultiplier,
            ParamArg::Density => SweepParam::Density,
            ParamArg::LambdaDown => SweepParam::LambdaDown,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario and write period/day CSVs plus a manifest
    Simulate {
        /// Scenario TOML; the bundled reference scenario when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the configured seed
        #[arg(long)]
        seed: Option<u64>,
        /// Run several seeds, e.g. `1,2,3` or `1-10`
        #[arg(long, value_parser = parse_seeds)]
        seeds: Option<Seeds>,
        #[arg(long)]
        out: PathBuf,
        /// Also write per-tick UE and VNF traces
        #[arg(long)]
        trace: bool,
    },
    /// Run a scenario across values of one parameter and seeds
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        param: ParamArg,
        /// Comma-separated parameter values
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, value_parser = parse_seeds)]
        seeds: Option<Seeds>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify an output directory and summarize it
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone)]
struct Seeds(Vec<u64>);

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    let mut seeds = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|e| format!("{part}: {e}"))?;
                let b: u64 = b.trim().parse().map_err(|e| format!("{part}: {e}"))?;
                if a > b {
                    return Err(format!("{part}: empty range"));
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().map_err(|e| format!("{part}: {e}"))?),
        }
    }
    if seeds.is_empty() {
        return Err("no seeds given".into());
    }
    Ok(Seeds(seeds))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Command::Simulate {
            config,
            seed,
            seeds,
            out,
            trace,
        } => {
            cmd_simulate(&SimulateArgs {
                config,
                seed,
                seeds: seeds.map(|s| s.0).unwrap_or_default(),
                out,
                trace,
                quiet: cli.quiet,
            })?;
        }
        Command::Sweep {
            config,
            param,
            values,
            seeds,
            out,
        } => {
            cmd_sweep(&SweepArgs {
                config,
                param: param.into(),
                values,
                seeds: seeds.map(|s| s.0).unwrap_or_default(),
                out,
                quiet: cli.quiet,
            })?;
        }
        Command::Report { out } => {
            cmd_report(&out, cli.quiet)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
