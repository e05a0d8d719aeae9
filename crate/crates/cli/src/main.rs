use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rflbat_cli::{
    compare, init_workers, parse_config, preset, replay, run, to_toml, CliError, RunOptions, SweepAxis, PRESETS,
};
use rflbat_core::simulator::ScenarioConfig;

#[derive(Parser)]
#[command(name = "rflbat", version, about = "Federated backdoor-defense simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Scenario file (TOML).
    #[arg(conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Named scenario; see `rflbat presets`.
    #[arg(long)]
    preset: Option<String>,
    /// Attacker scale factor λ for presets.
    #[arg(long, requires = "preset")]
    scale: Option<f64>,
    /// Directory holding MNIST IDX files, used by presets instead of synthetic data.
    #[arg(long, requires = "preset")]
    mnist_dir: Option<PathBuf>,
}

#[derive(Args)]
struct Overrides {
    /// Write per-round PCA projections (RFLBAT only).
    #[arg(long)]
    dump_projections: bool,
    /// Seed base s; seeds become data=s, attack=s+1, train=s+2.
    #[arg(long)]
    seed_override: Option<u64>,
    #[arg(long)]
    rounds_override: Option<usize>,
}

impl Overrides {
    fn options(&self) -> RunOptions {
        RunOptions {
            dump_projections: self.dump_projections,
            seed_override: self.seed_override,
            rounds_override: self.rounds_override,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its manifest, metrics CSV and dumps.
    Run {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Re-run a manifest written by `run`.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run several scenarios and tabulate their final metrics.
    Compare {
        /// Scenario files.
        configs: Vec<PathBuf>,
        /// Presets to add to the sweep.
        #[arg(long = "preset")]
        presets: Vec<String>,
        /// Field allowed to differ besides the aggregator: none, alpha,
        /// n_clients, attacker_fraction or scale_factor.
        #[arg(long, default_value = "none")]
        axis: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print a scenario with every default resolved.
    Show {
        #[command(flatten)]
        source: Source,
    },
    /// List preset names.
    Presets,
}

fn resolve(source: &Source) -> Result<ScenarioConfig, CliError> {
    match (&source.config, &source.preset) {
        (Some(path), _) => parse_config(path),
        (None, Some(name)) => preset(name, source.scale, source.mnist_dir.as_deref()),
        (None, None) => unreachable!("clap requires a config or a preset"),
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    init_workers()?;
    match command {
        Command::Run { source, out, overrides } => {
            let summary = run(resolve(&source)?, &out, &overrides.options())?;
            println!("{}", summary.summary_line());
        }
        Command::Replay { manifest, out } => {
            let summary = replay(&manifest, &out)?;
            println!("{}", summary.summary_line());
        }
        Command::Compare {
            configs,
            presets,
            axis,
            out,
            overrides,
        } => {
            let axis: SweepAxis = axis.parse()?;
            let mut all = configs.iter().map(|p| parse_config(p)).collect::<Result<Vec<_>, _>>()?;
            for name in &presets {
                all.push(preset(name, None, None::<&Path>)?);
            }
            print!("{}", compare(&all, axis, &out, &overrides.options())?);
        }
        Command::Show { source } => print!("{}", to_toml(&resolve(&source)?)),
        Command::Presets => PRESETS.iter().for_each(|p| println!("{p}")),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
