use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fedsyn::experiment::{
    cmd_gen_samples, cmd_sweep_lambda, cmd_train_central, cmd_train_federated, ExperimentConfig,
};

/// Federated GAN experiment harness.
#[derive(Parser)]
#[command(name = "fedsyn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config file value.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config file value.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train the central baseline GAN on the full dataset.
    TrainCentral(Common),
    /// Run the federated protocol over non-IID shards.
    TrainFederated(Common),
    /// Sweep the client noise scale and score each run against the baseline.
    SweepLambda(Common),
    /// Generate samples from a checkpointed generator.
    GenSamples {
        #[command(flatten)]
        common: Common,
        /// Checkpoint file (.fsyn).
        #[arg(long)]
        checkpoint: PathBuf,
        /// Number of samples to generate.
        #[arg(long, default_value_t = 2000)]
        count: usize,
    },
}

fn resolve(common: &Common) -> fedsyn::Result<ExperimentConfig> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.out_dir = out.clone();
    }
    if config.out_dir.as_os_str().is_empty() {
        config.out_dir = PathBuf::from("out");
    }
    Ok(config)
}

fn run(cli: Cli) -> fedsyn::Result<()> {
    match cli.command {
        Command::TrainCentral(common) => {
            cmd_train_central(&resolve(&common)?)?;
        }
        Command::TrainFederated(common) => {
            cmd_train_federated(&resolve(&common)?)?;
        }
        Command::SweepLambda(common) => {
            cmd_sweep_lambda(&resolve(&common)?)?;
        }
        Command::GenSamples {
            common,
            checkpoint,
            count,
        } => {
            cmd_gen_samples(&resolve(&common)?, &checkpoint, count)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FEDSYN_LOG", "info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
