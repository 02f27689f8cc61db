//! Sweep the client noise scale and score each federated run against a
//! centrally trained baseline. More noise, worse score.
//!
//! Run with `cargo run --release --example lambda_sweep`.

use fedsyn::experiment::{
    cmd_sweep_lambda, cmd_train_central, DatasetSpec, ExperimentConfig, PartitionSpec,
};

fn main() -> fedsyn::Result<()> {
    let dir = tempfile::tempdir().map_err(fedsyn::Error::Io)?;

    let mut config = ExperimentConfig::default();
    config.dataset = DatasetSpec::Ring {
        n: 3000,
        modes: 10,
        radius: 1.0,
        sigma: 0.05,
    };
    config.partition = PartitionSpec {
        groups: vec![vec![0, 1, 2], vec![3, 4, 5, 6], vec![7, 8, 9]],
        sizes: vec![900, 1200, 900],
    };
    config.seed = 3;
    config.out_dir = dir.path().to_path_buf();

    // baseline: central training with its own optimizer settings
    let mut central = config.clone();
    central.gan.hidden = 64;
    central.gan.lr = 0.005;
    central.gan.batch_size = 64;
    cmd_train_central(&central)?;

    // sweep: federated runs at increasing client noise
    config.gan.hidden = 64;
    config.gan.lr = 0.0005;
    config.gan.batch_size = 128;
    config.federation.rounds = 30;
    config.federation.local_epochs = 5;
    config.sweep.lambdas = vec![1e-4, 1e-2, 1e-1, 1.0];
    config.sweep.eval_samples = 2000;

    println!("{:>10}  {:>14}  {:>8}", "lambda", "frechet", "modes");
    for row in cmd_sweep_lambda(&config)? {
        println!(
            "{:>10e}  {:>14.4}  {:>5}/10",
            row.lambda, row.score, row.mode_coverage_count
        );
    }
    Ok(())
}
