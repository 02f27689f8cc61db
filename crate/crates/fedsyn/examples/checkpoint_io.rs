//! Checkpoint a model to the binary wire format, reload it, and export
//! samples from the reloaded generator.
//!
//! Run with `cargo run --release --example checkpoint_io`.

use fedsyn::experiment::{
    cmd_gen_samples, load_checkpoint, model_to_params, save_checkpoint, ExperimentConfig,
};
use fedsyn::gan::GanModel;
use fedsyn::rng::substream;

fn main() -> fedsyn::Result<()> {
    let dir = tempfile::tempdir().map_err(fedsyn::Error::Io)?;
    let path = dir.path().join("model.fsyn");

    let model = GanModel::desk_scale(8, 2, &mut substream(21, &[]));
    save_checkpoint(&path, &model)?;
    println!(
        "wrote {} ({} bytes, digest {:016x})",
        path.display(),
        std::fs::read(&path)?.len(),
        model_to_params(&model).digest()
    );

    let loaded = load_checkpoint(&path)?;
    println!(
        "reloaded: latent_dim={}, data_dim={}, digest {:016x}",
        loaded.latent_dim,
        loaded.data_dim(),
        model_to_params(&loaded).digest()
    );

    let mut config = ExperimentConfig::default();
    config.seed = 21;
    config.out_dir = dir.path().to_path_buf();
    let export = cmd_gen_samples(&config, &path, 10)?;
    println!("sample export:\n{}", std::fs::read_to_string(export)?);
    Ok(())
}
