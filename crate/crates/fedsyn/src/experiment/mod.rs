//! Experiment harness: the central baseline, the federated run, the lambda
//! sweep and sample export, all reproducible from (config, seed).
//!
//! Every output file is written atomically (temp file + rename) and starts
//! with the schema version line `# fedsyn-csv v1` where it is a CSV.

pub mod config;

pub use config::{DatasetSpec, ExperimentConfig, FederationSpec, GanSpec, PartitionSpec, SweepSpec};

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::data::{generate_ring, load_idx, ring_centers, LabeledDataset};
use crate::error::{Error, Result};
use crate::federation::{
    deserialize_params, partition_non_iid, run_federation, serialize_params, ClientDescriptor,
    FederationConfig, FederationHistory, Shard,
};
use crate::gan::{generate, sample_latent, train_local, GanModel, TrainReport};
use crate::metrics::{fit_gaussian, frechet_distance, mode_coverage, COVERAGE_SIGMA_FACTOR};
use crate::nn::{ParamEntry, ParamSet};
use crate::privacy::LaplaceSpec;
use crate::rng::substream;

pub const CSV_SCHEMA: &str = "# fedsyn-csv v1";

// Substream domain tags for the harness (federation uses 1..3).
const TAG_DATA: u64 = 10;
const TAG_PARTITION: u64 = 11;
const TAG_INIT: u64 = 12;
const TAG_CENTRAL: u64 = 13;
const TAG_EVAL_FAKE: u64 = 14;
const TAG_EVAL_BASE: u64 = 15;
const TAG_EXPORT: u64 = 16;

/// Materialize the configured dataset.
pub fn build_dataset(config: &ExperimentConfig) -> Result<LabeledDataset> {
    match &config.dataset {
        DatasetSpec::Ring {
            n,
            modes,
            radius,
            sigma,
        } => generate_ring(
            &mut substream(config.seed, &[TAG_DATA]),
            *n,
            *modes,
            *radius,
            *sigma,
        ),
        DatasetSpec::Idx { images, labels } => load_idx(images, labels),
    }
}

/// Merge a GAN model into one parameter set with `gen.` / `disc.` prefixes.
pub fn model_to_params(model: &GanModel) -> ParamSet {
    let mut merged = ParamSet::new();
    for (prefix, params) in [("gen", &model.gen_params), ("disc", &model.disc_params)] {
        for entry in params.entries() {
            merged
                .push(
                    ParamEntry::new(
                        format!("{prefix}.{}", entry.name),
                        entry.shape.clone(),
                        entry.values.clone(),
                    )
                    .unwrap(),
                )
                .unwrap();
        }
    }
    merged
}

/// Rebuild a GAN model from a merged parameter set; architecture dimensions
/// are recovered from the entry shapes.
pub fn model_from_params(merged: &ParamSet) -> Result<GanModel> {
    let mut gen = ParamSet::new();
    let mut disc = ParamSet::new();
    for entry in merged.entries() {
        let (target, name) = if let Some(rest) = entry.name.strip_prefix("gen.") {
            (&mut gen, rest)
        } else if let Some(rest) = entry.name.strip_prefix("disc.") {
            (&mut disc, rest)
        } else {
            return Err(Error::Format {
                offset: 0,
                message: format!("entry '{}' has no gen./disc. prefix", entry.name),
            });
        };
        target.push(ParamEntry::new(name, entry.shape.clone(), entry.values.clone())?)?;
    }
    let gen_w0 = gen
        .get("dense0.w")
        .ok_or_else(|| Error::Format {
            offset: 0,
            message: "checkpoint lacks gen.dense0.w".into(),
        })?;
    let latent_dim = gen_w0.shape[0];
    let hidden = gen_w0.shape[1];
    let gen_w1 = gen.get("dense1.w").ok_or_else(|| Error::Format {
        offset: 0,
        message: "checkpoint lacks gen.dense1.w".into(),
    })?;
    let data_dim = gen_w1.shape[1];
    let mut model = GanModel::desk_scale_hidden(latent_dim, data_dim, hidden, &mut substream(0, &[]));
    model.gen_arch.check_params(&gen)?;
    model.disc_arch.check_params(&disc)?;
    model.gen_params = gen;
    model.disc_params = disc;
    Ok(model)
}

/// Write bytes atomically: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path)
        .map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn save_checkpoint(path: &Path, model: &GanModel) -> Result<()> {
    write_atomic(path, &serialize_params(&model_to_params(model))?)
}

pub fn load_checkpoint(path: &Path) -> Result<GanModel> {
    let bytes = fs::read(path)
        .map_err(|e| Error::Config(format!("cannot read checkpoint {}: {e}", path.display())))?;
    model_from_params(&deserialize_params(&bytes)?)
}

fn report_csv(reports: &[(String, &TrainReport)]) -> String {
    let mut out = format!("{CSV_SCHEMA}\nclient,epoch,real_acc,fake_acc,disc_loss,gen_loss\n");
    for (client, report) in reports {
        for c in &report.checkpoints {
            out.push_str(&format!(
                "{client},{},{},{},{},{}\n",
                c.epoch, c.real_acc, c.fake_acc, c.disc_loss, c.gen_loss
            ));
        }
    }
    out
}

fn whole_dataset_shard(dataset: &LabeledDataset) -> Shard {
    Shard {
        samples: dataset.samples.clone(),
        labels: dataset.labels.clone(),
        weight: 1.0,
    }
}

/// Train the central baseline GAN on the unpartitioned dataset.
///
/// Writes `central.fsyn` and `central_accuracy.csv` to the output directory.
pub fn cmd_train_central(config: &ExperimentConfig) -> Result<GanModel> {
    config.validate()?;
    let dataset = build_dataset(config)?;
    log::info!(
        "central training: {} samples, {} epochs",
        dataset.len(),
        config.gan.epochs
    );
    let mut rng = substream(config.seed, &[TAG_CENTRAL]);
    let model = GanModel::desk_scale_hidden(
        config.gan.latent_dim,
        dataset.feature_dim(),
        config.gan.hidden,
        &mut rng,
    );
    let shard = whole_dataset_shard(&dataset);
    let (trained, report) = train_local(
        &model,
        &shard,
        config.gan.epochs,
        config.gan.batch_size,
        config.gan.adam(),
        &mut rng,
    )?;
    save_checkpoint(&config.out_dir.join("central.fsyn"), &trained)?;
    write_atomic(
        &config.out_dir.join("central_accuracy.csv"),
        report_csv(&[("central".to_string(), &report)]).as_bytes(),
    )?;
    Ok(trained)
}

/// Partition the dataset and run the federated protocol.
pub fn run_federated_pipeline(
    config: &ExperimentConfig,
) -> Result<(GanModel, FederationHistory, Vec<Shard>)> {
    let dataset = build_dataset(config)?;
    let shards = partition_non_iid(
        &dataset,
        &config.partition.groups,
        &config.partition.sizes,
        &mut substream(config.seed, &[TAG_PARTITION]),
    )?;
    let initial = GanModel::desk_scale_hidden(
        config.gan.latent_dim,
        dataset.feature_dim(),
        config.gan.hidden,
        &mut substream(config.seed, &[TAG_INIT]),
    );
    let fed_config = FederationConfig {
        rounds: config.federation.rounds,
        local_epochs: config.federation.local_epochs,
        batch_size: config.gan.batch_size,
        opt: config.gan.adam(),
        client_noise: LaplaceSpec::new(0.0, config.federation.client_lambda)?,
        server_noise: LaplaceSpec::new(0.0, config.federation.server_lambda)?,
        perturb_discriminator: config.federation.perturb_discriminator,
        master_seed: config.seed,
        clients: (0..shards.len())
            .map(|i| {
                let id = format!("client-{i}");
                ClientDescriptor {
                    fail: config.federation.fail_clients.contains(&id),
                    id,
                }
            })
            .collect(),
    };
    let (global, history) = run_federation(&fed_config, &shards, &initial)?;
    Ok((global, history, shards))
}

/// Run the federated protocol and write `global.fsyn`, the per-client
/// training history and the aggregation log.
pub fn cmd_train_federated(config: &ExperimentConfig) -> Result<GanModel> {
    config.validate()?;
    log::info!(
        "federated training: {} rounds x {} local epochs, client lambda {}",
        config.federation.rounds,
        config.federation.local_epochs,
        config.federation.client_lambda
    );
    let (global, history, _) = run_federated_pipeline(config)?;
    save_checkpoint(&config.out_dir.join("global.fsyn"), &global)?;

    let mut rows: Vec<(String, &TrainReport)> = Vec::new();
    for record in &history.rounds {
        for (id, report) in record.client_ids.iter().zip(&record.reports) {
            rows.push((format!("round{}-{id}", record.round), report));
        }
    }
    write_atomic(
        &config.out_dir.join("federated_history.csv"),
        report_csv(&rows).as_bytes(),
    )?;

    let mut log_csv = format!(
        "{CSV_SCHEMA}\nround,client,weight,client_lambda,server_lambda,gen_digest,disc_digest\n"
    );
    for record in &history.rounds {
        for (id, w) in record.client_ids.iter().zip(&record.weights) {
            log_csv.push_str(&format!(
                "{},{id},{w},{},{},{:016x},{:016x}\n",
                record.round,
                config.federation.client_lambda,
                config.federation.server_lambda,
                record.gen_digest,
                record.disc_digest
            ));
        }
    }
    write_atomic(&config.out_dir.join("aggregation_log.csv"), log_csv.as_bytes())?;
    Ok(global)
}

fn dataset_centers(config: &ExperimentConfig) -> Option<(Vec<[f64; 2]>, f64)> {
    match &config.dataset {
        DatasetSpec::Ring {
            modes,
            radius,
            sigma,
            ..
        } => Some((
            ring_centers(*modes, *radius),
            COVERAGE_SIGMA_FACTOR * sigma,
        )),
        DatasetSpec::Idx { .. } => None,
    }
}

fn samples_csv(samples: &Array2<f64>, centers: Option<&[[f64; 2]]>) -> String {
    let mut out = String::from(CSV_SCHEMA);
    out.push('\n');
    if let Some(centers) = centers {
        out.push_str("x,y,nearest_mode\n");
        for row in samples.rows() {
            let (x, y) = (row[0], row[1]);
            let nearest = centers
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    let da = (x - a[0]).powi(2) + (y - a[1]).powi(2);
                    let db = (x - b[0]).powi(2) + (y - b[1]).powi(2);
                    da.partial_cmp(&db).unwrap()
                })
                .map(|(i, _)| i)
                .unwrap();
            out.push_str(&format!("{x},{y},{nearest}\n"));
        }
    } else {
        let d = samples.ncols();
        let header: Vec<String> = (0..d).map(|i| format!("f{i}")).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in samples.rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
    }
    out
}

/// Binary PGM (P5) grid of up to 25 samples interpreted as square images.
fn samples_pgm(samples: &Array2<f64>) -> Result<Vec<u8>> {
    let dim = samples.ncols();
    let side = (dim as f64).sqrt().round() as usize;
    if side * side != dim {
        return Err(Error::Config(format!(
            "feature dimension {dim} is not a square image"
        )));
    }
    let count = samples.nrows().min(25);
    let cols = 5usize.min(count.max(1));
    let rows = count.div_ceil(cols).max(1);
    let (w, h) = (cols * side, rows * side);
    let mut pixels = vec![0u8; w * h];
    for idx in 0..count {
        let (gr, gc) = (idx / cols, idx % cols);
        for py in 0..side {
            for px in 0..side {
                let v = samples[[idx, py * side + px]].clamp(0.0, 1.0);
                pixels[(gr * side + py) * w + gc * side + px] = (v * 255.0).round() as u8;
            }
        }
    }
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend_from_slice(&pixels);
    Ok(out)
}

/// Generate samples from a checkpointed generator and export them: CSV of
/// (x, y, nearest_mode) for ring data, PGM image grid for image data.
pub fn cmd_gen_samples(
    config: &ExperimentConfig,
    checkpoint: &Path,
    count: usize,
) -> Result<PathBuf> {
    config.validate()?;
    let model = load_checkpoint(checkpoint)?;
    let latents = sample_latent(
        &mut substream(config.seed, &[TAG_EXPORT]),
        count.max(1),
        model.latent_dim,
    );
    let samples = if count == 0 {
        Array2::zeros((0, model.data_dim()))
    } else {
        generate(&model, &latents)?
    };
    let centers = dataset_centers(config);
    let path = match &config.dataset {
        DatasetSpec::Ring { .. } => {
            let path = config.out_dir.join("samples.csv");
            write_atomic(
                &path,
                samples_csv(&samples, centers.as_ref().map(|(c, _)| c.as_slice())).as_bytes(),
            )?;
            path
        }
        DatasetSpec::Idx { .. } => {
            let path = config.out_dir.join("samples.pgm");
            write_atomic(&path, &samples_pgm(&samples)?)?;
            path
        }
    };
    Ok(path)
}

/// One row of the lambda sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub lambda: f64,
    pub score: f64,
    pub n_real: usize,
    pub n_fake: usize,
    pub mode_coverage_count: usize,
}

/// Run the federated pipeline once per sweep lambda and score each global
/// generator against the central baseline with the Fréchet distance.
///
/// Requires `central.fsyn` in the output directory (run `train-central`
/// first). Writes `sweep.csv` plus one sample export per lambda.
pub fn cmd_sweep_lambda(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let baseline_path = config.out_dir.join("central.fsyn");
    if !baseline_path.exists() {
        return Err(Error::Config(format!(
            "missing baseline checkpoint {} (run train-central first)",
            baseline_path.display()
        )));
    }
    let baseline = load_checkpoint(&baseline_path)?;
    let n = config.sweep.eval_samples;
    let base_latents = sample_latent(
        &mut substream(config.seed, &[TAG_EVAL_BASE]),
        n,
        baseline.latent_dim,
    );
    let base_samples = generate(&baseline, &base_latents)?;
    let base_moments = fit_gaussian(&base_samples)?;
    let centers = dataset_centers(config);

    let mut rows = Vec::new();
    for (idx, &lambda) in config.sweep.lambdas.iter().enumerate() {
        let mut run_config = config.clone();
        run_config.federation.client_lambda = lambda;
        log::info!("sweep lambda {lambda}");
        let (global, _, _) = run_federated_pipeline(&run_config)?;
        let latents = sample_latent(
            &mut substream(config.seed, &[TAG_EVAL_FAKE, idx as u64]),
            n,
            global.latent_dim,
        );
        let fake = generate(&global, &latents)?;
        let score = frechet_distance(&base_moments, &fit_gaussian(&fake)?)?;
        let coverage = match &centers {
            Some((centers, threshold)) => mode_coverage(&fake, centers, *threshold)?.0.len(),
            None => 0,
        };
        let export = config.out_dir.join(format!("samples_lambda_{lambda:e}.csv"));
        write_atomic(
            &export,
            samples_csv(&fake, centers.as_ref().map(|(c, _)| c.as_slice())).as_bytes(),
        )?;
        rows.push(SweepRow {
            lambda,
            score,
            n_real: n,
            n_fake: n,
            mode_coverage_count: coverage,
        });
    }

    let mut csv = format!("{CSV_SCHEMA}\nlambda,score,n_real,n_fake,mode_coverage_count\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            row.lambda, row.score, row.n_real, row.n_fake, row.mode_coverage_count
        ));
    }
    write_atomic(&config.out_dir.join("sweep.csv"), csv.as_bytes())?;
    Ok(rows)
}
