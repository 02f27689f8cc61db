//! The federated protocol: non-IID partitioning, concurrent local training,
//! client-side noise, and noisy weighted averaging over a star topology.
//!
//! The transport is in-process, but every upload crosses the wire format in
//! [`wire`], so a socket transport could replace it without touching the
//! protocol. Aggregation lives in [`server`], which never sees a [`Shard`].

pub mod server;
pub mod wire;

pub use server::{aggregate, weighted_average, ClientUpdate};
pub use wire::{deserialize_params, serialize_params, CHECKPOINT_EXT};

use std::collections::BTreeSet;
use std::thread;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::gan::{train_local, GanModel, TrainReport};
use crate::nn::AdamHyper;
use crate::privacy::{perturb, LaplaceSpec};
use crate::rng::substream;

// Substream domain tags; keep client training, client noise and server noise
// on disjoint streams.
const TAG_TRAIN: u64 = 1;
const TAG_CLIENT_NOISE: u64 = 2;
const TAG_SERVER_NOISE: u64 = 3;

/// One client's labeled training subset with its importance weight.
#[derive(Debug, Clone)]
pub struct Shard {
    pub samples: Array2<f64>,
    pub labels: Vec<u32>,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct ClientDescriptor {
    pub id: String,
    /// Simulated failure: the client aborts instead of training.
    pub fail: bool,
}

impl ClientDescriptor {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            fail: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FederationConfig {
    pub rounds: u64,
    pub local_epochs: usize,
    pub batch_size: usize,
    pub opt: AdamHyper,
    pub client_noise: LaplaceSpec,
    pub server_noise: LaplaceSpec,
    /// Whether discriminator uploads are also perturbed (generator always is).
    pub perturb_discriminator: bool,
    pub master_seed: u64,
    pub clients: Vec<ClientDescriptor>,
}

/// What one federated round produced.
#[derive(Debug, Clone)]
pub struct RoundRecord {
    pub round: u64,
    pub client_ids: Vec<String>,
    pub weights: Vec<f64>,
    pub reports: Vec<TrainReport>,
    pub gen_digest: u64,
    pub disc_digest: u64,
}

#[derive(Debug, Clone, Default)]
pub struct FederationHistory {
    pub rounds: Vec<RoundRecord>,
}

/// Split a dataset into label-disjoint shards.
///
/// Shard `i` gets exactly `sizes[i]` rows drawn without replacement from the
/// samples whose label is in `groups[i]`; shard weights are the sizes
/// normalized to sum 1.
pub fn partition_non_iid(
    dataset: &LabeledDataset,
    groups: &[Vec<u32>],
    sizes: &[usize],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Shard>> {
    if groups.len() != sizes.len() || groups.is_empty() {
        return Err(Error::Config(
            "groups and sizes must be non-empty and of equal length".into(),
        ));
    }
    let mut seen = BTreeSet::new();
    for group in groups {
        for &label in group {
            if !seen.insert(label) {
                return Err(Error::Config(format!(
                    "label {label} appears in more than one group"
                )));
            }
        }
    }
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return Err(Error::Config("total partition size is zero".into()));
    }
    let mut shards = Vec::with_capacity(groups.len());
    for (group, &size) in groups.iter().zip(sizes) {
        let mut indices: Vec<usize> = dataset
            .labels
            .iter()
            .enumerate()
            .filter(|(_, l)| group.contains(l))
            .map(|(i, _)| i)
            .collect();
        if indices.len() < size {
            return Err(Error::Capacity {
                group: format!("{group:?}"),
                requested: size,
                available: indices.len(),
            });
        }
        indices.shuffle(rng);
        indices.truncate(size);
        shards.push(Shard {
            samples: dataset.samples.select(Axis(0), &indices),
            labels: indices.iter().map(|&i| dataset.labels[i]).collect(),
            weight: size as f64 / total as f64,
        });
    }
    Ok(shards)
}

struct Upload {
    client_id: String,
    weight: f64,
    gen_bytes: Vec<u8>,
    disc_bytes: Vec<u8>,
    report: TrainReport,
}

fn client_round(
    descriptor: &ClientDescriptor,
    client_idx: usize,
    round: u64,
    global: &GanModel,
    shard: &Shard,
    config: &FederationConfig,
) -> Result<Upload> {
    if descriptor.fail {
        return Err(Error::Protocol(format!(
            "client '{}' failed in round {round}",
            descriptor.id
        )));
    }
    let mut train_rng = substream(config.master_seed, &[TAG_TRAIN, client_idx as u64, round]);
    let (trained, report) = train_local(
        global,
        shard,
        config.local_epochs,
        config.batch_size,
        config.opt,
        &mut train_rng,
    )?;
    let mut noise_rng = substream(
        config.master_seed,
        &[TAG_CLIENT_NOISE, client_idx as u64, round],
    );
    let gen_upload = perturb(&trained.gen_params, config.client_noise, &mut noise_rng)?;
    let disc_upload = if config.perturb_discriminator {
        perturb(&trained.disc_params, config.client_noise, &mut noise_rng)?
    } else {
        trained.disc_params.clone()
    };
    Ok(Upload {
        client_id: descriptor.id.clone(),
        weight: shard.weight,
        gen_bytes: serialize_params(&gen_upload)?,
        disc_bytes: serialize_params(&disc_upload)?,
        report,
    })
}

/// Run the full protocol: per round, broadcast the global model, train every
/// client concurrently on its own shard, perturb and upload over the wire
/// format, then aggregate generator and discriminator parameter sets
/// separately. Any client failure aborts the round.
pub fn run_federation(
    config: &FederationConfig,
    shards: &[Shard],
    initial: &GanModel,
) -> Result<(GanModel, FederationHistory)> {
    if config.clients.is_empty() {
        return Err(Error::Config("at least one client required".into()));
    }
    if shards.len() != config.clients.len() {
        return Err(Error::Config(format!(
            "{} shards for {} clients",
            shards.len(),
            config.clients.len()
        )));
    }
    if config.rounds == 0 {
        return Err(Error::Config("at least one round required".into()));
    }

    let mut global = initial.clone();
    let mut history = FederationHistory::default();
    for round in 1..=config.rounds {
        let uploads: Vec<Result<Upload>> = thread::scope(|scope| {
            let global = &global;
            let handles: Vec<_> = config
                .clients
                .iter()
                .zip(shards)
                .enumerate()
                .map(|(idx, (descriptor, shard))| {
                    scope.spawn(move || {
                        client_round(descriptor, idx, round, global, shard, config)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        let uploads: Vec<Upload> = uploads.into_iter().collect::<Result<_>>()?;

        let to_updates = |bytes: &dyn Fn(&Upload) -> Vec<u8>| -> Result<Vec<ClientUpdate>> {
            uploads
                .iter()
                .map(|u| {
                    Ok(ClientUpdate {
                        client_id: u.client_id.clone(),
                        round,
                        params: deserialize_params(&bytes(u))?,
                        weight: u.weight,
                    })
                })
                .collect()
        };
        let gen_updates = to_updates(&|u: &Upload| u.gen_bytes.clone())?;
        let disc_updates = to_updates(&|u: &Upload| u.disc_bytes.clone())?;

        let mut gen_rng = substream(config.master_seed, &[TAG_SERVER_NOISE, round, 0]);
        let mut disc_rng = substream(config.master_seed, &[TAG_SERVER_NOISE, round, 1]);
        global.gen_params = aggregate(&gen_updates, config.server_noise, &mut gen_rng)?;
        global.disc_params = aggregate(&disc_updates, config.server_noise, &mut disc_rng)?;

        history.rounds.push(RoundRecord {
            round,
            client_ids: uploads.iter().map(|u| u.client_id.clone()).collect(),
            weights: uploads.iter().map(|u| u.weight).collect(),
            reports: uploads.into_iter().map(|u| u.report).collect(),
            gen_digest: global.gen_params.digest(),
            disc_digest: global.disc_params.digest(),
        });
    }
    Ok((global, history))
}
