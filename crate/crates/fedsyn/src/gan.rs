//! Local GAN training: the adversarial game between a generator and a
//! discriminator on one client's shard, with per-checkpoint accuracy tracking.

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::federation::Shard;
use crate::nn::{
    adam_step, backward, bce_loss, forward, AdamHyper, AdamState, ArchDescriptor, Layer, Mode,
    ParamSet,
};

/// Generator + discriminator parameter sets with their architectures.
#[derive(Debug, Clone)]
pub struct GanModel {
    pub gen_arch: ArchDescriptor,
    pub gen_params: ParamSet,
    pub disc_arch: ArchDescriptor,
    pub disc_params: ParamSet,
    pub latent_dim: usize,
}

pub const LEAKY_SLOPE: f64 = 0.2;
pub const DROPOUT_RATE: f64 = 0.3;

impl GanModel {
    /// Desk-scale architecture: generator latent -> 32 -> data_dim, discriminator
    /// data_dim -> 32 -> 1 with sigmoid head and dropout.
    pub fn desk_scale(latent_dim: usize, data_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        Self::desk_scale_hidden(latent_dim, data_dim, 32, rng)
    }

    pub fn desk_scale_hidden(
        latent_dim: usize,
        data_dim: usize,
        hidden: usize,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let gen_arch = ArchDescriptor::new(vec![
            Layer::Dense {
                input: latent_dim,
                output: hidden,
            },
            Layer::LeakyRelu { slope: LEAKY_SLOPE },
            Layer::Dense {
                input: hidden,
                output: data_dim,
            },
        ])
        .unwrap();
        let disc_arch = ArchDescriptor::new(vec![
            Layer::Dense {
                input: data_dim,
                output: hidden,
            },
            Layer::LeakyRelu { slope: LEAKY_SLOPE },
            Layer::Dropout { rate: DROPOUT_RATE },
            Layer::Dense {
                input: hidden,
                output: 1,
            },
            Layer::Sigmoid,
        ])
        .unwrap();
        let gen_params = gen_arch.init_params(rng);
        let disc_params = disc_arch.init_params(rng);
        Self {
            gen_arch,
            gen_params,
            disc_arch,
            disc_params,
            latent_dim,
        }
    }

    pub fn data_dim(&self) -> usize {
        self.gen_arch.output_dim()
    }

    pub fn is_finite(&self) -> bool {
        self.gen_params.is_finite() && self.disc_params.is_finite()
    }
}

/// Loss and accuracy snapshot taken every tenth epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub epoch: usize,
    pub real_acc: f64,
    pub fake_acc: f64,
    pub disc_loss: f64,
    pub gen_loss: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    pub checkpoints: Vec<Checkpoint>,
}

/// n x dim standard-normal latent batch.
pub fn sample_latent(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, dim), || StandardNormal.sample(rng))
}

/// Map latents to samples with the generator in eval mode.
pub fn generate(model: &GanModel, latents: &Array2<f64>) -> Result<Array2<f64>> {
    if latents.ncols() != model.latent_dim {
        return Err(Error::Alignment(format!(
            "latents have {} columns, latent_dim is {}",
            latents.ncols(),
            model.latent_dim
        )));
    }
    let (out, _) = forward(&model.gen_arch, &model.gen_params, latents, Mode::Eval, None)?;
    Ok(out)
}

fn column_vec(m: &Array2<f64>) -> Vec<f64> {
    m.column(0).to_vec()
}

fn column_mat(v: Vec<f64>) -> Array2<f64> {
    let n = v.len();
    Array2::from_shape_vec((n, 1), v).unwrap()
}

/// Fraction of `real_batch` rows the discriminator scores > 0.5, and the
/// fraction of an equally sized freshly generated batch it scores <= 0.5.
pub fn discriminator_accuracy(
    model: &GanModel,
    real_batch: &Array2<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64)> {
    let n = real_batch.nrows();
    if n == 0 {
        return Err(Error::Alignment("empty real batch".into()));
    }
    let (real_scores, _) = forward(
        &model.disc_arch,
        &model.disc_params,
        real_batch,
        Mode::Eval,
        None,
    )?;
    let latents = sample_latent(rng, n, model.latent_dim);
    let fake = generate(model, &latents)?;
    let (fake_scores, _) = forward(&model.disc_arch, &model.disc_params, &fake, Mode::Eval, None)?;
    let real_acc = real_scores.iter().filter(|&&s| s > 0.5).count() as f64 / n as f64;
    let fake_acc = fake_scores.iter().filter(|&&s| s <= 0.5).count() as f64 / n as f64;
    Ok((real_acc, fake_acc))
}

/// One adversarial epoch loop over a shard.
///
/// Per batch: a discriminator step on the real batch (label 1) and a generated
/// batch (label 0), then one generator step through the frozen discriminator
/// with target label 1 (non-saturating objective).
pub fn train_local(
    model: &GanModel,
    shard: &Shard,
    epochs: usize,
    batch_size: usize,
    opt: AdamHyper,
    rng: &mut ChaCha8Rng,
) -> Result<(GanModel, TrainReport)> {
    let n = shard.samples.nrows();
    if n == 0 {
        return Err(Error::Protocol("empty shard".into()));
    }
    let batch_size = batch_size.clamp(1, n);
    let mut model = model.clone();
    let mut report = TrainReport::default();
    if epochs == 0 {
        return Ok((model, report));
    }

    let mut gen_state = AdamState::new(&model.gen_params, opt);
    let mut disc_state = AdamState::new(&model.disc_params, opt);
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 1..=epochs {
        order.shuffle(rng);
        let mut disc_loss_sum = 0.0;
        let mut gen_loss_sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(batch_size) {
            if chunk.len() < batch_size {
                break; // drop ragged tail batch
            }
            let real = shard.samples.select(Axis(0), chunk);
            let bs = chunk.len();
            let ones = vec![1.0; bs];
            let zeros = vec![0.0; bs];

            // Discriminator step: real batch toward 1, generated batch toward 0.
            let latents = sample_latent(rng, bs, model.latent_dim);
            let fake = generate(&model, &latents)?;

            let (real_pred, real_tape) = forward(
                &model.disc_arch,
                &model.disc_params,
                &real,
                Mode::Train,
                Some(rng),
            )?;
            let (loss_real, grad_real) = bce_loss(&column_vec(&real_pred), &ones)?;
            let (dgrads_real, _) = backward(&model.disc_arch, &real_tape, &column_mat(grad_real))?;

            let (fake_pred, fake_tape) = forward(
                &model.disc_arch,
                &model.disc_params,
                &fake,
                Mode::Train,
                Some(rng),
            )?;
            let (loss_fake, grad_fake) = bce_loss(&column_vec(&fake_pred), &zeros)?;
            let (dgrads_fake, _) = backward(&model.disc_arch, &fake_tape, &column_mat(grad_fake))?;

            let dgrads = dgrads_real.zip_with(&dgrads_fake, |a, b| a + b)?;
            let (disc_params, next_disc_state) = adam_step(&model.disc_params, &dgrads, &disc_state)?;
            model.disc_params = disc_params;
            disc_state = next_disc_state;

            // Generator step through the frozen (just-updated) discriminator.
            let latents = sample_latent(rng, bs, model.latent_dim);
            let (gen_out, gen_tape) = forward(
                &model.gen_arch,
                &model.gen_params,
                &latents,
                Mode::Train,
                Some(rng),
            )?;
            let (disc_out, disc_tape) = forward(
                &model.disc_arch,
                &model.disc_params,
                &gen_out,
                Mode::Train,
                Some(rng),
            )?;
            let (loss_gen, grad_gen) = bce_loss(&column_vec(&disc_out), &ones)?;
            let (_, input_grad) = backward(&model.disc_arch, &disc_tape, &column_mat(grad_gen))?;
            let (ggrads, _) = backward(&model.gen_arch, &gen_tape, &input_grad)?;
            let (gen_params, next_gen_state) = adam_step(&model.gen_params, &ggrads, &gen_state)?;
            model.gen_params = gen_params;
            gen_state = next_gen_state;

            disc_loss_sum += 0.5 * (loss_real + loss_fake);
            gen_loss_sum += loss_gen;
            batches += 1;
        }

        if epoch % 10 == 0 {
            if !model.is_finite() {
                return Err(Error::NumericDomain(format!(
                    "non-finite parameters at epoch {epoch}"
                )));
            }
            let eval_n = batch_size.min(n);
            let eval_idx: Vec<usize> = {
                let mut idx: Vec<usize> = (0..n).collect();
                idx.shuffle(rng);
                idx.truncate(eval_n);
                idx
            };
            let eval_batch = shard.samples.select(Axis(0), &eval_idx);
            let (real_acc, fake_acc) = discriminator_accuracy(&model, &eval_batch, rng)?;
            let batches = batches.max(1) as f64;
            report.checkpoints.push(Checkpoint {
                epoch,
                real_acc,
                fake_acc,
                disc_loss: disc_loss_sum / batches,
                gen_loss: gen_loss_sum / batches,
            });
        }
    }
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_ring;
    use crate::rng::substream;
    use ndarray::array;

    fn ring_shard(seed: u64, n: usize) -> Shard {
        let ds = generate_ring(&mut substream(seed, &[77]), n, 10, 1.0, 0.05).unwrap();
        Shard {
            samples: ds.samples,
            labels: ds.labels,
            weight: 1.0,
        }
    }

    #[test]
    fn latent_sampling_is_deterministic_per_seed() {
        let a = sample_latent(&mut substream(1, &[]), 4, 3);
        let b = sample_latent(&mut substream(1, &[]), 4, 3);
        let c = sample_latent(&mut substream(2, &[]), 4, 3);
        assert_eq!(a, b);
        assert!(a.iter().zip(c.iter()).any(|(x, y)| x != y));
    }

    #[test]
    fn latent_moments() {
        let m = sample_latent(&mut substream(5, &[]), 100_000, 1);
        let mean = m.mean().unwrap();
        let var = m.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m.len() - 1) as f64;
        assert!(mean.abs() < 0.02);
        assert!((var - 1.0).abs() < 0.02);
    }

    #[test]
    fn generate_is_pure() {
        let mut rng = substream(9, &[]);
        let model = GanModel::desk_scale(8, 2, &mut rng);
        let latents = sample_latent(&mut rng, 5, 8);
        let a = generate(&model, &latents).unwrap();
        let b = generate(&model, &latents).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn generate_rejects_wrong_latent_dim() {
        let mut rng = substream(9, &[]);
        let model = GanModel::desk_scale(8, 2, &mut rng);
        let latents = sample_latent(&mut rng, 5, 7);
        assert!(generate(&model, &latents).is_err());
    }

    #[test]
    fn zero_epochs_is_identity() {
        let mut rng = substream(10, &[]);
        let model = GanModel::desk_scale(8, 2, &mut rng);
        let shard = ring_shard(10, 100);
        let (out, report) =
            train_local(&model, &shard, 0, 32, AdamHyper::default(), &mut rng).unwrap();
        assert_eq!(out.gen_params, model.gen_params);
        assert_eq!(out.disc_params, model.disc_params);
        assert!(report.checkpoints.is_empty());
    }

    #[test]
    fn training_is_bit_reproducible() {
        let shard = ring_shard(11, 200);
        let run = || {
            let mut rng = substream(11, &[1]);
            let model = GanModel::desk_scale(8, 2, &mut rng);
            train_local(&model, &shard, 10, 64, AdamHyper::default(), &mut rng).unwrap()
        };
        let (m1, r1) = run();
        let (m2, r2) = run();
        assert_eq!(m1.gen_params, m2.gen_params);
        assert_eq!(m1.disc_params, m2.disc_params);
        assert_eq!(r1, r2);
    }

    #[test]
    fn checkpoint_epochs_are_multiples_of_ten() {
        let shard = ring_shard(12, 100);
        let mut rng = substream(12, &[]);
        let model = GanModel::desk_scale(8, 2, &mut rng);
        let (_, report) =
            train_local(&model, &shard, 35, 32, AdamHyper::default(), &mut rng).unwrap();
        let epochs: Vec<usize> = report.checkpoints.iter().map(|c| c.epoch).collect();
        assert_eq!(epochs, vec![10, 20, 30]);
    }

    #[test]
    fn accuracy_threshold_convention() {
        // A discriminator with zero weights outputs exactly 0.5 everywhere:
        // real_acc = 0 (needs > 0.5), fake_acc = 1 (needs <= 0.5).
        let mut rng = substream(13, &[]);
        let mut model = GanModel::desk_scale(8, 2, &mut rng);
        model.disc_params = model.disc_params.map(|_| 0.0);
        let real = array![[1.0, 0.0], [0.0, 1.0]];
        let (real_acc, fake_acc) = discriminator_accuracy(&model, &real, &mut rng).unwrap();
        assert_eq!(real_acc, 0.0);
        assert_eq!(fake_acc, 1.0);
    }

    #[test]
    fn untrained_accuracies_in_unit_interval() {
        let mut rng = substream(14, &[]);
        let model = GanModel::desk_scale(8, 2, &mut rng);
        let real = sample_latent(&mut rng, 256, 2);
        let (ra, fa) = discriminator_accuracy(&model, &real, &mut rng).unwrap();
        assert!((0.0..=1.0).contains(&ra));
        assert!((0.0..=1.0).contains(&fa));
    }

    #[test]
    fn single_mode_training_converges_toward_center() {
        // Single tight Gaussian mode at (1, 0).
        let mut data_rng = substream(21, &[]);
        let n = 256;
        let mut samples = Array2::zeros((n, 2));
        for i in 0..n {
            samples[[i, 0]] = 1.0 + 0.02 * sample_latent(&mut data_rng, 1, 1)[[0, 0]];
            samples[[i, 1]] = 0.02 * sample_latent(&mut data_rng, 1, 1)[[0, 0]];
        }
        let shard = Shard {
            samples,
            labels: vec![0; n],
            weight: 1.0,
        };
        let mut rng = substream(22, &[]);
        let model = GanModel::desk_scale(8, 2, &mut rng);
        let opt = AdamHyper {
            lr: 0.01,
            ..AdamHyper::default()
        };
        let (trained, _) = train_local(&model, &shard, 50, 64, opt, &mut rng).unwrap();
        let latents = sample_latent(&mut rng, 500, 8);
        let out = generate(&trained, &latents).unwrap();
        let mean_x = out.column(0).mean().unwrap();
        let mean_y = out.column(1).mean().unwrap();
        // Pilot-established bound: generated mean lands within 3 sigma-ish of the mode.
        assert!(
            (mean_x - 1.0).abs() < 0.5 && mean_y.abs() < 0.5,
            "generated mean ({mean_x}, {mean_y}) far from mode center (1, 0)"
        );
    }
}
