//! Train a small GAN on the 10-mode ring mixture and report mode coverage.
//!
//! Run with `cargo run --release --example ring_gan`.

use fedsyn::data::{generate_ring, ring_centers};
use fedsyn::federation::Shard;
use fedsyn::gan::{generate, sample_latent, train_local, GanModel};
use fedsyn::metrics::mode_coverage;
use fedsyn::nn::AdamHyper;
use fedsyn::rng::substream;

fn main() -> fedsyn::Result<()> {
    let seed = 3;
    let dataset = generate_ring(&mut substream(seed, &[0]), 3000, 10, 1.0, 0.05)?;
    let shard = Shard {
        samples: dataset.samples.clone(),
        labels: dataset.labels.clone(),
        weight: 1.0,
    };

    let mut rng = substream(seed, &[1]);
    let init = GanModel::desk_scale_hidden(8, 2, 64, &mut rng);
    let opt = AdamHyper {
        lr: 0.005,
        ..AdamHyper::default()
    };
    let (model, report) = train_local(&init, &shard, 50, 64, opt, &mut rng)?;

    for c in &report.checkpoints {
        println!(
            "epoch {:>3}  disc_loss {:.4}  gen_loss {:.4}  real_acc {:.2}  fake_acc {:.2}",
            c.epoch, c.disc_loss, c.gen_loss, c.real_acc, c.fake_acc
        );
    }

    let fake = generate(&model, &sample_latent(&mut substream(seed, &[2]), 2000, 8))?;
    let (covered, counts) = mode_coverage(&fake, &ring_centers(10, 1.0), 0.2)?;
    println!("covered modes: {covered:?}");
    println!("per-mode sample counts: {counts:?}");
    Ok(())
}
