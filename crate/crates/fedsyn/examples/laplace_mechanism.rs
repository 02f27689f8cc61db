//! Laplace noise: empirical statistics and parameter perturbation.
//!
//! Run with `cargo run --release --example laplace_mechanism`.

use fedsyn::gan::GanModel;
use fedsyn::privacy::{perturb, sample_laplace, LaplaceSpec};
use fedsyn::rng::substream;

fn main() -> fedsyn::Result<()> {
    for &lambda in &[1.0, 0.1, 0.001] {
        let spec = LaplaceSpec::new(0.0, lambda)?;
        let draws = sample_laplace(&mut substream(7, &[0]), spec, 100_000)?;
        let n = draws.len() as f64;
        let mad = draws.iter().map(|x| x.abs()).sum::<f64>() / n;
        let var = draws.iter().map(|x| x * x).sum::<f64>() / n;
        println!(
            "lambda {lambda:>6}: mean |x| = {mad:.5} (expect {lambda}), var = {var:.6} (expect {})",
            2.0 * lambda * lambda
        );
    }

    // perturbing a model's parameters leaves names and shapes untouched
    let model = GanModel::desk_scale(8, 2, &mut substream(7, &[1]));
    let spec = LaplaceSpec::new(0.0, 0.01)?;
    let noisy = perturb(&model.gen_params, spec, &mut substream(7, &[2]))?;
    assert!(model.gen_params.is_aligned_with(&noisy));
    let max_shift = model
        .gen_params
        .values()
        .zip(noisy.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("generator perturbed with lambda 0.01, max |shift| = {max_shift:.4}");
    Ok(())
}
