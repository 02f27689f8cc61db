//! Fréchet distance between Gaussian fits of two sample clouds.
//!
//! Run with `cargo run --release --example frechet_score`.

use fedsyn::data::generate_ring;
use fedsyn::metrics::{fit_gaussian, frechet_distance};
use fedsyn::rng::substream;

fn main() -> fedsyn::Result<()> {
    let a = generate_ring(&mut substream(11, &[0]), 2000, 10, 1.0, 0.05)?;
    let b = generate_ring(&mut substream(12, &[0]), 2000, 10, 1.0, 0.05)?;
    let ma = fit_gaussian(&a.samples)?;
    let mb = fit_gaussian(&b.samples)?;
    println!("same distribution, fresh draws: {:.6}", frechet_distance(&ma, &mb)?);
    println!("identical moments:              {:.6}", frechet_distance(&ma, &ma)?);

    // shrink the ring: the distance grows with the distortion
    for &scale in &[0.9, 0.5, 0.1] {
        let shrunk = fit_gaussian(&(&b.samples * scale))?;
        println!("radius scaled by {scale}: {:.6}", frechet_distance(&ma, &shrunk)?);
    }
    Ok(())
}
