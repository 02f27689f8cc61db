//! Laplace mechanism over parameter sets.
//!
//! Noise is drawn per scalar parameter via the inverse CDF, so a client's
//! upload is `w + L(mu, lambda)` elementwise. Lambda is the privacy knob:
//! larger lambda, stronger noise.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::ParamSet;

/// Location and scale of a Laplace distribution.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LaplaceSpec {
    pub mu: f64,
    pub lambda: f64,
}

impl LaplaceSpec {
    pub fn new(mu: f64, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !mu.is_finite() {
            return Err(Error::NumericDomain(format!(
                "invalid Laplace spec: mu={mu}, lambda={lambda}"
            )));
        }
        Ok(Self { mu, lambda })
    }

    fn validate(&self) -> Result<()> {
        Self::new(self.mu, self.lambda).map(|_| ())
    }

    /// One draw: x = mu - lambda * sign(u) * ln(1 - 2|u|), u uniform on (-0.5, 0.5).
    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u = loop {
            // random::<f64>() is [0, 1); skip the single point that maps to -0.5.
            let r = rng.random::<f64>();
            if r > 0.0 {
                break r - 0.5;
            }
        };
        self.mu - self.lambda * u.signum() * (1.0 - 2.0 * u.abs()).ln()
    }
}

/// Draw `n` i.i.d. Laplace samples.
pub fn sample_laplace(rng: &mut ChaCha8Rng, spec: LaplaceSpec, n: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    Ok((0..n).map(|_| spec.draw(rng)).collect())
}

/// Add an independent Laplace draw to every scalar entry. Names, shapes and
/// alignment are untouched.
pub fn perturb(params: &ParamSet, spec: LaplaceSpec, rng: &mut ChaCha8Rng) -> Result<ParamSet> {
    spec.validate()?;
    Ok(params.map(|v| v + spec.draw(rng)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::ParamEntry;
    use crate::rng::substream;

    #[test]
    fn invalid_lambda_rejected() {
        assert!(LaplaceSpec::new(0.0, 0.0).is_err());
        assert!(LaplaceSpec::new(0.0, -1.0).is_err());
        assert!(LaplaceSpec::new(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn fixed_seed_reproduces_vector() {
        let spec = LaplaceSpec::new(0.0, 1.0).unwrap();
        let a = sample_laplace(&mut substream(5, &[0]), spec, 100).unwrap();
        let b = sample_laplace(&mut substream(5, &[0]), spec, 100).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn moments_match_laplace() {
        // median ~ mu, MAD = lambda, variance = 2 lambda^2
        let spec = LaplaceSpec::new(0.0, 0.5).unwrap();
        let mut xs = sample_laplace(&mut substream(11, &[]), spec, 200_000).unwrap();
        let mad = xs.iter().map(|x| x.abs()).sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| x * x).sum::<f64>() / (xs.len() - 1) as f64;
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = xs[xs.len() / 2];
        assert!(median.abs() < 0.01 * spec.lambda);
        assert!((mad / spec.lambda - 1.0).abs() < 0.02);
        assert!((var / (2.0 * spec.lambda * spec.lambda) - 1.0).abs() < 0.05);
    }

    #[test]
    fn vanishing_lambda_is_identity() {
        let mut params = ParamSet::new();
        params
            .push(ParamEntry::new("w", vec![4], vec![1.0, -2.0, 0.0, 3.5]).unwrap())
            .unwrap();
        let spec = LaplaceSpec::new(0.0, 1e-12).unwrap();
        let out = perturb(&params, spec, &mut substream(3, &[])).unwrap();
        for (a, b) in params.values().zip(out.values()) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(params.is_aligned_with(&out));
    }

    #[test]
    fn location_shift() {
        let mut params = ParamSet::new();
        params
            .push(ParamEntry::new("w", vec![3], vec![0.0, 1.0, 2.0]).unwrap())
            .unwrap();
        let spec = LaplaceSpec::new(5.0, 1e-12).unwrap();
        let out = perturb(&params, spec, &mut substream(3, &[])).unwrap();
        for (a, b) in params.values().zip(out.values()) {
            assert!((b - a - 5.0).abs() < 1e-9);
        }
    }

    #[test]
    fn perturbed_set_mad_matches_scale() {
        let mut params = ParamSet::new();
        params
            .push(ParamEntry::new("w", vec![10_000], vec![0.0; 10_000]).unwrap())
            .unwrap();
        let spec = LaplaceSpec::new(0.0, 0.1).unwrap();
        let out = perturb(&params, spec, &mut substream(17, &[])).unwrap();
        let mad = out.values().map(|x| x.abs()).sum::<f64>() / 10_000.0;
        assert!((mad / 0.1 - 1.0).abs() < 0.05);
    }
}
