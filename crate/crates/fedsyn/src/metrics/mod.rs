//! Quantitative evaluation: Fréchet distance between Gaussian fits of two
//! feature sets, and mode-coverage statistics for mixture data.

mod jacobi;

pub use jacobi::{eigh, matrix_sqrt_psd};

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Default coverage threshold factor: 4 sigma around each center.
pub const COVERAGE_SIGMA_FACTOR: f64 = 4.0;
/// A mode counts as covered when at least this fraction of samples land near it.
pub const COVERAGE_PREVALENCE: f64 = 0.01;

/// Sample mean and covariance of a feature set.
#[derive(Debug, Clone)]
pub struct GaussianMoments {
    pub mean: Array1<f64>,
    pub cov: Array2<f64>,
}

/// Per-lambda evaluation result.
#[derive(Debug, Clone)]
pub struct FrechetReport {
    pub score: f64,
    pub lambda_used: f64,
    pub moments_real: GaussianMoments,
    pub moments_fake: GaussianMoments,
    pub n_real: usize,
    pub n_fake: usize,
}

/// Sample mean and (n-1)-denominator covariance, symmetrized.
pub fn fit_gaussian(features: &Array2<f64>) -> Result<GaussianMoments> {
    let n = features.nrows();
    if n < 2 {
        return Err(Error::NumericDomain(format!(
            "need at least 2 rows to fit a Gaussian, got {n}"
        )));
    }
    let d = features.ncols();
    let mean = features.sum_axis(ndarray::Axis(0)) / n as f64;
    let centered = features - &mean;
    let mut cov = centered.t().dot(&centered) / (n as f64 - 1.0);
    // Symmetrize (C + C^T)/2 against round-off.
    for i in 0..d {
        for j in 0..i {
            let avg = 0.5 * (cov[[i, j]] + cov[[j, i]]);
            cov[[i, j]] = avg;
            cov[[j, i]] = avg;
        }
    }
    Ok(GaussianMoments { mean, cov })
}

/// Squared 2-Wasserstein distance between two Gaussians:
/// ||mu_a - mu_b||^2 + Tr(C_a + C_b - 2 (C_a^{1/2} C_b C_a^{1/2})^{1/2}).
pub fn frechet_distance(a: &GaussianMoments, b: &GaussianMoments) -> Result<f64> {
    if a.mean.len() != b.mean.len() {
        return Err(Error::Alignment(format!(
            "dimension mismatch: {} vs {}",
            a.mean.len(),
            b.mean.len()
        )));
    }
    let diff = &a.mean - &b.mean;
    let mean_term = diff.dot(&diff);
    let root_a = matrix_sqrt_psd(&a.cov)?;
    let mut inner = root_a.dot(&b.cov).dot(&root_a);
    let d = inner.nrows();
    for i in 0..d {
        for j in 0..i {
            let avg = 0.5 * (inner[[i, j]] + inner[[j, i]]);
            inner[[i, j]] = avg;
            inner[[j, i]] = avg;
        }
    }
    let cross = matrix_sqrt_psd(&inner)?;
    let trace: f64 = (0..d)
        .map(|i| a.cov[[i, i]] + b.cov[[i, i]] - 2.0 * cross[[i, i]])
        .sum();
    Ok((mean_term + trace).max(0.0))
}

/// Modes covered by a sample set: a mode counts iff at least
/// [`COVERAGE_PREVALENCE`] of the samples fall within `threshold` of its
/// center. Samples are assigned to their nearest center.
pub fn mode_coverage(
    samples: &Array2<f64>,
    centers: &[[f64; 2]],
    threshold: f64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(threshold > 0.0) {
        return Err(Error::NumericDomain(format!(
            "threshold {threshold} must be > 0"
        )));
    }
    let mut counts = vec![0usize; centers.len()];
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
        let c = centers[nearest];
        let dist = ((x - c[0]).powi(2) + (y - c[1]).powi(2)).sqrt();
        if dist <= threshold {
            counts[nearest] += 1;
        }
    }
    let floor = (COVERAGE_PREVALENCE * samples.nrows() as f64).ceil().max(1.0) as usize;
    let covered = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c >= floor)
        .map(|(i, _)| i)
        .collect();
    Ok((covered, counts))
}
