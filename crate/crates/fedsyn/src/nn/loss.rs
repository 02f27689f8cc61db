use crate::error::{Error, Result};

const CLAMP_EPS: f64 = 1e-7;

/// Binary cross entropy over a batch of sigmoid outputs.
///
/// Predictions are clamped to [1e-7, 1 - 1e-7] before taking logs. Returns the
/// mean loss and its gradient with respect to each (clamped) prediction.
pub fn bce_loss(pred: &[f64], labels: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.len() != labels.len() {
        return Err(Error::Alignment(format!(
            "{} predictions vs {} labels",
            pred.len(),
            labels.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Alignment("empty prediction vector".into()));
    }
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(pred.len());
    for (&p, &y) in pred.iter().zip(labels) {
        let p = p.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS);
        loss -= y * p.ln() + (1.0 - y) * (1.0 - p).ln();
        grad.push((p - y) / (p * (1.0 - p)) / n);
    }
    Ok((loss / n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn uniform_half_gives_ln2() {
        let (loss, _) = bce_loss(&[0.5, 0.5, 0.5], &[1.0, 0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(loss, std::f64::consts::LN_2, epsilon = 1e-12);
    }

    #[test]
    fn perfect_prediction_near_zero() {
        let (loss, _) = bce_loss(&[1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!(loss <= -(1.0 - 1e-7f64).ln() + 1e-15);
    }

    #[test]
    fn hand_computed_case() {
        // -(ln 0.9 + ln 0.8)/2
        let (loss, _) = bce_loss(&[0.9, 0.2], &[1.0, 0.0]).unwrap();
        let expected = -(0.9f64.ln() + 0.8f64.ln()) / 2.0;
        assert_abs_diff_eq!(loss, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(loss, 0.1643, epsilon = 5e-4);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(bce_loss(&[0.5], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let pred = [0.3, 0.8, 0.6];
        let labels = [1.0, 0.0, 1.0];
        let (_, grad) = bce_loss(&pred, &labels).unwrap();
        let h = 1e-6;
        for i in 0..pred.len() {
            let mut hi = pred;
            let mut lo = pred;
            hi[i] += h;
            lo[i] -= h;
            let (lh, _) = bce_loss(&hi, &labels).unwrap();
            let (ll, _) = bce_loss(&lo, &labels).unwrap();
            assert_abs_diff_eq!(grad[i], (lh - ll) / (2.0 * h), epsilon = 1e-6);
        }
    }
}
