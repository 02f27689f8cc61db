use super::params::ParamSet;
use crate::error::{Error, Result};

/// Adam hyperparameters. Defaults follow the experimental setup: learning
/// rate 2e-4 with first-moment decay 0.5.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        Self {
            lr: 0.0002,
            beta1: 0.5,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Moment estimates plus step counter for one optimized parameter set.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub m: ParamSet,
    pub v: ParamSet,
    pub t: u64,
    pub hyper: AdamHyper,
}

impl AdamState {
    pub fn new(params: &ParamSet, hyper: AdamHyper) -> Self {
        Self {
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
            hyper,
        }
    }
}

/// One Adam update with bias correction. Pure: returns the new parameters and
/// state, leaving the inputs untouched.
pub fn adam_step(
    params: &ParamSet,
    grads: &ParamSet,
    state: &AdamState,
) -> Result<(ParamSet, AdamState)> {
    params.check_aligned(grads)?;
    params.check_aligned(&state.m)?;
    if !grads.is_finite() {
        return Err(Error::NumericDomain("non-finite gradient".into()));
    }
    let h = state.hyper;
    let t = state.t + 1;
    let m = state.m.zip_with(grads, |m, g| h.beta1 * m + (1.0 - h.beta1) * g)?;
    let v = state
        .v
        .zip_with(grads, |v, g| h.beta2 * v + (1.0 - h.beta2) * g * g)?;
    let bias1 = 1.0 - h.beta1.powi(t as i32);
    let bias2 = 1.0 - h.beta2.powi(t as i32);
    let m_hat = m.map(|x| x / bias1);
    let v_hat = v.map(|x| x / bias2);
    let step = m_hat.zip_with(&v_hat, |m, v| h.lr * m / (v.sqrt() + h.eps))?;
    let updated = params.zip_with(&step, |p, s| p - s)?;
    Ok((
        updated,
        AdamState {
            m,
            v,
            t,
            hyper: h,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::params::ParamEntry;
    use approx::assert_abs_diff_eq;

    fn scalar_set(v: f64) -> ParamSet {
        let mut s = ParamSet::new();
        s.push(ParamEntry::new("w", vec![1], vec![v]).unwrap()).unwrap();
        s
    }

    #[test]
    fn zero_grad_is_noop() {
        let params = scalar_set(1.5);
        let state = AdamState::new(&params, AdamHyper::default());
        let (p2, s2) = adam_step(&params, &scalar_set(0.0), &state).unwrap();
        assert_eq!(p2, params);
        assert!(s2.m.values().all(|x| x == 0.0));
        assert!(s2.v.values().all(|x| x == 0.0));
        assert_eq!(s2.t, 1);
    }

    #[test]
    fn first_step_magnitude_is_lr() {
        // Bias corrections cancel at t=1, so the update is lr * g / (|g| + eps').
        for &g in &[0.5, -2.0, 1e3] {
            let params = scalar_set(0.0);
            let state = AdamState::new(&params, AdamHyper::default());
            let (p2, _) = adam_step(&params, &scalar_set(g), &state).unwrap();
            assert_abs_diff_eq!(p2.values().next().unwrap(), -0.0002 * g.signum(), epsilon = 1e-6);
        }
    }

    #[test]
    fn two_steps_match_scripted_reference() {
        // Independently scripted: lr=0.1, beta1=0.5, beta2=0.999, eps=1e-8, g=1 twice.
        // t=1: m=0.5, v=0.001, m^=1, v^=1, step = 0.1/(1+1e-8)       -> w = -0.09999999900...
        // t=2: m=0.75, v=0.001999, m^=1, v^=1, step = 0.1/(1+1e-8)   -> w = -0.19999999800...
        let hyper = AdamHyper {
            lr: 0.1,
            beta1: 0.5,
            beta2: 0.999,
            eps: 1e-8,
        };
        let params = scalar_set(0.0);
        let state = AdamState::new(&params, hyper);
        let g = scalar_set(1.0);
        let (p1, s1) = adam_step(&params, &g, &state).unwrap();
        let (p2, s2) = adam_step(&p1, &g, &s1).unwrap();
        assert_abs_diff_eq!(p1.values().next().unwrap(), -0.09999999900000002, epsilon = 1e-15);
        assert_abs_diff_eq!(p2.values().next().unwrap(), -0.19999999800000033, epsilon = 1e-12);
        assert_abs_diff_eq!(s2.m.values().next().unwrap(), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(s2.v.values().next().unwrap(), 0.0019990, epsilon = 1e-10);
    }

    #[test]
    fn non_finite_grad_rejected() {
        let params = scalar_set(0.0);
        let state = AdamState::new(&params, AdamHyper::default());
        assert!(adam_step(&params, &scalar_set(f64::NAN), &state).is_err());
    }
}
