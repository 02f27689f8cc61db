use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::arch::{ArchDescriptor, Layer};
use super::params::{ParamEntry, ParamSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Per-layer cache recorded by [`forward`]; exactly what [`backward`] needs.
#[derive(Debug, Clone)]
enum LayerCache {
    Dense {
        input: Array2<f64>,
        weight: Array2<f64>,
    },
    LeakyRelu {
        input: Array2<f64>,
        slope: f64,
    },
    Sigmoid {
        output: Array2<f64>,
    },
    /// Mask is the inverted-dropout multiplier (0 or 1/(1-rate)); identity in eval.
    Dropout {
        mask: Option<Array2<f64>>,
    },
}

#[derive(Debug, Clone)]
pub struct Tape {
    arch: ArchDescriptor,
    caches: Vec<LayerCache>,
    batch_rows: usize,
}

fn entry_matrix(entry: &ParamEntry) -> Array2<f64> {
    let (r, c) = (entry.shape[0], entry.shape[1]);
    Array2::from_shape_vec((r, c), entry.values.clone()).expect("shape checked on construction")
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Run the network on a batch (rows = samples).
///
/// In eval mode dropout is the identity and the rng is never consumed.
pub fn forward(
    arch: &ArchDescriptor,
    params: &ParamSet,
    batch: &Array2<f64>,
    mode: Mode,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Result<(Array2<f64>, Tape)> {
    arch.check_params(params)?;
    if batch.ncols() != arch.input_dim() {
        return Err(Error::Alignment(format!(
            "batch has {} columns, architecture expects {}",
            batch.ncols(),
            arch.input_dim()
        )));
    }
    if batch.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericDomain("non-finite value in input batch".into()));
    }

    let mut current = batch.clone();
    let mut caches = Vec::with_capacity(arch.layers().len());
    let mut dense_idx = 0usize;
    for layer in arch.layers() {
        match layer {
            Layer::Dense { .. } => {
                let w = entry_matrix(params.get(&format!("dense{dense_idx}.w")).unwrap());
                let b = Array1::from_vec(
                    params
                        .get(&format!("dense{dense_idx}.b"))
                        .unwrap()
                        .values
                        .clone(),
                );
                let out = current.dot(&w) + &b;
                caches.push(LayerCache::Dense {
                    input: current,
                    weight: w,
                });
                current = out;
                dense_idx += 1;
            }
            Layer::LeakyRelu { slope } => {
                let out = current.mapv(|x| if x >= 0.0 { x } else { slope * x });
                caches.push(LayerCache::LeakyRelu {
                    input: current,
                    slope: *slope,
                });
                current = out;
            }
            Layer::Sigmoid => {
                current = current.mapv(sigmoid);
                caches.push(LayerCache::Sigmoid {
                    output: current.clone(),
                });
            }
            Layer::Dropout { rate } => {
                if mode == Mode::Train {
                    let rng = rng.as_deref_mut().ok_or_else(|| {
                        Error::Config("dropout in train mode requires an rng stream".into())
                    })?;
                    let keep = 1.0 - rate;
                    let mask = Array2::from_shape_simple_fn(current.dim(), || {
                        if rng.random::<f64>() < *rate {
                            0.0
                        } else {
                            1.0 / keep
                        }
                    });
                    current *= &mask;
                    caches.push(LayerCache::Dropout { mask: Some(mask) });
                } else {
                    caches.push(LayerCache::Dropout { mask: None });
                }
            }
        }
    }

    let batch_rows = batch.nrows();
    Ok((
        current,
        Tape {
            arch: arch.clone(),
            caches,
            batch_rows,
        },
    ))
}

/// Backpropagate `upstream_grad` (d loss / d outputs, loss scalar) through the
/// tape. Returns gradients for every parameter plus the gradient with respect
/// to the input batch, which lets a generator train through a frozen
/// discriminator.
pub fn backward(
    arch: &ArchDescriptor,
    tape: &Tape,
    upstream_grad: &Array2<f64>,
) -> Result<(ParamSet, Array2<f64>)> {
    if tape.arch != *arch {
        return Err(Error::Alignment(
            "tape was recorded with a different architecture".into(),
        ));
    }
    if upstream_grad.nrows() != tape.batch_rows || upstream_grad.ncols() != arch.output_dim() {
        return Err(Error::Alignment(format!(
            "upstream gradient is {}x{}, expected {}x{}",
            upstream_grad.nrows(),
            upstream_grad.ncols(),
            tape.batch_rows,
            arch.output_dim()
        )));
    }

    let mut grad = upstream_grad.clone();
    // Collected innermost-first; reversed into entry order at the end.
    let mut dense_grads: Vec<(Array2<f64>, Array1<f64>)> = Vec::new();
    for cache in tape.caches.iter().rev() {
        match cache {
            LayerCache::Dense { input, weight } => {
                let dw = input.t().dot(&grad);
                let db = grad.sum_axis(Axis(0));
                let dx = grad.dot(&weight.t());
                dense_grads.push((dw, db));
                grad = dx;
            }
            LayerCache::LeakyRelu { input, slope } => {
                let gate = input.mapv(|x| if x >= 0.0 { 1.0 } else { *slope });
                grad *= &gate;
            }
            LayerCache::Sigmoid { output } => {
                let gate = output.mapv(|y| y * (1.0 - y));
                grad *= &gate;
            }
            LayerCache::Dropout { mask } => {
                if let Some(mask) = mask {
                    grad *= mask;
                }
            }
        }
    }

    let mut grads = ParamSet::new();
    for (idx, (dw, db)) in dense_grads.into_iter().rev().enumerate() {
        let shape = vec![dw.nrows(), dw.ncols()];
        grads
            .push(ParamEntry::new(
                format!("dense{idx}.w"),
                shape,
                dw.into_iter().collect(),
            )?)
            .unwrap();
        grads
            .push(ParamEntry::new(
                format!("dense{idx}.b"),
                vec![db.len()],
                db.into_iter().collect(),
            )?)
            .unwrap();
    }
    Ok((grads, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn dense_params(idx: usize, w: Array2<f64>, b: Vec<f64>) -> Vec<ParamEntry> {
        vec![
            ParamEntry::new(
                format!("dense{idx}.w"),
                vec![w.nrows(), w.ncols()],
                w.into_iter().collect(),
            )
            .unwrap(),
            ParamEntry::new(format!("dense{idx}.b"), vec![b.len()], b).unwrap(),
        ]
    }

    fn param_set(entries: Vec<ParamEntry>) -> ParamSet {
        let mut s = ParamSet::new();
        for e in entries {
            s.push(e).unwrap();
        }
        s
    }

    #[test]
    fn zero_dense_sigmoid_outputs_half() {
        let arch = ArchDescriptor::new(vec![
            Layer::Dense { input: 2, output: 1 },
            Layer::Sigmoid,
        ])
        .unwrap();
        let params = param_set(dense_params(0, Array2::zeros((2, 1)), vec![0.0]));
        let batch = array![[1.0, -3.0], [0.5, 2.0]];
        let (out, _) = forward(&arch, &params, &batch, Mode::Eval, None).unwrap();
        for &v in out.iter() {
            assert_abs_diff_eq!(v, 0.5);
        }
    }

    #[test]
    fn leaky_relu_definition() {
        let arch = ArchDescriptor::new(vec![
            Layer::Dense { input: 1, output: 1 },
            Layer::LeakyRelu { slope: 0.2 },
        ])
        .unwrap();
        // Identity dense layer.
        let params = param_set(dense_params(0, array![[1.0]], vec![0.0]));
        let batch = array![[-1.0], [3.0]];
        let (out, _) = forward(&arch, &params, &batch, Mode::Eval, None).unwrap();
        assert_abs_diff_eq!(out[[0, 0]], -0.2);
        assert_abs_diff_eq!(out[[1, 0]], 3.0);
    }

    #[test]
    fn dense_matches_hand_multiply() {
        // [1,1] * [[1,2],[3,4]] = [4,6]
        let arch = ArchDescriptor::new(vec![Layer::Dense { input: 2, output: 2 }]).unwrap();
        let params = param_set(dense_params(0, array![[1.0, 2.0], [3.0, 4.0]], vec![0.0, 0.0]));
        let batch = array![[1.0, 1.0]];
        let (out, _) = forward(&arch, &params, &batch, Mode::Eval, None).unwrap();
        assert_abs_diff_eq!(out[[0, 0]], 4.0);
        assert_abs_diff_eq!(out[[0, 1]], 6.0);
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let arch = ArchDescriptor::new(vec![
            Layer::Dense { input: 2, output: 3 },
            Layer::Sigmoid,
        ])
        .unwrap();
        let params = arch.init_params(&mut substream(7, &[]));
        let batch = array![[0.3, -0.4], [1.0, 2.0]];
        let (_, tape) = forward(&arch, &params, &batch, Mode::Eval, None).unwrap();
        let (grads, dx) = backward(&arch, &tape, &Array2::zeros((2, 3))).unwrap();
        assert!(grads.values().all(|v| v == 0.0));
        assert!(dx.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_dense_chain_rule_by_hand() {
        // y = w*x + b, loss = y, x = 2: dL/dw = 2, dL/db = 1.
        let arch = ArchDescriptor::new(vec![Layer::Dense { input: 1, output: 1 }]).unwrap();
        let params = param_set(dense_params(0, array![[0.7]], vec![0.1]));
        let batch = array![[2.0]];
        let (_, tape) = forward(&arch, &params, &batch, Mode::Eval, None).unwrap();
        let (grads, _) = backward(&arch, &tape, &array![[1.0]]).unwrap();
        assert_abs_diff_eq!(grads.get("dense0.w").unwrap().values[0], 2.0);
        assert_abs_diff_eq!(grads.get("dense0.b").unwrap().values[0], 1.0);
    }

    #[test]
    fn eval_mode_never_consumes_rng() {
        use rand::RngCore;
        let arch = ArchDescriptor::new(vec![
            Layer::Dense { input: 2, output: 2 },
            Layer::Dropout { rate: 0.3 },
        ])
        .unwrap();
        let params = arch.init_params(&mut substream(3, &[]));
        let batch = array![[1.0, 2.0]];
        let mut rng = substream(99, &[]);
        let before = rng.clone().next_u64();
        forward(&arch, &params, &batch, Mode::Eval, Some(&mut rng)).unwrap();
        assert_eq!(rng.next_u64(), before);
    }

    #[test]
    fn dropout_in_train_requires_rng() {
        let arch = ArchDescriptor::new(vec![
            Layer::Dense { input: 2, output: 2 },
            Layer::Dropout { rate: 0.3 },
        ])
        .unwrap();
        let params = arch.init_params(&mut substream(3, &[]));
        let batch = array![[1.0, 2.0]];
        assert!(forward(&arch, &params, &batch, Mode::Train, None).is_err());
    }

    #[test]
    fn non_finite_input_rejected() {
        let arch = ArchDescriptor::new(vec![Layer::Dense { input: 1, output: 1 }]).unwrap();
        let params = arch.init_params(&mut substream(3, &[]));
        let batch = array![[f64::NAN]];
        assert!(matches!(
            forward(&arch, &params, &batch, Mode::Eval, None),
            Err(Error::NumericDomain(_))
        ));
    }
}
