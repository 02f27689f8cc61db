use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::params::{ParamEntry, ParamSet};
use crate::error::{Error, Result};

/// One layer of a dense network.
#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Dense { input: usize, output: usize },
    LeakyRelu { slope: f64 },
    Sigmoid,
    Dropout { rate: f64 },
}

/// Ordered layer stack. Validated on construction so that consecutive dense
/// dimensions are compatible.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchDescriptor {
    layers: Vec<Layer>,
}

impl ArchDescriptor {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        let mut dim = match layers.first() {
            Some(Layer::Dense { input, .. }) => *input,
            _ => {
                return Err(Error::Alignment(
                    "architecture must start with a dense layer".into(),
                ))
            }
        };
        for layer in &layers {
            match layer {
                Layer::Dense { input, output } => {
                    if *input != dim {
                        return Err(Error::Alignment(format!(
                            "dense layer expects input {input}, previous layer produces {dim}"
                        )));
                    }
                    if *output == 0 || *input == 0 {
                        return Err(Error::Alignment("zero-sized dense layer".into()));
                    }
                    dim = *output;
                }
                Layer::Dropout { rate } => {
                    if !(0.0..1.0).contains(rate) {
                        return Err(Error::NumericDomain(format!(
                            "dropout rate {rate} outside [0, 1)"
                        )));
                    }
                }
                Layer::LeakyRelu { .. } | Layer::Sigmoid => {}
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        match self.layers[0] {
            Layer::Dense { input, .. } => input,
            _ => unreachable!("validated on construction"),
        }
    }

    pub fn output_dim(&self) -> usize {
        self.layers
            .iter()
            .rev()
            .find_map(|l| match l {
                Layer::Dense { output, .. } => Some(*output),
                _ => None,
            })
            .expect("validated on construction")
    }

    pub fn has_dropout(&self) -> bool {
        self.layers
            .iter()
            .any(|l| matches!(l, Layer::Dropout { .. }))
    }

    /// Fresh parameters: weights ~ Normal(0, 0.02), biases zero.
    pub fn init_params(&self, rng: &mut impl Rng) -> ParamSet {
        let normal = Normal::new(0.0, 0.02).unwrap();
        let mut params = ParamSet::new();
        for (idx, layer) in self.dense_layers() {
            let (input, output) = layer;
            let w: Vec<f64> = (0..input * output).map(|_| normal.sample(rng)).collect();
            params
                .push(ParamEntry::new(format!("dense{idx}.w"), vec![input, output], w).unwrap())
                .unwrap();
            params
                .push(
                    ParamEntry::new(format!("dense{idx}.b"), vec![output], vec![0.0; output])
                        .unwrap(),
                )
                .unwrap();
        }
        params
    }

    /// Check a parameter set has exactly the entries this architecture expects.
    pub fn check_params(&self, params: &ParamSet) -> Result<()> {
        let expected = self.init_params_shape();
        if !expected.is_aligned_with(params) {
            return Err(Error::Alignment(
                "parameters do not match architecture".into(),
            ));
        }
        Ok(())
    }

    fn init_params_shape(&self) -> ParamSet {
        let mut params = ParamSet::new();
        for (idx, (input, output)) in self.dense_layers() {
            params
                .push(
                    ParamEntry::new(
                        format!("dense{idx}.w"),
                        vec![input, output],
                        vec![0.0; input * output],
                    )
                    .unwrap(),
                )
                .unwrap();
            params
                .push(
                    ParamEntry::new(format!("dense{idx}.b"), vec![output], vec![0.0; output])
                        .unwrap(),
                )
                .unwrap();
        }
        params
    }

    /// Dense layers with their ordinal (index among dense layers only).
    fn dense_layers(&self) -> Vec<(usize, (usize, usize))> {
        self.layers
            .iter()
            .filter_map(|l| match l {
                Layer::Dense { input, output } => Some((*input, *output)),
                _ => None,
            })
            .enumerate()
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn incompatible_dims_rejected() {
        assert!(ArchDescriptor::new(vec![
            Layer::Dense { input: 2, output: 3 },
            Layer::Dense { input: 4, output: 1 },
        ])
        .is_err());
    }

    #[test]
    fn dims_reported() {
        let arch = ArchDescriptor::new(vec![
            Layer::Dense { input: 8, output: 32 },
            Layer::LeakyRelu { slope: 0.2 },
            Layer::Dense { input: 32, output: 2 },
        ])
        .unwrap();
        assert_eq!(arch.input_dim(), 8);
        assert_eq!(arch.output_dim(), 2);
    }

    #[test]
    fn init_params_match_arch() {
        let arch = ArchDescriptor::new(vec![
            Layer::Dense { input: 2, output: 4 },
            Layer::Sigmoid,
            Layer::Dense { input: 4, output: 1 },
        ])
        .unwrap();
        let params = arch.init_params(&mut substream(1, &[]));
        arch.check_params(&params).unwrap();
        assert_eq!(params.len(), 4);
        assert_eq!(params.get("dense0.w").unwrap().shape, vec![2, 4]);
        assert_eq!(params.get("dense1.b").unwrap().values, vec![0.0]);
    }
}
