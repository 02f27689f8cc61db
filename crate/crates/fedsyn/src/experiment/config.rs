use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::AdamHyper;

fn default_modes() -> usize {
    10
}
fn default_radius() -> f64 {
    1.0
}
fn default_sigma() -> f64 {
    0.05
}
fn default_n() -> usize {
    3000
}

/// Where training data comes from: the procedural ring mixture or an IDX
/// image/label file pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DatasetSpec {
    Ring {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_modes")]
        modes: usize,
        #[serde(default = "default_radius")]
        radius: f64,
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    Idx {
        images: PathBuf,
        labels: PathBuf,
    },
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec::Ring {
            n: default_n(),
            modes: default_modes(),
            radius: default_radius(),
            sigma: default_sigma(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PartitionSpec {
    pub groups: Vec<Vec<u32>>,
    pub sizes: Vec<usize>,
}

impl Default for PartitionSpec {
    fn default() -> Self {
        // Three-way label split with 0.3/0.4/0.3 weights.
        Self {
            groups: vec![vec![0, 1, 2], vec![3, 4, 5, 6], vec![7, 8, 9]],
            sizes: vec![900, 1200, 900],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GanSpec {
    pub latent_dim: usize,
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub beta1: f64,
}

impl Default for GanSpec {
    fn default() -> Self {
        Self {
            latent_dim: 8,
            hidden: 32,
            epochs: 50,
            batch_size: 256,
            lr: 0.0002,
            beta1: 0.5,
        }
    }
}

impl GanSpec {
    pub fn adam(&self) -> AdamHyper {
        AdamHyper {
            lr: self.lr,
            beta1: self.beta1,
            ..AdamHyper::default()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FederationSpec {
    pub rounds: u64,
    pub local_epochs: usize,
    pub client_lambda: f64,
    pub server_lambda: f64,
    #[serde(default = "crate::experiment::config::default_true")]
    pub perturb_discriminator: bool,
    /// Client ids that simulate a failure (testing knob).
    #[serde(default)]
    pub fail_clients: Vec<String>,
}

pub(crate) fn default_true() -> bool {
    true
}

impl Default for FederationSpec {
    fn default() -> Self {
        Self {
            rounds: 1,
            local_epochs: 50,
            client_lambda: 1e-4,
            server_lambda: 1e-12,
            perturb_discriminator: true,
            fail_clients: Vec::new(),
        }
    }
}

fn default_lambdas() -> Vec<f64> {
    vec![1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
}

fn default_eval_samples() -> usize {
    2000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    /// Sample count per side of the Fréchet comparison.
    #[serde(default = "default_eval_samples")]
    pub eval_samples: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            lambdas: default_lambdas(),
            eval_samples: default_eval_samples(),
        }
    }
}

/// Full experiment configuration; every command reads one of these from a
/// TOML file. Command-line flags (`--seed`, `--out`) override file values.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub partition: PartitionSpec,
    pub gan: GanSpec,
    pub federation: FederationSpec,
    pub sweep: SweepSpec,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: ExperimentConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if let DatasetSpec::Idx { images, labels } = &self.dataset {
            for p in [images, labels] {
                if !p.exists() {
                    return Err(Error::Config(format!("missing file {}", p.display())));
                }
            }
        }
        if self.sweep.lambdas.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::Config("sweep lambdas must be > 0".into()));
        }
        if self.federation.rounds == 0 {
            return Err(Error::Config("federation.rounds must be >= 1".into()));
        }
        if self.partition.groups.len() != self.partition.sizes.len() {
            return Err(Error::Config(
                "partition groups and sizes differ in length".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_empty_toml() {
        let config: ExperimentConfig = toml::from_str("").unwrap();
        assert_eq!(config.gan.latent_dim, 8);
        assert_eq!(config.sweep.lambdas.len(), 7);
        assert!(matches!(config.dataset, DatasetSpec::Ring { n: 3000, .. }));
    }

    #[test]
    fn ring_overrides_parse() {
        let config: ExperimentConfig = toml::from_str(
            r#"
            seed = 9
            [dataset]
            kind = "ring"
            n = 500
            sigma = 0.1
            [gan]
            epochs = 5
            "#,
        )
        .unwrap();
        assert_eq!(config.seed, 9);
        assert_eq!(config.gan.epochs, 5);
        match config.dataset {
            DatasetSpec::Ring { n, sigma, .. } => {
                assert_eq!(n, 500);
                assert_eq!(sigma, 0.1);
            }
            _ => panic!("expected ring"),
        }
    }

    #[test]
    fn bad_lambda_rejected() {
        let config: ExperimentConfig = toml::from_str(
            r#"
            [sweep]
            lambdas = [0.0]
            "#,
        )
        .unwrap();
        assert!(config.validate().is_err());
    }
}
