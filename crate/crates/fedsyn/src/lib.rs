//! Desk-scale simulator of federated GAN training with Laplace-noise
//! differential privacy.
//!
//! Clients train small dense-layer GANs on non-IID shards of a labeled
//! dataset, perturb their parameters with Laplace noise, and a central
//! aggregator forms a noisy weighted average. Synthetic-sample quality is
//! scored with the Fréchet distance between Gaussian fits of sample sets.
//!
//! See the `examples/` directory for one runnable example per capability and
//! the `fedsyn` binary for the experiment harness.

pub mod data;
pub mod error;
pub mod experiment;
pub mod federation;
pub mod gan;
pub mod metrics;
pub mod nn;
pub mod privacy;
pub mod rng;

pub use error::{Error, Result};
