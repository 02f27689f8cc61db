//! Server side of the protocol.
//!
//! This module is the aggregation boundary: its only inputs are
//! [`ClientUpdate`] values and noise specs. It has no access to client data
//! partitions or raw samples, which is the privacy premise of the whole
//! protocol; an acceptance test scans this file to keep it that way.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::ParamSet;
use crate::privacy::{perturb, LaplaceSpec};

/// A client's noisy parameters for one round, as received by the server.
#[derive(Debug, Clone)]
pub struct ClientUpdate {
    pub client_id: String,
    pub round: u64,
    /// Client-side Laplace noise already applied.
    pub params: ParamSet,
    pub weight: f64,
}

/// Exact weighted mean of the uploads with weights normalized to sum 1; the
/// noiseless core of [`aggregate`].
pub fn weighted_average(updates: &[ClientUpdate]) -> Result<ParamSet> {
    let first = updates
        .first()
        .ok_or_else(|| Error::Protocol("no client updates to aggregate".into()))?;
    let total_weight: f64 = updates.iter().map(|u| u.weight).sum();
    if !(total_weight > 0.0) || updates.iter().any(|u| !(u.weight > 0.0)) {
        return Err(Error::Protocol("client weights must be positive".into()));
    }
    let mut acc = first.params.zeros_like();
    for update in updates {
        first.params.check_aligned(&update.params)?;
        let w = update.weight / total_weight;
        acc = acc.zip_with(&update.params, |a, p| a + w * p)?;
    }
    Ok(acc)
}

/// Noisy weighted average: normalize the client weights, form the weighted
/// mean of the uploads, then add one server-side Laplace draw per scalar.
pub fn aggregate(
    updates: &[ClientUpdate],
    server_noise: LaplaceSpec,
    rng: &mut ChaCha8Rng,
) -> Result<ParamSet> {
    perturb(&weighted_average(updates)?, server_noise, rng)
}
