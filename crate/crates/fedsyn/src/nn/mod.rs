//! Minimal dense neural-network engine with hand-derived gradients.
//!
//! Everything runs at 64-bit precision; 32-bit floats appear only at the
//! serialization boundary. Forward passes produce a [`Tape`] holding exactly
//! the activations the backward pass needs, and gradients are checked against
//! central finite differences in the test suite.

mod adam;
mod arch;
mod loss;
mod net;
mod params;

pub use adam::{adam_step, AdamHyper, AdamState};
pub use arch::{ArchDescriptor, Layer};
pub use loss::bce_loss;
pub use net::{backward, forward, Mode, Tape};
pub use params::{ParamEntry, ParamSet};
