//! Finite-alphabet probability objects and channel algebra.
//!
//! All values are immutable after construction. Validation happens on
//! ingest: masses must already be normalized within [`MASS_TOLERANCE`] and
//! nothing is silently renormalized.

mod alphabet;
mod channel;
mod distribution;
mod joint;
mod wiretap;

pub use alphabet::{sequence_digits, Alphabet};
pub use channel::{bec, bsc, compose, extend, extend_with_cap, product, push_forward, Channel};
pub(crate) use channel::push_forward_raw;
pub use distribution::{make_distribution, Distribution};
pub(crate) use distribution::checked_power;
pub use joint::{marginalize_joint, JointDistribution, Side};
pub use wiretap::WiretapChannel;

/// Row-sum / total-mass tolerance applied when validating inputs.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Default cap on matrix entries for memoryless extensions and sequence
/// enumeration.
pub const DEFAULT_ENTRY_CAP: usize = 1_000_000;
