//! Exact evaluation of small identification codes and the one-shot converse.

mod code;
mod lemma1;
mod stealth;
mod toy;

pub use code::{evaluate_id_code, evaluate_id_code_in, loglog, stealth_of_code, DecisionSet, IdCode, IdCodeMetrics};
pub use lemma1::{lemma1_dalpha_bound, lemma1_mutinf_bound, Lemma1Bound, Lemma1Params, MAX_DALPHA_OUTPUTS};
pub use stealth::{single_letter_stealth_check, StealthChainCheck, MAX_STEALTH_BLOCKLENGTH};
pub use toy::build_toy_esid_code;

/// Default `eta` in [`Lemma1Params`].
pub const DEFAULT_ETA: f64 = 0.01;
