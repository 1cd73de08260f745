//! Numerical toolkit for effectively-secret identification (ESID) over
//! discrete memoryless wiretap channels.
//!
//! * [`prob`]: distributions, channels and channel algebra.
//! * [`measures`]: entropy, KL divergences, mutual information, `D_alpha`.
//! * [`analysis`]: degradedness and more-capable comparisons.
//! * [`bounds`]: capacity bounds by constrained mutual-information maximization.
//! * [`example`]: the reversely degraded BEC/BSC broadcast example.
//! * [`idsim`]: exact evaluation of small identification codes and the
//!   one-shot converse.
//! * [`checks`]: randomized property suites used by the CLI.

pub mod analysis;
pub mod bounds;
pub mod checks;
pub mod error;
pub mod example;
pub mod idsim;
pub mod measures;
pub mod prob;
mod simplex;

pub use error::{Error, Result};
pub use measures::LogBase;
