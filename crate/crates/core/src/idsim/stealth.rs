use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::measures::{kl_nats, LogBase};
use crate::prob::{sequence_digits, Distribution, DEFAULT_ENTRY_CAP};

/// Largest blocklength accepted by [`single_letter_stealth_check`].
pub const MAX_STEALTH_BLOCKLENGTH: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StealthChainCheck {
    pub n: usize,
    /// `D(P_{Z^n} || Q_Z^n)`.
    pub lhs: f64,
    /// `n D(P_{Z_T} || Q_Z)` with `P_{Z_T}` the averaged coordinate marginal.
    pub rhs: f64,
    pub holds: bool,
    pub base: LogBase,
}

fn blocklength(len: usize, k: usize) -> Result<usize> {
    let mut size = 1usize;
    for n in 1..=MAX_STEALTH_BLOCKLENGTH {
        size = size.saturating_mul(k);
        if size > DEFAULT_ENTRY_CAP {
            return Err(Error::CapExceeded {
                what: "output sequences".into(),
                needed: size as u128,
                cap: DEFAULT_ENTRY_CAP as u128,
            });
        }
        if size == len {
            return Ok(n);
        }
    }
    Err(mismatch(format!(
        "{len} sequence probabilities is not |Z|^n for |Z| = {k} and n <= {MAX_STEALTH_BLOCKLENGTH}"
    )))
}

/// Compares `D(P_{Z^n} || Q_Z^n)` against `n D(P_{Z_T} || Q_Z)`.
///
/// `p_zn` is indexed over `Z^n`, most significant coordinate first; `n` is
/// inferred from its length.
pub fn single_letter_stealth_check(p_zn: &Distribution, q_z: &Distribution, base: LogBase) -> Result<StealthChainCheck> {
    let k = q_z.len();
    let n = if k == 1 { 1 } else { blocklength(p_zn.len(), k)? };
    if k == 1 && p_zn.len() != 1 {
        return Err(mismatch("a one-letter Q_Z needs a one-point P_{Z^n}"));
    }
    let reference = q_z.iid_power(n, DEFAULT_ENTRY_CAP)?;
    let lhs = kl_nats(p_zn.mass(), reference.mass()).unwrap_or(f64::INFINITY);

    let mut averaged = vec![0.0; k];
    for (index, &mass) in p_zn.mass().iter().enumerate() {
        if mass > 0.0 {
            for z in sequence_digits(index, k, n) {
                averaged[z] += mass / n as f64;
            }
        }
    }
    let rhs = n as f64 * kl_nats(&averaged, q_z.mass()).unwrap_or(f64::INFINITY);
    Ok(StealthChainCheck {
        n,
        lhs: base.from_nats(lhs),
        rhs: base.from_nats(rhs),
        holds: lhs >= rhs - 1e-12,
        base,
    })
}
