//! Entropy, mutual information, KL divergences and the hypothesis-testing
//! divergence `D_alpha`.
//!
//! Everything is computed in nats and converted on the way out; `0 log 0`
//! is taken as zero and divergences sum over the support of the first
//! argument only.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::prob::{push_forward_raw, Channel, Distribution};

/// Logarithm base used to report a measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum LogBase {
    /// Natural logarithm, reported in nats.
    #[default]
    #[serde(rename = "nats", alias = "natural", alias = "e")]
    Natural,
    /// Base two, reported in bits.
    #[serde(rename = "bits", alias = "two", alias = "2")]
    Two,
}

impl LogBase {
    /// Converts a value in nats into this base.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            LogBase::Natural => nats,
            LogBase::Two => nats / LN_2,
        }
    }

    pub fn to_nats(self, value: f64) -> f64 {
        match self {
            LogBase::Natural => value,
            LogBase::Two => value * LN_2,
        }
    }

    pub fn log(self, x: f64) -> f64 {
        self.from_nats(x.ln())
    }

    /// Unit name used in reports: `"nats"` or `"bits"`.
    pub fn unit(self) -> &'static str {
        match self {
            LogBase::Natural => "nats",
            LogBase::Two => "bits",
        }
    }
}

/// A KL-type divergence. `finite == false` marks an absolute-continuity
/// failure, in which case `value` is `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceValue {
    pub value: f64,
    pub finite: bool,
}

impl DivergenceValue {
    fn finite(value: f64) -> Self {
        Self {
            value,
            finite: true,
        }
    }

    fn infinite() -> Self {
        Self {
            value: f64::INFINITY,
            finite: false,
        }
    }
}

/// Reference argument of [`conditional_kl`]: another channel, or a single
/// distribution used as a constant channel.
#[derive(Debug, Clone, Copy)]
pub enum Reference<'a> {
    Channel(&'a Channel),
    Constant(&'a Distribution),
}

pub fn entropy(p: &Distribution, base: LogBase) -> f64 {
    base.from_nats(entropy_nats(p.mass()))
}

pub(crate) fn entropy_nats(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum::<f64>()
}

pub fn binary_entropy(p: f64, base: LogBase) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            range: "[0, 1]",
        });
    }
    Ok(base.from_nats(entropy_nats(&[p, 1.0 - p])))
}

/// `h2` in bits for arguments already known to lie in `[0, 1]`.
pub(crate) fn h2_bits(p: f64) -> f64 {
    entropy_nats(&[p, 1.0 - p]) / LN_2
}

pub fn kl(p: &Distribution, q: &Distribution, base: LogBase) -> Result<DivergenceValue> {
    if p.len() != q.len() {
        return Err(mismatch(format!(
            "KL between alphabets of size {} and {}",
            p.len(),
            q.len()
        )));
    }
    Ok(match kl_nats(p.mass(), q.mass()) {
        Some(v) => DivergenceValue::finite(base.from_nats(v)),
        None => DivergenceValue::infinite(),
    })
}

/// `None` when `p` is not absolutely continuous w.r.t. `q`.
pub(crate) fn kl_nats(p: &[f64], q: &[f64]) -> Option<f64> {
    let mut total = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return None;
            }
            total += a * (a / b).ln();
        }
    }
    Some(total)
}

/// `D(W || V | P) = E_P[ D(W(.|X) || V(.|X)) ]`.
pub fn conditional_kl(
    w: &Channel,
    v: Reference<'_>,
    p: &Distribution,
    base: LogBase,
) -> Result<DivergenceValue> {
    if p.alphabet() != w.input() {
        return Err(mismatch("input law and channel use different alphabets"));
    }
    match v {
        Reference::Channel(v) => {
            if v.input_size() != w.input_size() || v.output_size() != w.output_size() {
                return Err(mismatch("conditional KL between channels of different shape"));
            }
        }
        Reference::Constant(q) => {
            if q.len() != w.output_size() {
                return Err(mismatch("constant reference has the wrong output size"));
            }
        }
    }
    let mut total = 0.0;
    for x in p.support() {
        let reference = match v {
            Reference::Channel(v) => v.row(x),
            Reference::Constant(q) => q.mass(),
        };
        match kl_nats(w.row(x), reference) {
            Some(d) => total += p.get(x) * d,
            None => return Ok(DivergenceValue::infinite()),
        }
    }
    Ok(DivergenceValue::finite(base.from_nats(total)))
}

/// `I(X; Y)` for `X ~ p`, `Y ~ W(.|X)`, evaluated as `D(W || PW | P)`.
pub fn mutual_information(p: &Distribution, w: &Channel, base: LogBase) -> Result<f64> {
    if p.alphabet() != w.input() {
        return Err(mismatch("input law and channel use different alphabets"));
    }
    Ok(base.from_nats(mutual_information_nats(p.mass(), w)))
}

pub(crate) fn mutual_information_nats(p: &[f64], w: &Channel) -> f64 {
    let py = push_forward_raw(p, w);
    let mut total = 0.0;
    for (x, &px) in p.iter().enumerate() {
        if px <= 0.0 {
            continue;
        }
        for (&wy, &qy) in w.row(x).iter().zip(&py) {
            if wy > 0.0 {
                total += px * wy * (wy / qy).ln();
            }
        }
    }
    total.max(0.0)
}

/// Hypothesis-testing divergence
/// `D_alpha(P || Q) = sup { g : P(log P/Q <= g) <= alpha }`, evaluated exactly
/// on the finitely many log-likelihood-ratio atoms of `P`.
///
/// The returned value is the atom at which the cumulative `P`-mass first
/// exceeds `alpha`.
pub fn d_alpha(p: &Distribution, q: &Distribution, alpha: f64, base: LogBase) -> Result<f64> {
    if p.len() != q.len() {
        return Err(mismatch("D_alpha between alphabets of different size"));
    }
    d_alpha_nats(p.mass(), q.mass(), alpha).map(|v| base.from_nats(v))
}

pub(crate) fn d_alpha_nats(p: &[f64], q: &[f64], alpha: f64) -> Result<f64> {
    let atoms = llr_atoms(p, q)?;
    d_alpha_from_atoms(atoms, alpha)
}

/// `(log p/q, p)` for every point of the support of `p`.
pub(crate) fn llr_atoms(p: &[f64], q: &[f64]) -> Result<Vec<(f64, f64)>> {
    let mut atoms = Vec::with_capacity(p.len());
    for (index, (&a, &b)) in p.iter().zip(q).enumerate() {
        if a > 0.0 {
            if b <= 0.0 {
                return Err(Error::SupportViolation { index });
            }
            atoms.push(((a / b).ln(), a));
        }
    }
    Ok(atoms)
}

pub(crate) fn d_alpha_from_atoms(mut atoms: Vec<(f64, f64)>, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cumulative = 0.0;
    for (value, mass) in atoms {
        cumulative += mass;
        if cumulative > alpha {
            return Ok(value);
        }
    }
    // Total mass is one and alpha < 1, so this is only reachable through
    // round-off on a deficient mass vector.
    Err(Error::NoAdmissibleGamma)
}
