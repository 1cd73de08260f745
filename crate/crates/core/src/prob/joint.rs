use serde::{Deserialize, Serialize};

use super::distribution::check_simplex;
use super::{Alphabet, Channel, Distribution};
use crate::error::{mismatch, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// A PMF on `left x right`, stored row-major (one row per left symbol).
///
/// Used for `P_{UX}`: the auxiliary variable `U` reaches the channel outputs
/// only through `X`, so the Markov chain `U - X - YZ` holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    left: Alphabet,
    right: Alphabet,
    mass: Vec<f64>,
}

impl JointDistribution {
    pub fn new(left: Alphabet, right: Alphabet, mass: Vec<Vec<f64>>) -> Result<Self> {
        if mass.len() != left.size() || mass.iter().any(|r| r.len() != right.size()) {
            return Err(mismatch(format!(
                "joint mass must be {}x{}",
                left.size(),
                right.size()
            )));
        }
        Self::from_flat(left, right, mass.concat())
    }

    pub(crate) fn from_flat(left: Alphabet, right: Alphabet, mut mass: Vec<f64>) -> Result<Self> {
        if mass.len() != left.size() * right.size() {
            return Err(mismatch("flat joint mass has the wrong length"));
        }
        for m in mass.iter_mut() {
            if *m < 0.0 && *m > -1e-12 {
                *m = 0.0;
            }
        }
        check_simplex(&mass)?;
        Ok(Self { left, right, mass })
    }

    /// `P_U(u) P_{X|U}(x|u)`.
    pub fn from_marginal_and_channel(p_u: &Distribution, prefix: &Channel) -> Result<Self> {
        if p_u.alphabet() != prefix.input() {
            return Err(mismatch("marginal alphabet differs from prefix input"));
        }
        let mut mass = Vec::with_capacity(p_u.len() * prefix.output_size());
        for (u, &pu) in p_u.mass().iter().enumerate() {
            mass.extend(prefix.row(u).iter().map(|w| pu * w));
        }
        Self::from_flat(p_u.alphabet().clone(), prefix.output().clone(), mass)
    }

    pub fn left(&self) -> &Alphabet {
        &self.left
    }

    pub fn right(&self) -> &Alphabet {
        &self.right
    }

    pub fn get(&self, u: usize, x: usize) -> f64 {
        self.mass[u * self.right.size() + x]
    }

    pub fn row(&self, u: usize) -> &[f64] {
        let n = self.right.size();
        &self.mass[u * n..(u + 1) * n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.mass.chunks(self.right.size()).map(<[f64]>::to_vec).collect()
    }

    pub fn marginal(&self, side: Side) -> Distribution {
        let (nl, nr) = (self.left.size(), self.right.size());
        let mass = match side {
            Side::Left => self.mass.chunks(nr).map(|r| r.iter().sum()).collect(),
            Side::Right => {
                let mut out = vec![0.0; nr];
                for row in self.mass.chunks(nr) {
                    for (o, v) in out.iter_mut().zip(row) {
                        *o += v;
                    }
                }
                out
            }
        };
        let alphabet = match side {
            Side::Left => self.left.clone(),
            Side::Right => self.right.clone(),
        };
        debug_assert!(nl > 0);
        Distribution::from_computed(alphabet, mass).expect("marginal of a valid joint")
    }

    /// `P_{X|U=u}`, or `None` when `P_U(u) = 0`.
    pub fn conditional(&self, u: usize) -> Option<Distribution> {
        let row = self.row(u);
        let total: f64 = row.iter().sum();
        if total <= 0.0 {
            return None;
        }
        Distribution::from_computed(self.right.clone(), row.iter().map(|v| v / total).collect()).ok()
    }

    /// The prefix channel `P_{X|U}`; rows with `P_U(u) = 0` are filled with
    /// the `X` marginal so the result stays row-stochastic.
    pub fn conditional_channel(&self) -> Channel {
        let fallback = self.marginal(Side::Right);
        let mut rows = Vec::with_capacity(self.mass.len());
        for u in 0..self.left.size() {
            match self.conditional(u) {
                Some(d) => rows.extend_from_slice(d.mass()),
                None => rows.extend_from_slice(fallback.mass()),
            }
        }
        Channel::from_flat(self.left.clone(), self.right.clone(), rows)
            .expect("conditional rows of a valid joint")
    }
}

pub fn marginalize_joint(j: &JointDistribution, side: Side) -> Distribution {
    j.marginal(side)
}

#[derive(Serialize, Deserialize)]
struct JointRepr {
    left: Alphabet,
    right: Alphabet,
    mass: Vec<Vec<f64>>,
}

impl Serialize for JointDistribution {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        JointRepr {
            left: self.left.clone(),
            right: self.right.clone(),
            mass: self.to_rows(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for JointDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let r = JointRepr::deserialize(deserializer)?;
        JointDistribution::new(r.left, r.right, r.mass).map_err(serde::de::Error::custom)
    }
}
