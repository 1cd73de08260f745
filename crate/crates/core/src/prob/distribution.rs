use serde::{Deserialize, Serialize};

use super::{Alphabet, MASS_TOLERANCE};
use crate::error::{mismatch, Error, Result};

/// A probability mass function over a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    alphabet: Alphabet,
    mass: Vec<f64>,
}

impl Distribution {
    /// Validates an already-normalized mass vector. Masses must be
    /// non-negative and sum to one within [`MASS_TOLERANCE`]; nothing is
    /// renormalized.
    pub fn new(alphabet: Alphabet, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != alphabet.size() {
            return Err(mismatch(format!(
                "{} masses for an alphabet of size {}",
                mass.len(),
                alphabet.size()
            )));
        }
        check_simplex(&mass)?;
        Ok(Self { alphabet, mass })
    }

    /// Normalizes non-negative weights into a PMF.
    pub fn from_weights(weights: &[f64], alphabet: Alphabet) -> Result<Self> {
        if weights.len() != alphabet.size() {
            return Err(mismatch(format!(
                "{} weights for an alphabet of size {}",
                weights.len(),
                alphabet.size()
            )));
        }
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::NegativeMass { index, value });
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroMass);
        }
        Ok(Self {
            alphabet,
            mass: weights.iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let n = alphabet.size();
        Self {
            alphabet,
            mass: vec![1.0 / n as f64; n],
        }
    }

    pub fn point(alphabet: Alphabet, index: usize) -> Self {
        assert!(index < alphabet.size(), "point index out of range");
        let mut mass = vec![0.0; alphabet.size()];
        mass[index] = 1.0;
        Self { alphabet, mass }
    }

    /// Builds a distribution from a mass vector produced by internal
    /// arithmetic (matrix products, optimizers). Entries within `1e-12` below
    /// zero are clamped; anything else goes through full validation.
    pub(crate) fn from_computed(alphabet: Alphabet, mut mass: Vec<f64>) -> Result<Self> {
        for m in mass.iter_mut() {
            if *m < 0.0 && *m > -1e-12 {
                *m = 0.0;
            }
        }
        Self::new(alphabet, mass)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.mass[index]
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, _)| i)
    }

    /// Product distribution on `self.alphabet x other.alphabet`.
    pub fn product(&self, other: &Distribution) -> Distribution {
        let mut mass = Vec::with_capacity(self.len() * other.len());
        for &a in &self.mass {
            for &b in &other.mass {
                mass.push(a * b);
            }
        }
        Distribution {
            alphabet: self.alphabet.product(&other.alphabet),
            mass,
        }
    }

    /// The i.i.d. law `P^n` on the n-fold product alphabet.
    pub fn iid_power(&self, n: usize, cap: usize) -> Result<Distribution> {
        let size = checked_power(self.len(), n, cap, "i.i.d. power")?;
        let mut mass = vec![1.0; 1];
        for _ in 0..n {
            let mut next = Vec::with_capacity(mass.len() * self.len());
            for &a in &mass {
                for &b in &self.mass {
                    next.push(a * b);
                }
            }
            mass = next;
        }
        debug_assert_eq!(mass.len(), size);
        Ok(Distribution {
            alphabet: self.alphabet.power(n),
            mass,
        })
    }

    /// Mixture `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &Distribution, lambda: f64) -> Result<Distribution> {
        if self.alphabet != other.alphabet {
            return Err(mismatch("mixture of distributions on different alphabets"));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::OutOfRange {
                name: "lambda",
                value: lambda,
                range: "[0, 1]",
            });
        }
        let mass = self
            .mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        Distribution::from_computed(self.alphabet.clone(), mass)
    }

    /// Probability of a set of indices.
    pub fn measure(&self, indices: impl IntoIterator<Item = usize>) -> f64 {
        indices.into_iter().map(|i| self.mass[i]).sum()
    }
}

/// Validates that `mass` lies on the probability simplex.
pub(crate) fn check_simplex(mass: &[f64]) -> Result<()> {
    if let Some((index, &value)) = mass
        .iter()
        .enumerate()
        .find(|(_, m)| !m.is_finite() || **m < 0.0)
    {
        return Err(Error::NegativeMass { index, value });
    }
    let sum: f64 = mass.iter().sum();
    if (sum - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::NotNormalized {
            sum,
            tolerance: MASS_TOLERANCE,
        });
    }
    Ok(())
}

pub(crate) fn checked_power(base: usize, n: usize, cap: usize, what: &str) -> Result<usize> {
    let needed = (base as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > cap as u128 {
        return Err(Error::CapExceeded {
            what: format!("{what} ({base}^{n})"),
            needed,
            cap: cap as u128,
        });
    }
    Ok(needed as usize)
}

#[derive(Deserialize)]
struct DistributionRepr {
    alphabet: Alphabet,
    mass: Vec<f64>,
}

impl<'de> Deserialize<'de> for Distribution {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = DistributionRepr::deserialize(deserializer)?;
        Distribution::new(repr.alphabet, repr.mass).map_err(serde::de::Error::custom)
    }
}

/// Convenience constructor: normalized PMF from weights.
pub fn make_distribution(weights: &[f64], alphabet: Alphabet) -> Result<Distribution> {
    Distribution::from_weights(weights, alphabet)
}
