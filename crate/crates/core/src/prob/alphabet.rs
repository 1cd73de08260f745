use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered, finite set of distinct symbol labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        let mut seen = HashSet::with_capacity(symbols.len());
        for s in &symbols {
            if !seen.insert(s.as_str()) {
                return Err(Error::DuplicateSymbol(s.clone()));
            }
        }
        Ok(Self { symbols })
    }

    /// The alphabet `{0, 1, ..., size-1}` labelled by decimal indices.
    pub fn indexed(size: usize) -> Self {
        assert!(size > 0, "alphabet must be non-empty");
        Self {
            symbols: (0..size).map(|i| i.to_string()).collect(),
        }
    }

    pub fn binary() -> Self {
        Self::indexed(2)
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    /// Cartesian product in lexicographic factor order.
    ///
    /// Labels are concatenated when every label of both factors is a single
    /// character (`"0" x "e" -> "0e"`), and written as `"(a,b)"` otherwise.
    pub fn product(&self, other: &Alphabet) -> Alphabet {
        let compact = self.is_single_char() && other.is_single_char();
        let mut symbols = Vec::with_capacity(self.size() * other.size());
        for a in &self.symbols {
            for b in &other.symbols {
                if compact {
                    symbols.push(format!("{a}{b}"));
                } else {
                    symbols.push(format!("({a},{b})"));
                }
            }
        }
        Alphabet { symbols }
    }

    /// n-fold product with sequence labels. Single-character alphabets give
    /// plain strings such as `"0e1"`.
    pub fn power(&self, n: usize) -> Alphabet {
        assert!(n > 0, "power must be positive");
        if n == 1 {
            return self.clone();
        }
        let size = self.size().pow(n as u32);
        let compact = self.is_single_char();
        let mut symbols = Vec::with_capacity(size);
        for idx in 0..size {
            let digits = sequence_digits(idx, self.size(), n);
            let parts: Vec<&str> = digits.iter().map(|&d| self.symbols[d].as_str()).collect();
            if compact {
                symbols.push(parts.concat());
            } else {
                symbols.push(format!("({})", parts.join(",")));
            }
        }
        Alphabet { symbols }
    }

    fn is_single_char(&self) -> bool {
        self.symbols.iter().all(|s| s.chars().count() == 1)
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.symbols.join(","))
    }
}

impl<'de> Deserialize<'de> for Alphabet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let symbols = Vec::<String>::deserialize(deserializer)?;
        Alphabet::new(symbols).map_err(serde::de::Error::custom)
    }
}

/// Base-`radix` digits of `index`, most significant first, padded to `len`.
pub fn sequence_digits(mut index: usize, radix: usize, len: usize) -> Vec<usize> {
    let mut digits = vec![0; len];
    for slot in digits.iter_mut().rev() {
        *slot = index % radix;
        index /= radix;
    }
    digits
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_empty() {
        assert!(matches!(Alphabet::new(["a", "a"]), Err(Error::DuplicateSymbol(_))));
        assert!(matches!(Alphabet::new(Vec::<String>::new()), Err(Error::EmptyAlphabet)));
    }

    #[test]
    fn product_is_lexicographic() {
        let x = Alphabet::new(["0", "1"]).unwrap();
        let y = Alphabet::new(["0", "e", "1"]).unwrap();
        let p = x.product(&y);
        assert_eq!(p.symbols(), ["00", "0e", "01", "10", "1e", "11"]);
        let long = Alphabet::new(["ab", "c"]).unwrap();
        assert_eq!(long.product(&x).symbol(1), "(ab,1)");
    }

    #[test]
    fn power_matches_repeated_product() {
        let y = Alphabet::new(["0", "e", "1"]).unwrap();
        assert_eq!(y.power(2), y.product(&y));
        assert_eq!(y.power(3).symbol(5), "0e1");
        assert_eq!(sequence_digits(5, 3, 3), vec![0, 1, 2]);
    }
}
