use serde::{Deserialize, Serialize};

use super::distribution::{check_simplex, checked_power};
use super::{Alphabet, Distribution, DEFAULT_ENTRY_CAP};
use crate::error::{mismatch, Error, Result};

/// A row-stochastic matrix `W(y|x)`: one conditional PMF per input symbol.
///
/// Rows are stored contiguously (row-major). Zero rows and columns are
/// legal; every row must still sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    input: Alphabet,
    output: Alphabet,
    rows: Vec<f64>,
}

impl Channel {
    pub fn new(input: Alphabet, output: Alphabet, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != input.size() {
            return Err(mismatch(format!(
                "{} rows for an input alphabet of size {}",
                rows.len(),
                input.size()
            )));
        }
        let mut flat = Vec::with_capacity(input.size() * output.size());
        for (x, row) in rows.iter().enumerate() {
            if row.len() != output.size() {
                return Err(mismatch(format!(
                    "row {x} has {} entries, output alphabet has {}",
                    row.len(),
                    output.size()
                )));
            }
            check_simplex(row).map_err(|e| match e {
                Error::NotNormalized { sum, tolerance } => Error::InvalidInput(format!(
                    "row {x} sums to {sum}, expected 1 within {tolerance}"
                )),
                other => other,
            })?;
            flat.extend_from_slice(row);
        }
        Ok(Self {
            input,
            output,
            rows: flat,
        })
    }

    /// Flat row-major constructor for internally computed matrices; clamps
    /// round-off negatives and validates.
    pub(crate) fn from_flat(input: Alphabet, output: Alphabet, mut rows: Vec<f64>) -> Result<Self> {
        if rows.len() != input.size() * output.size() {
            return Err(mismatch("flat channel matrix has the wrong length"));
        }
        for r in rows.iter_mut() {
            if *r < 0.0 && *r > -1e-12 {
                *r = 0.0;
            }
        }
        for row in rows.chunks(output.size()) {
            check_simplex(row)?;
        }
        Ok(Self {
            input,
            output,
            rows,
        })
    }

    pub fn identity(alphabet: Alphabet) -> Self {
        let n = alphabet.size();
        let mut rows = vec![0.0; n * n];
        for i in 0..n {
            rows[i * n + i] = 1.0;
        }
        Self {
            input: alphabet.clone(),
            output: alphabet,
            rows,
        }
    }

    /// Every input is mapped to the same output law.
    pub fn constant(input: Alphabet, output: &Distribution) -> Self {
        let mut rows = Vec::with_capacity(input.size() * output.len());
        for _ in 0..input.size() {
            rows.extend_from_slice(output.mass());
        }
        Self {
            input,
            output: output.alphabet().clone(),
            rows,
        }
    }

    /// Deterministic channel `x -> map[x]`.
    pub fn deterministic(input: Alphabet, output: Alphabet, map: &[usize]) -> Result<Self> {
        if map.len() != input.size() {
            return Err(mismatch("deterministic map length differs from input size"));
        }
        let ny = output.size();
        let mut rows = vec![0.0; input.size() * ny];
        for (x, &y) in map.iter().enumerate() {
            if y >= ny {
                return Err(mismatch(format!("map sends {x} to {y}, output size is {ny}")));
            }
            rows[x * ny + y] = 1.0;
        }
        Ok(Self {
            input,
            output,
            rows,
        })
    }

    pub fn input(&self) -> &Alphabet {
        &self.input
    }

    pub fn output(&self) -> &Alphabet {
        &self.output
    }

    pub fn input_size(&self) -> usize {
        self.input.size()
    }

    pub fn output_size(&self) -> usize {
        self.output.size()
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let ny = self.output.size();
        &self.rows[x * ny..(x + 1) * ny]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.chunks(self.output.size())
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.rows[x * self.output.size() + y]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Output law of the input row `x` as a distribution.
    pub fn row_distribution(&self, x: usize) -> Distribution {
        Distribution::from_computed(self.output.clone(), self.row(x).to_vec())
            .expect("channel rows are validated on construction")
    }

    /// Largest absolute entrywise difference; `None` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Channel) -> Option<f64> {
        if self.input_size() != other.input_size() || self.output_size() != other.output_size() {
            return None;
        }
        Some(
            self.rows
                .iter()
                .zip(&other.rows)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }

    pub fn max_row_defect(&self) -> f64 {
        self.rows()
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Binary erasure channel with outputs `{0, e, 1}`.
pub fn bec(eps: f64) -> Result<Channel> {
    check_unit("eps", eps)?;
    Channel::new(
        Alphabet::binary(),
        Alphabet::new(["0", "e", "1"])?,
        vec![vec![1.0 - eps, eps, 0.0], vec![0.0, eps, 1.0 - eps]],
    )
}

/// Binary symmetric channel with crossover probability `q`.
pub fn bsc(q: f64) -> Result<Channel> {
    check_unit("q", q)?;
    Channel::new(
        Alphabet::binary(),
        Alphabet::binary(),
        vec![vec![1.0 - q, q], vec![q, 1.0 - q]],
    )
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        });
    }
    Ok(())
}

/// Cascade `prefix` then `w`: row `u` is `sum_x prefix(x|u) w(.|x)`.
pub fn compose(prefix: &Channel, w: &Channel) -> Result<Channel> {
    if prefix.output != w.input {
        return Err(mismatch(format!(
            "prefix output {} differs from channel input {}",
            prefix.output, w.input
        )));
    }
    let ny = w.output_size();
    let mut rows = vec![0.0; prefix.input_size() * ny];
    for (u, prow) in prefix.rows().enumerate() {
        let out = &mut rows[u * ny..(u + 1) * ny];
        for (x, &p) in prow.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (o, &wv) in out.iter_mut().zip(w.row(x)) {
                *o += p * wv;
            }
        }
    }
    Channel::from_flat(prefix.input.clone(), w.output.clone(), rows)
}

/// Parallel use of two channels on product alphabets.
pub fn product(w1: &Channel, w2: &Channel) -> Channel {
    let (n1, m1) = (w1.input_size(), w1.output_size());
    let (n2, m2) = (w2.input_size(), w2.output_size());
    let mut rows = vec![0.0; n1 * n2 * m1 * m2];
    let ny = m1 * m2;
    for x1 in 0..n1 {
        for x2 in 0..n2 {
            let out = &mut rows[(x1 * n2 + x2) * ny..(x1 * n2 + x2 + 1) * ny];
            for y1 in 0..m1 {
                let a = w1.get(x1, y1);
                for y2 in 0..m2 {
                    out[y1 * m2 + y2] = a * w2.get(x2, y2);
                }
            }
        }
    }
    Channel {
        input: w1.input.product(&w2.input),
        output: w1.output.product(&w2.output),
        rows,
    }
}

/// Memoryless extension `W^n` with lexicographically ordered sequences.
pub fn extend(w: &Channel, n: usize) -> Result<Channel> {
    extend_with_cap(w, n, DEFAULT_ENTRY_CAP)
}

pub fn extend_with_cap(w: &Channel, n: usize, cap: usize) -> Result<Channel> {
    if n == 0 {
        return Err(Error::OutOfRange {
            name: "n",
            value: 0.0,
            range: "n >= 1",
        });
    }
    let entries = (w.input_size() * w.output_size()) as u128;
    let needed = entries.checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > cap as u128 {
        return Err(Error::CapExceeded {
            what: format!(
                "memoryless extension of a {}x{} channel to n = {n}",
                w.input_size(),
                w.output_size()
            ),
            needed,
            cap: cap as u128,
        });
    }
    let nx = checked_power(w.input_size(), n, cap, "input sequences")?;
    let ny = checked_power(w.output_size(), n, cap, "output sequences")?;
    let mut out = w.clone();
    for _ in 1..n {
        out = product(&out, w);
    }
    debug_assert_eq!(out.input_size(), nx);
    debug_assert_eq!(out.output_size(), ny);
    out.input = w.input.power(n);
    out.output = w.output.power(n);
    Ok(out)
}

/// Output law `P W` of input law `p`.
pub fn push_forward(p: &Distribution, w: &Channel) -> Result<Distribution> {
    if p.alphabet() != w.input() {
        return Err(mismatch(format!(
            "distribution on {} pushed through channel with input {}",
            p.alphabet(),
            w.input()
        )));
    }
    Distribution::from_computed(w.output.clone(), push_forward_raw(p.mass(), w))
}

pub(crate) fn push_forward_raw(p: &[f64], w: &Channel) -> Vec<f64> {
    let ny = w.output_size();
    let mut out = vec![0.0; ny];
    for (x, &px) in p.iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        for (o, &wv) in out.iter_mut().zip(w.row(x)) {
            *o += px * wv;
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
pub(crate) struct ChannelRepr {
    pub input: Vec<String>,
    pub output: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Serialize for Channel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ChannelRepr {
            input: self.input.symbols().to_vec(),
            output: self.output.symbols().to_vec(),
            rows: self.to_rows(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Channel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = ChannelRepr::deserialize(deserializer)?;
        let build = || -> Result<Channel> {
            Channel::new(Alphabet::new(repr.input)?, Alphabet::new(repr.output)?, repr.rows)
        };
        build().map_err(serde::de::Error::custom)
    }
}
