use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::measures::{kl_nats, LogBase};
use crate::prob::{checked_power, extend_with_cap, push_forward_raw, Alphabet, Channel, Distribution, DEFAULT_ENTRY_CAP};

/// Acceptance region `D_m`, as a sorted set of output-sequence indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DecisionSet(Vec<usize>);

impl DecisionSet {
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    /// `P(D)` for a law on the enumerated output sequences.
    fn measure(&self, law: &[f64]) -> f64 {
        self.0.iter().map(|&i| law[i]).sum()
    }
}

/// An identification code `{(E_m, D_m)}` at blocklength `n`.
///
/// Encoders are laws on `X^n` and decision sets are index sets into `Y^n`,
/// both enumerated most-significant coordinate first. Decision sets of
/// different messages may overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct IdCode {
    n: usize,
    input: Alphabet,
    encoders: Vec<Distribution>,
    decision_sets: Vec<DecisionSet>,
}

impl IdCode {
    pub fn new(n: usize, input: Alphabet, encoders: Vec<Vec<f64>>, decision_sets: Vec<DecisionSet>) -> Result<Self> {
        if n == 0 {
            return Err(Error::OutOfRange {
                name: "n",
                value: 0.0,
                range: "[1, inf)",
            });
        }
        if encoders.len() < 2 {
            return Err(Error::InvalidInput(format!("an ID code needs M >= 2 messages, got {}", encoders.len())));
        }
        if decision_sets.len() != encoders.len() {
            return Err(mismatch(format!(
                "{} encoders but {} decision sets",
                encoders.len(),
                decision_sets.len()
            )));
        }
        checked_power(input.size(), n, DEFAULT_ENTRY_CAP, "input sequences")?;
        let seq = input.power(n);
        let encoders = encoders
            .into_iter()
            .enumerate()
            .map(|(m, e)| {
                if e.len() != seq.size() {
                    return Err(mismatch(format!(
                        "encoder {m} has {} entries, expected {}",
                        e.len(),
                        seq.size()
                    )));
                }
                Distribution::new(seq.clone(), e)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n,
            input,
            encoders,
            decision_sets,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn input(&self) -> &Alphabet {
        &self.input
    }

    pub fn size(&self) -> usize {
        self.encoders.len()
    }

    pub fn encoders(&self) -> &[Distribution] {
        &self.encoders
    }

    pub fn decision_sets(&self) -> &[DecisionSet] {
        &self.decision_sets
    }

    /// Output laws `E_m W^n` for every message.
    pub(crate) fn output_laws(&self, w: &Channel) -> Result<Vec<Vec<f64>>> {
        if w.input() != &self.input {
            return Err(mismatch("code input alphabet differs from the channel input"));
        }
        let wn = extend_with_cap(w, self.n, DEFAULT_ENTRY_CAP)?;
        Ok(self.encoders.iter().map(|e| push_forward_raw(e.mass(), &wn)).collect())
    }
}

#[derive(Serialize, Deserialize)]
struct IdCodeRepr {
    n: usize,
    input: Alphabet,
    encoders: Vec<Vec<f64>>,
    decision_sets: Vec<DecisionSet>,
}

impl Serialize for IdCode {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        IdCodeRepr {
            n: self.n,
            input: self.input.clone(),
            encoders: self.encoders.iter().map(|e| e.mass().to_vec()).collect(),
            decision_sets: self.decision_sets.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IdCode {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let r = IdCodeRepr::deserialize(deserializer)?;
        let sets = r.decision_sets.into_iter().map(|d| DecisionSet::new(d.0)).collect();
        IdCode::new(r.n, r.input, r.encoders, sets).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdCodeMetrics {
    /// Missed identification: `1 - min_m (E_m W^n)(D_m)`.
    pub lambda1: f64,
    /// False identification: `max_{m != m'} (E_m W^n)(D_m')`.
    pub lambda2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stealth_delta: Option<f64>,
    pub m: usize,
    pub n: usize,
    /// `(1/n) log log M`.
    pub rate: f64,
    pub base: LogBase,
}

/// `log log M` in the given base; `-inf` for `M = 1`.
pub fn loglog(m: f64, base: LogBase) -> f64 {
    base.log(base.log(m))
}

/// Exact error probabilities of `code` over `legit`, by enumeration.
pub fn evaluate_id_code(code: &IdCode, legit: &Channel) -> Result<IdCodeMetrics> {
    evaluate_id_code_in(code, legit, LogBase::Natural)
}

pub fn evaluate_id_code_in(code: &IdCode, legit: &Channel, base: LogBase) -> Result<IdCodeMetrics> {
    let laws = code.output_laws(legit)?;
    let ny = laws[0].len();
    for (m, d) in code.decision_sets.iter().enumerate() {
        if let Some(&bad) = d.indices().last().filter(|&&i| i >= ny) {
            return Err(mismatch(format!(
                "decision set {m} contains index {bad} but there are only {ny} output sequences"
            )));
        }
    }
    let mut lambda1: f64 = 0.0;
    let mut lambda2: f64 = 0.0;
    for (m, law) in laws.iter().enumerate() {
        for (mp, d) in code.decision_sets.iter().enumerate() {
            let mass = d.measure(law).clamp(0.0, 1.0);
            if m == mp {
                lambda1 = lambda1.max(1.0 - mass);
            } else {
                lambda2 = lambda2.max(mass);
            }
        }
    }
    Ok(IdCodeMetrics {
        lambda1: lambda1.clamp(0.0, 1.0),
        lambda2,
        stealth_delta: None,
        m: code.size(),
        n: code.n,
        rate: loglog(code.size() as f64, base) / code.n as f64,
        base,
    })
}

/// `max_m D(E_m W_Z^n || Q_Z^n)`.
pub fn stealth_of_code(code: &IdCode, eaves: &Channel, q_z: &Distribution, base: LogBase) -> Result<f64> {
    if q_z.alphabet() != eaves.output() {
        return Err(mismatch("Q_Z is not a law on the eavesdropper output"));
    }
    let reference = q_z.iid_power(code.n, DEFAULT_ENTRY_CAP)?;
    let mut worst: f64 = 0.0;
    for law in code.output_laws(eaves)? {
        match kl_nats(&law, reference.mass()) {
            Some(d) => worst = worst.max(d),
            None => {
                let index = law
                    .iter()
                    .zip(reference.mass())
                    .position(|(a, b)| *a > 0.0 && *b <= 0.0)
                    .unwrap_or(0);
                return Err(Error::SupportViolation { index });
            }
        }
    }
    Ok(base.from_nats(worst))
}
