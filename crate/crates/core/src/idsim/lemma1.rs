//! The one-shot identification converse
//! `log log M <= max_{P in hull} min_Q D_alpha(P x W || P (x) Q) + eps
//!            <= max_{P in hull} I(P, W) / (1 - alpha) + eps`
//! evaluated over the convex hull of a code's encoders.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::code::{loglog, IdCode};
use crate::error::{Error, Result};
use crate::measures::{d_alpha_from_atoms, kl_nats, LogBase};
use crate::prob::{extend_with_cap, push_forward_raw, Channel, DEFAULT_ENTRY_CAP};
use crate::simplex::{composition_count, compositions, dirichlet_one, project_simplex};

/// Largest `|Y|^n` accepted by [`lemma1_dalpha_bound`].
pub const MAX_DALPHA_OUTPUTS: usize = 32;
/// Budget of grid points for the inner minimization over `Q`.
const Q_GRID_BUDGET: u128 = 20_000;
const HULL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Params {
    alpha: f64,
    eta: f64,
    lambda1: f64,
    lambda2: f64,
}

impl Lemma1Params {
    /// Sets `alpha = lambda1 + lambda2 + 2 eta`, which must be below one.
    pub fn new(lambda1: f64, lambda2: f64, eta: f64) -> Result<Self> {
        for (name, v) in [("lambda1", lambda1), ("lambda2", lambda2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange {
                    name,
                    value: v,
                    range: "[0, 1]",
                });
            }
        }
        if eta.is_nan() || eta <= 0.0 {
            return Err(Error::OutOfRange {
                name: "eta",
                value: eta,
                range: "(0, inf)",
            });
        }
        let alpha = lambda1 + lambda2 + 2.0 * eta;
        if alpha >= 1.0 {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        Ok(Self {
            alpha,
            eta,
            lambda1,
            lambda2,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    /// `log log |X^n| + 3 log(1/eta) + 2`.
    pub fn epsilon(&self, input_sequences: usize, base: LogBase) -> f64 {
        loglog(input_sequences as f64, base) + 3.0 * base.log(1.0 / self.eta) + 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Bound {
    /// Right-hand side of the converse, including `epsilon`.
    pub bound: f64,
    /// The optimized hull term, before scaling and slack.
    pub hull_value: f64,
    pub epsilon: f64,
    pub loglog_m: f64,
    /// `bound - loglog_m`.
    pub slack: f64,
    pub holds: bool,
    /// Mixture weights over the encoders at the optimum.
    pub weights: Vec<f64>,
    /// For the `D_alpha` form: the mutual-information form it is compared to.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mutinf_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub below_mutinf: Option<bool>,
    pub base: LogBase,
}

struct Hull {
    /// Encoders as rows over `X^n`.
    encoders: Vec<Vec<f64>>,
    /// `W^n` rows over `Y^n`.
    wn: Channel,
}

impl Hull {
    fn new(code: &IdCode, legit: &Channel) -> Result<Self> {
        if legit.input() != code.input() {
            return Err(crate::error::mismatch("code input alphabet differs from the channel input"));
        }
        Ok(Self {
            encoders: code.encoders().iter().map(|e| e.mass().to_vec()).collect(),
            wn: extend_with_cap(legit, code.n(), DEFAULT_ENTRY_CAP)?,
        })
    }

    fn mix(&self, v: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.encoders[0].len()];
        for (vm, e) in v.iter().zip(&self.encoders) {
            if *vm > 0.0 {
                for (a, b) in p.iter_mut().zip(e) {
                    *a += vm * b;
                }
            }
        }
        p
    }

    /// `I(P_v, W^n)` and its gradient in `v` (up to a constant).
    fn info(&self, v: &[f64]) -> (f64, Vec<f64>) {
        let p = self.mix(v);
        let py = push_forward_raw(&p, &self.wn);
        let d: Vec<f64> = (0..p.len())
            .map(|x| kl_nats(self.wn.row(x), &py).unwrap_or(0.0))
            .collect();
        let value: f64 = p.iter().zip(&d).map(|(a, b)| a * b).sum();
        let grad = self
            .encoders
            .iter()
            .map(|e| e.iter().zip(&d).map(|(a, b)| a * b).sum())
            .collect();
        (value.max(0.0), grad)
    }

    fn maximize_info(&self) -> (f64, Vec<f64>) {
        let m = self.encoders.len();
        let mut v = vec![1.0 / m as f64; m];
        let (mut value, mut grad) = self.info(&v);
        let mut step = 1.0;
        for _ in 0..20_000 {
            // Concavity gives I* <= I(v) + max_m g_m - <g, v>.
            let gap = grad.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - grad.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
            if gap < HULL_TOL * 1e-2 {
                break;
            }
            let mut accepted = false;
            while step > 1e-14 {
                let mut trial: Vec<f64> = v.iter().zip(&grad).map(|(a, g)| a + step * g).collect();
                project_simplex(&mut trial);
                let (tv, tg) = self.info(&trial);
                let lin: f64 = grad.iter().zip(trial.iter().zip(&v)).map(|(g, (a, b))| g * (a - b)).sum();
                if tv >= value + 1e-4 * lin && tv >= value {
                    v = trial;
                    value = tv;
                    grad = tg;
                    step *= 2.0;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        (value, v)
    }

    /// `D_alpha(P x W^n || P (x) Q)` in nats, `None` when `Q` misses support.
    fn dalpha(&self, p: &[f64], q: &[f64], alpha: f64) -> Option<f64> {
        let mut atoms = Vec::new();
        for (x, &px) in p.iter().enumerate() {
            if px <= 0.0 {
                continue;
            }
            for (y, &w) in self.wn.row(x).iter().enumerate() {
                if w > 0.0 {
                    if q[y] <= 0.0 {
                        return None;
                    }
                    atoms.push(((w / q[y]).ln(), px * w));
                }
            }
        }
        d_alpha_from_atoms(atoms, alpha).ok()
    }

    /// `min_Q D_alpha(P x W^n || P (x) Q)` by an interior grid plus local
    /// pairwise mass transfers. `P_Y` is always among the candidates.
    fn min_over_q(&self, p: &[f64], alpha: f64, grid: &[Vec<f64>]) -> (f64, Vec<f64>) {
        let py = push_forward_raw(p, &self.wn);
        let k = py.len();
        let mut best = (f64::INFINITY, py.clone());
        let uniform = vec![1.0 / k as f64; k];
        for q in std::iter::once(&py).chain(std::iter::once(&uniform)).chain(grid) {
            if let Some(v) = self.dalpha(p, q, alpha) {
                if v < best.0 {
                    best = (v, q.clone());
                }
            }
        }
        let (mut value, mut q) = best;
        let mut delta = 0.05;
        while delta > 1e-7 {
            let mut improved = false;
            for i in 0..k {
                for j in 0..k {
                    if i == j || q[j] <= delta {
                        continue;
                    }
                    let mut t = q.clone();
                    t[i] += delta;
                    t[j] -= delta;
                    if let Some(v) = self.dalpha(p, &t, alpha) {
                        if v < value - 1e-15 {
                            value = v;
                            q = t;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                delta *= 0.5;
            }
        }
        (value, q)
    }
}

fn interior_grid(k: usize, resolution: usize) -> Vec<Vec<f64>> {
    let mut r = resolution;
    while r > 0 && composition_count(k, r) > Q_GRID_BUDGET {
        r -= 1;
    }
    let total = (r + k) as f64;
    compositions(k, r)
        .into_iter()
        .map(|c| c.iter().map(|&n| (n + 1) as f64 / total).collect())
        .collect()
}

/// Mutual-information form of the converse:
/// `max_{P in hull} I(P, W^n) / (1 - alpha) + eps`.
pub fn lemma1_mutinf_bound(code: &IdCode, legit: &Channel, params: &Lemma1Params, base: LogBase) -> Result<Lemma1Bound> {
    let hull = Hull::new(code, legit)?;
    let (value, weights) = hull.maximize_info();
    let hull_value = base.from_nats(value);
    let epsilon = params.epsilon(hull.wn.input_size(), base);
    let bound = hull_value / (1.0 - params.alpha) + epsilon;
    let loglog_m = loglog(code.size() as f64, base);
    Ok(Lemma1Bound {
        bound,
        hull_value,
        epsilon,
        loglog_m,
        slack: bound - loglog_m,
        holds: loglog_m <= bound,
        weights,
        mutinf_bound: None,
        below_mutinf: None,
        base,
    })
}

/// Hypothesis-testing form of the converse:
/// `max_{P in hull} min_Q D_alpha(P x W^n || P (x) Q) + eps`.
///
/// The outer maximization is a deterministic multi-start search over hull
/// weights; the inner minimum uses an interior grid with `q_grid`
/// subdivisions (coarsened if needed) refined by local descent. The result
/// is compared against [`lemma1_mutinf_bound`] in `below_mutinf`.
pub fn lemma1_dalpha_bound(
    code: &IdCode,
    legit: &Channel,
    params: &Lemma1Params,
    q_grid: usize,
    base: LogBase,
) -> Result<Lemma1Bound> {
    let hull = Hull::new(code, legit)?;
    let ny = hull.wn.output_size();
    if ny > MAX_DALPHA_OUTPUTS {
        return Err(Error::AlphabetTooLarge {
            what: "output sequences for the D_alpha bound",
            size: ny,
            max: MAX_DALPHA_OUTPUTS,
        });
    }
    let alpha = params.alpha;
    let grid = interior_grid(ny, q_grid.max(1));
    let objective = |v: &[f64]| hull.min_over_q(&hull.mix(v), alpha, &grid).0;

    let m = code.size();
    let (_, info_weights) = hull.maximize_info();
    let mut starts: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut e = vec![0.0; m];
            e[i] = 1.0;
            e
        })
        .collect();
    starts.push(vec![1.0 / m as f64; m]);
    starts.push(info_weights);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    starts.extend((0..8).map(|_| dirichlet_one(&mut rng, m)));

    let mut best = (f64::NEG_INFINITY, starts[0].clone());
    for s in &starts {
        let v = objective(s);
        if v > best.0 {
            best = (v, s.clone());
        }
    }
    // Local perturbation around the incumbent.
    let mut radius = 0.2;
    while radius > 1e-3 {
        let mut improved = false;
        for _ in 0..6 {
            let mut t: Vec<f64> = best.1.iter().map(|a| a + radius * rng.random_range(-1.0..1.0)).collect();
            project_simplex(&mut t);
            let v = objective(&t);
            if v > best.0 + 1e-12 {
                best = (v, t);
                improved = true;
            }
        }
        if !improved {
            radius *= 0.5;
        }
    }

    let hull_value = base.from_nats(best.0);
    let epsilon = params.epsilon(hull.wn.input_size(), base);
    let bound = hull_value + epsilon;
    let loglog_m = loglog(m as f64, base);
    let mutinf = lemma1_mutinf_bound(code, legit, params, base)?.bound;
    Ok(Lemma1Bound {
        bound,
        hull_value,
        epsilon,
        loglog_m,
        slack: bound - loglog_m,
        holds: loglog_m <= bound,
        weights: best.1,
        mutinf_bound: Some(mutinf),
        below_mutinf: Some(bound <= mutinf + 1e-6),
        base,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::idsim::code::DecisionSet;
    use crate::prob::Alphabet;

    fn perfect_pair() -> IdCode {
        IdCode::new(
            1,
            Alphabet::binary(),
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![DecisionSet::new(vec![0]), DecisionSet::new(vec![1])],
        )
        .unwrap()
    }

    #[test]
    fn params_enforce_alpha() {
        assert!(Lemma1Params::new(0.4, 0.4, 0.1).is_err());
        let p = Lemma1Params::new(0.1, 0.2, 0.05).unwrap();
        assert!((p.alpha() - 0.4).abs() < 1e-15);
        // |X^n| = 2, eta = 1/2 in bits: 0 + 3 + 2.
        let q = Lemma1Params::new(0.0, 0.0, 0.25).unwrap();
        assert!((q.epsilon(2, LogBase::Two) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_code_hull_optimum_is_one_bit() {
        let id = Channel::identity(Alphabet::binary());
        let p = Lemma1Params::new(0.0, 0.0, 0.05).unwrap();
        let b = lemma1_mutinf_bound(&perfect_pair(), &id, &p, LogBase::Two).unwrap();
        assert!((b.hull_value - 1.0).abs() < 1e-9);
        assert!((b.weights[0] - 0.5).abs() < 1e-4);
        assert!(b.holds && b.loglog_m == 0.0);
    }

    #[test]
    fn degenerate_hull() {
        let code = IdCode::new(
            1,
            Alphabet::binary(),
            vec![vec![0.3, 0.7], vec![0.3, 0.7]],
            vec![DecisionSet::new(vec![0]), DecisionSet::new(vec![1])],
        )
        .unwrap();
        let w = crate::prob::bsc(0.2).unwrap();
        let p = Lemma1Params::new(0.1, 0.1, 0.01).unwrap();
        let b = lemma1_mutinf_bound(&code, &w, &p, LogBase::Natural).unwrap();
        let i = crate::measures::mutual_information_nats(&[0.3, 0.7], &w);
        assert!((b.hull_value - i).abs() < 1e-12);
        // Product hull point: X independent of Y gives D_alpha 0 at Q = P_Y.
        // Skewing Q pushes the lower atom below zero, so the minimum is negative.
        let constant = Channel::constant(Alphabet::binary(), &crate::prob::Distribution::uniform(Alphabet::binary()));
        let hull = Hull::new(&code, &constant).unwrap();
        assert_eq!(hull.dalpha(&[0.3, 0.7], &[0.5, 0.5], p.alpha()), Some(0.0));
        let d = lemma1_dalpha_bound(&code, &constant, &p, 16, LogBase::Natural).unwrap();
        assert!(d.hull_value <= 0.0 && d.hull_value > -(2f64.ln()) - 1e-9);
        assert!(d.bound <= d.epsilon);
    }

    #[test]
    fn noiseless_midpoint_atoms() {
        // At the hull midpoint of the perfect pair, the log-ratio against a
        // uniform Q is log 2 on both atoms.
        let id = Channel::identity(Alphabet::binary());
        let hull = Hull::new(&perfect_pair(), &id).unwrap();
        let v = hull.dalpha(&[0.5, 0.5], &[0.5, 0.5], 0.25).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn dalpha_needs_small_outputs() {
        let code = IdCode::new(
            4,
            Alphabet::binary(),
            vec![vec![1.0 / 16.0; 16]; 2],
            vec![DecisionSet::new(vec![0]), DecisionSet::new(vec![1])],
        )
        .unwrap();
        let w = crate::prob::bec(0.1).unwrap();
        let p = Lemma1Params::new(0.1, 0.1, 0.01).unwrap();
        assert!(matches!(
            lemma1_dalpha_bound(&code, &w, &p, 4, LogBase::Two),
            Err(Error::AlphabetTooLarge { .. })
        ));
    }
}
