//! Structural comparisons between the legitimate and eavesdropper channels.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::measures::{kl_nats, mutual_information_nats, LogBase};
use crate::prob::{push_forward_raw, Channel, Distribution};
use crate::simplex::{composition_count, compositions, lex_cmp, project_simplex};

pub const DEFAULT_DEGRADED_TOL: f64 = 1e-7;
pub const MORE_CAPABLE_TOL: f64 = 1e-9;
/// Largest input alphabet accepted by the grid search.
pub const MAX_GRID_INPUTS: usize = 6;
const MAX_GRID_CELLS: u128 = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Degraded,
    NotDegraded,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegradednessVerdict {
    pub degraded: bool,
    pub decision: Decision,
    /// `W_{Z|Y}` minimizing the residual.
    pub witness: Option<Channel>,
    /// Max-abs entry of `W_{Y|X} * witness - W_{Z|X}`.
    pub residual: f64,
}

/// Decides whether `eaves` is a stochastic degradation of `legit`.
///
/// Solves `min_V max |W_Y V - W_Z|` over row-stochastic `V` as a linear
/// program, then recomputes the residual from the cleaned witness. Residuals
/// in `(tol, 10 tol]` are reported as inconclusive.
pub fn check_degraded(legit: &Channel, eaves: &Channel, tol: f64) -> Result<DegradednessVerdict> {
    if legit.input() != eaves.input() {
        return Err(mismatch("degradedness needs a shared input alphabet"));
    }
    let (nx, ny, nz) = (legit.input_size(), legit.output_size(), eaves.output_size());
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    let v: Vec<_> = (0..ny * nz).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    for y in 0..ny {
        lp.add_constraint((0..nz).map(|z| (v[y * nz + z], 1.0)), ComparisonOp::Eq, 1.0);
    }
    let vars = &v;
    for x in 0..nx {
        for z in 0..nz {
            let terms = || {
                (0..ny)
                    .filter(|&y| legit.get(x, y) != 0.0)
                    .map(move |y| (vars[y * nz + z], legit.get(x, y)))
            };
            let target = eaves.get(x, z);
            lp.add_constraint(terms().chain([(t, -1.0)]), ComparisonOp::Le, target);
            lp.add_constraint(terms().chain([(t, 1.0)]), ComparisonOp::Ge, target);
        }
    }
    let outcome = lp.solve().map_err(|e| Error::LinearProgram(e.to_string()))?;
    let sol = outcome
        .solution()
        .ok_or_else(|| Error::LinearProgram("solve interrupted".into()))?;

    let mut rows: Vec<f64> = v.iter().map(|&var| sol.var_value(var).max(0.0)).collect();
    for row in rows.chunks_mut(nz) {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|w| *w /= s);
    }
    let witness = Channel::from_flat(legit.output().clone(), eaves.output().clone(), rows)?;
    let residual = compose_residual(legit, &witness, eaves);
    let decision = if residual <= tol {
        Decision::Degraded
    } else if residual <= 10.0 * tol {
        Decision::Inconclusive
    } else {
        Decision::NotDegraded
    };
    Ok(DegradednessVerdict {
        degraded: decision == Decision::Degraded,
        decision,
        witness: Some(witness),
        residual,
    })
}

fn compose_residual(legit: &Channel, witness: &Channel, eaves: &Channel) -> f64 {
    let mut worst: f64 = 0.0;
    for x in 0..legit.input_size() {
        let composed = push_forward_raw(legit.row(x), witness);
        for (a, b) in composed.iter().zip(eaves.row(x)) {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MoreCapableVerdict {
    pub more_capable: bool,
    /// Smallest `I(X;Y) - I(X;Z)` found, in the requested base.
    pub min_gap: f64,
    pub certificate: Distribution,
    pub grid_resolution: usize,
}

/// Grid subdivisions per simplex edge used when none is given.
pub fn default_grid_resolution(inputs: usize) -> usize {
    match inputs {
        0..=3 => 64,
        4 => 24,
        5 => 12,
        _ => 8,
    }
}

/// Searches for an input law with `I(X;Y) < I(X;Z)`.
///
/// A full simplex grid is evaluated, then the `restarts` best cells are
/// refined by projected gradient descent. The verdict is only as good as
/// this coverage; `certificate` makes a negative claim checkable.
pub fn check_more_capable(
    legit: &Channel,
    eaves: &Channel,
    grid_resolution: usize,
    restarts: usize,
    base: LogBase,
) -> Result<MoreCapableVerdict> {
    if legit.input() != eaves.input() {
        return Err(mismatch("more-capable check needs a shared input alphabet"));
    }
    let n = legit.input_size();
    if n > MAX_GRID_INPUTS {
        return Err(Error::AlphabetTooLarge {
            what: "input alphabet for the more-capable grid",
            size: n,
            max: MAX_GRID_INPUTS,
        });
    }
    let r = grid_resolution.max(1);
    let cells = composition_count(n, r);
    if cells > MAX_GRID_CELLS {
        return Err(Error::CapExceeded {
            what: "more-capable grid cells".into(),
            needed: cells,
            cap: MAX_GRID_CELLS,
        });
    }
    let gap = |p: &[f64]| mutual_information_nats(p, legit) - mutual_information_nats(p, eaves);

    let mut scored: Vec<(f64, Vec<f64>)> = compositions(n, r)
        .into_par_iter()
        .map(|c| {
            let p: Vec<f64> = c.iter().map(|&k| k as f64 / r as f64).collect();
            (gap(&p), p)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| lex_cmp(&a.1, &b.1)));
    scored.truncate(restarts.max(1));

    let refined: Vec<(f64, Vec<f64>)> = scored
        .into_par_iter()
        .map(|(value, p)| {
            let (v2, p2) = descend(legit, eaves, p.clone(), value);
            if v2 < value {
                (v2, p2)
            } else {
                (value, p)
            }
        })
        .collect();
    let (best, argmin) = refined
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| lex_cmp(&a.1, &b.1)))
        .expect("at least one grid cell");
    let certificate = Distribution::from_computed(legit.input().clone(), argmin)?;
    let min_gap = base.from_nats(best);
    Ok(MoreCapableVerdict {
        more_capable: min_gap >= -MORE_CAPABLE_TOL,
        min_gap,
        certificate,
        grid_resolution: r,
    })
}

/// Gradient of `I(X;Y)` w.r.t. `p` up to an additive constant:
/// `D(W(.|x) || pW)`.
fn info_gradient(p: &[f64], w: &Channel) -> Vec<f64> {
    let py = push_forward_raw(p, w);
    (0..w.input_size())
        .map(|x| kl_nats(w.row(x), &py).unwrap_or(1e6).min(1e6))
        .collect()
}

fn descend(legit: &Channel, eaves: &Channel, mut p: Vec<f64>, mut value: f64) -> (f64, Vec<f64>) {
    let gap = |p: &[f64]| mutual_information_nats(p, legit) - mutual_information_nats(p, eaves);
    let mut step = 0.1;
    for _ in 0..500 {
        let gy = info_gradient(&p, legit);
        let gz = info_gradient(&p, eaves);
        let mut improved = false;
        while step > 1e-12 {
            let mut trial: Vec<f64> = p.iter().zip(gy.iter().zip(&gz)).map(|(x, (a, b))| x - step * (a - b)).collect();
            project_simplex(&mut trial);
            let v = gap(&trial);
            if v < value - 1e-15 {
                let moved = trial.iter().zip(&p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                p = trial;
                value = v;
                improved = moved > 1e-12;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (value, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{bec, bsc, compose, product, Alphabet};

    fn rev_degraded_pair(eps: f64) -> (Channel, Channel) {
        let legit = product(&bec(eps).unwrap(), &bec(eps).unwrap());
        let eaves =
            Channel::deterministic(legit.input().clone(), Alphabet::binary(), &[0, 1, 0, 1]).unwrap();
        (legit, eaves)
    }

    #[test]
    fn identical_channels_are_degraded() {
        let w = bsc(0.2).unwrap();
        let v = check_degraded(&w, &w, DEFAULT_DEGRADED_TOL).unwrap();
        assert!(v.degraded);
        assert!(v.residual < 1e-12);
    }

    #[test]
    fn bec_chain_witness() {
        let v = check_degraded(&bec(0.3).unwrap(), &bec(0.5).unwrap(), DEFAULT_DEGRADED_TOL).unwrap();
        assert!(v.degraded, "residual {}", v.residual);
        // Hand-built witness: erase non-erasures with probability 2/7.
        let e = 2.0 / 7.0;
        let hand = Channel::new(
            bec(0.3).unwrap().output().clone(),
            bec(0.5).unwrap().output().clone(),
            vec![vec![1.0 - e, e, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, e, 1.0 - e]],
        )
        .unwrap();
        let c = compose(&bec(0.3).unwrap(), &hand).unwrap();
        assert!(c.max_abs_diff(&bec(0.5).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn reversely_degraded_pair_is_not_degraded() {
        let (legit, eaves) = rev_degraded_pair(0.6866);
        let v = check_degraded(&legit, &eaves, DEFAULT_DEGRADED_TOL).unwrap();
        assert_eq!(v.decision, Decision::NotDegraded);
        assert!(v.residual > 1e-3);
    }

    #[test]
    fn more_capable_examples() {
        let w = bsc(0.1).unwrap();
        let v = check_more_capable(&w, &w, 64, 8, LogBase::Two).unwrap();
        assert!(v.more_capable && v.min_gap == 0.0);

        let v = check_more_capable(&bsc(0.1).unwrap(), &bsc(0.2).unwrap(), 64, 8, LogBase::Two).unwrap();
        assert!(v.more_capable && v.min_gap >= -1e-9);

        let eps = 0.6866;
        let (legit, eaves) = rev_degraded_pair(eps);
        let v = check_more_capable(&legit, &eaves, 24, 8, LogBase::Two).unwrap();
        assert!(!v.more_capable);
        // Uniform input gives 2(1 - eps) - 1; the minimum is at most that.
        assert!(v.min_gap <= 2.0 * (1.0 - eps) - 1.0 + 1e-9);
    }

    #[test]
    fn grid_cap() {
        let w = Channel::identity(Alphabet::indexed(7));
        assert!(matches!(
            check_more_capable(&w, &w, 4, 1, LogBase::Two),
            Err(Error::AlphabetTooLarge { .. })
        ));
    }
}
