use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::code::{DecisionSet, IdCode};
use crate::error::{mismatch, Error, Result};
use crate::prob::{extend_with_cap, push_forward_raw, Distribution, WiretapChannel, DEFAULT_ENTRY_CAP};
use crate::simplex::{affine_vertex, dirichlet_one, min_affine_residual};

const POOL_VERTICES: usize = 6;
const POOL_INTERIOR: usize = 4;
const MAX_TUPLES: usize = 64;
/// Weight of each encoder's dominant pool component.
const DOMINANT_WEIGHT: f64 = 0.85;
const TIE_TOL: f64 = 1e-12;
const EMPTY_TOL: f64 = 1e-9;

/// Product law `p_1 x ... x p_n` as a flat vector.
fn product_law(factors: &[&[f64]]) -> Vec<f64> {
    let mut out = vec![1.0];
    for p in factors {
        out = out.iter().flat_map(|a| p.iter().map(move |b| a * b)).collect();
    }
    out
}

/// Products of vertex tuples (first coordinate most significant), capped at
/// `MAX_TUPLES`, followed by the i.i.d. powers of the interior points.
fn components(pool: &[Vec<f64>], corners: usize, n: usize) -> Vec<Vec<f64>> {
    let tuples = (corners as u128).saturating_pow(n as u32).min(MAX_TUPLES as u128) as usize;
    let mut out = Vec::with_capacity(tuples + pool.len() - corners);
    for t in 0..tuples {
        let mut rest = t;
        let mut idx = vec![0; n];
        for slot in idx.iter_mut().rev() {
            *slot = rest % corners;
            rest /= corners;
        }
        let factors: Vec<&[f64]> = idx.iter().map(|&i| pool[i].as_slice()).collect();
        out.push(product_law(&factors));
    }
    for p in &pool[corners..] {
        out.push(product_law(&vec![p.as_slice(); n]));
    }
    out
}

/// Stealthy single-letter inputs: LP vertices for random costs, plus convex
/// combinations of them. Also returns the number of vertices.
fn stealth_pool(w: &WiretapChannel, q_z: &Distribution, rng: &mut ChaCha8Rng) -> Result<(Vec<Vec<f64>>, usize)> {
    let rows: Vec<&[f64]> = w.eaves().rows().collect();
    let (residual, fallback) = min_affine_residual(&rows, q_z.mass())?;
    if residual > EMPTY_TOL {
        return Err(Error::InfeasibleStealth { residual });
    }
    let nx = rows.len();
    let mut pool: Vec<Vec<f64>> = Vec::new();
    for _ in 0..POOL_VERTICES {
        let cost: Vec<f64> = (0..nx).map(|_| rng.random_range(-1.0..1.0)).collect();
        if let Some(v) = affine_vertex(&rows, q_z.mass(), &cost)? {
            if !pool.iter().any(|p| p.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-9)) {
                pool.push(v);
            }
        }
    }
    if pool.is_empty() {
        pool.push(fallback);
    }
    let corners = pool.len();
    for _ in 0..POOL_INTERIOR {
        let weights = dirichlet_one(rng, corners);
        let mut p = vec![0.0; nx];
        for (wt, v) in weights.iter().zip(&pool[..corners]) {
            for (a, b) in p.iter_mut().zip(v) {
                *a += wt * b;
            }
        }
        pool.push(p);
    }
    Ok((pool, corners))
}

/// Builds a small ESID code whose encoders are mixtures of product laws with
/// stealthy factors, so every `E_m W_Z^n` equals `Q_Z^n` exactly.
///
/// Each decision set accepts the output sequences where the message's
/// output law is at least the code's average output law, a likelihood
/// test of `m` against the mixture of all messages; sets may overlap. Deterministic in `seed`.
pub fn build_toy_esid_code(w: &WiretapChannel, q_z: &Distribution, m: usize, n: usize, seed: u64) -> Result<IdCode> {
    if m < 2 {
        return Err(Error::InvalidInput(format!("an ID code needs M >= 2 messages, got {m}")));
    }
    if n == 0 {
        return Err(Error::OutOfRange {
            name: "n",
            value: 0.0,
            range: "[1, inf)",
        });
    }
    if q_z.alphabet() != w.eaves().output() {
        return Err(mismatch("Q_Z is not a law on the eavesdropper output"));
    }
    let wn = extend_with_cap(w.legit(), n, DEFAULT_ENTRY_CAP)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (pool, corners) = stealth_pool(w, q_z, &mut rng)?;
    let products = components(&pool, corners, n);

    let mut encoders = Vec::with_capacity(m);
    for i in 0..m {
        let mut weights: Vec<f64> = dirichlet_one(&mut rng, products.len())
            .into_iter()
            .map(|v| v * (1.0 - DOMINANT_WEIGHT))
            .collect();
        weights[i % products.len()] += DOMINANT_WEIGHT;
        let mut e = vec![0.0; wn.input_size()];
        for (wt, prod) in weights.iter().zip(&products) {
            for (a, b) in e.iter_mut().zip(prod) {
                *a += wt * b;
            }
        }
        let s: f64 = e.iter().sum();
        e.iter_mut().for_each(|v| *v /= s);
        encoders.push(e);
    }

    let laws: Vec<Vec<f64>> = encoders.iter().map(|e| push_forward_raw(e, &wn)).collect();
    let ny = wn.output_size();
    let average: Vec<f64> = (0..ny)
        .map(|y| laws.iter().map(|l| l[y]).sum::<f64>() / m as f64)
        .collect();
    let decision_sets = laws
        .iter()
        .map(|l| DecisionSet::new((0..ny).filter(|&y| l[y] > 0.0 && l[y] >= average[y] - TIE_TOL).collect()))
        .collect();
    IdCode::new(n, w.input().clone(), encoders, decision_sets)
}
