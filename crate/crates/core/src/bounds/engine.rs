//! Multi-start augmented-Lagrangian ascent over joints `J(u, x)` lying in
//! the stealth polytope.
//!
//! The variable is the flat joint `J` (`k` rows of length `|X|`). The Markov
//! chain `U - X - YZ` is implicit: every output law is computed as
//! `P(u, y) = sum_x J(u, x) W(y|x)`. Constant shifts of a gradient lie in the
//! normal space of the polytope (the row-sum constraint is implied), so
//! gradients below drop them.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::prob::Channel;
use crate::simplex::{dirichlet_one, lex_cmp, Polytope};

use super::OptimizerConfig;

/// Cap on `|log ratio|` in gradients where a mass vanishes.
const LOG_CLAMP: f64 = 50.0;
const ARMIJO: f64 = 1e-4;
const MAX_STEP: f64 = 10.0;
const RHO_INIT: f64 = 10.0;
const RHO_MAX: f64 = 1e6;
const OUTER_ROUNDS: usize = 30;
/// Inner ascent stops after this many consecutive steps each gaining less
/// than `STALL_GAIN` relative to the Lagrangian.
const STALL_ITERS: usize = 25;
const STALL_GAIN: f64 = 1e-14;

pub(crate) const FEASIBLE_RESIDUAL: f64 = 1e-7;
pub(crate) const FEASIBLE_GAP: f64 = -1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Which {
    Legit,
    Eaves,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Term {
    /// `I(U; out)`.
    MiU(Which),
    /// `I(X; out)`.
    MiX(Which),
    /// `D(P_X W_Z || Q_Z)`.
    KlZ,
}

/// `sum coef * term + constant`.
#[derive(Debug, Clone)]
pub(crate) struct Affine {
    pub terms: Vec<(f64, Term)>,
    pub constant: f64,
}

impl Affine {
    pub(crate) fn of(terms: Vec<(f64, Term)>) -> Self {
        Self { terms, constant: 0.0 }
    }

    pub(crate) fn u_gap() -> Self {
        Self::of(vec![(1.0, Term::MiU(Which::Legit)), (-1.0, Term::MiU(Which::Eaves))])
    }

    pub(crate) fn x_gap() -> Self {
        Self::of(vec![(1.0, Term::MiX(Which::Legit)), (-1.0, Term::MiX(Which::Eaves))])
    }
}

/// Stealth handling inside the engine.
#[derive(Debug, Clone)]
pub(crate) enum Stealth {
    None,
    Exact(Vec<f64>),
    Relaxed { q_z: Vec<f64>, slack: f64 },
}

pub(crate) struct Problem<'a> {
    pub legit: &'a Channel,
    pub eaves: &'a Channel,
    pub k: usize,
    pub stealth: Stealth,
    pub objective: Affine,
    /// Constraints `c(J) >= 0`.
    pub constraints: Vec<Affine>,
    /// Secrecy gap reported for candidates (`U` or `X` version).
    pub gap: Affine,
    /// Pull infeasible end points back toward `P_U x P_X`.
    pub restore: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub joint: Vec<f64>,
    pub value: f64,
    pub gap: f64,
    pub stealth_residual: f64,
}

impl Candidate {
    pub(crate) fn feasible(&self) -> bool {
        self.stealth_residual <= FEASIBLE_RESIDUAL && self.gap >= FEASIBLE_GAP
    }
}

impl<'a> Problem<'a> {
    pub(crate) fn nx(&self) -> usize {
        self.legit.input_size()
    }

    fn q_z(&self) -> Option<&[f64]> {
        match &self.stealth {
            Stealth::None => None,
            Stealth::Exact(q) => Some(q),
            Stealth::Relaxed { q_z, .. } => Some(q_z),
        }
    }

    pub(crate) fn polytope(&self) -> Polytope {
        let n = self.k * self.nx();
        match &self.stealth {
            Stealth::Exact(q) => {
                let nz = q.len();
                let mut a = DMatrix::zeros(nz, n);
                for z in 0..nz {
                    for u in 0..self.k {
                        for x in 0..self.nx() {
                            a[(z, u * self.nx() + x)] = self.eaves.get(x, z);
                        }
                    }
                }
                Polytope::new(a, DVector::from_column_slice(q))
            }
            _ => Polytope::new(DMatrix::from_element(1, n, 1.0), DVector::from_element(1, 1.0)),
        }
    }

    fn channel(&self, which: Which) -> &Channel {
        match which {
            Which::Legit => self.legit,
            Which::Eaves => self.eaves,
        }
    }

    fn term(&self, j: &[f64], term: Term, grad: Option<&mut [f64]>) -> f64 {
        match term {
            Term::MiU(w) => mi_u(j, self.k, self.channel(w), grad),
            Term::MiX(w) => mi_x(j, self.k, self.channel(w), grad),
            Term::KlZ => kl_z(j, self.k, self.eaves, self.q_z().expect("KL term needs Q_Z"), grad),
        }
    }

    pub(crate) fn eval(&self, f: &Affine, j: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut scratch = vec![0.0; j.len()];
        let mut total = f.constant;
        for &(coef, term) in &f.terms {
            let v = match grad.as_deref_mut() {
                Some(g) => {
                    let v = self.term(j, term, Some(&mut scratch));
                    for (gi, si) in g.iter_mut().zip(&scratch) {
                        *gi += coef * si;
                    }
                    v
                }
                None => self.term(j, term, None),
            };
            total += coef * v;
        }
        total
    }

    pub(crate) fn stealth_residual(&self, j: &[f64], poly: &Polytope) -> f64 {
        match &self.stealth {
            Stealth::None => 0.0,
            Stealth::Exact(_) => poly.residual(j),
            Stealth::Relaxed { slack, .. } => (self.term(j, Term::KlZ, None) - slack).max(0.0),
        }
    }

    pub(crate) fn candidate(&self, joint: Vec<f64>, poly: &Polytope) -> Candidate {
        Candidate {
            value: self.eval(&self.objective, &joint, None),
            gap: self.eval(&self.gap, &joint, None),
            stealth_residual: self.stealth_residual(&joint, poly),
            joint,
        }
    }

    /// Explicit constraints plus the relaxed stealth constraint, if any.
    fn all_constraints(&self) -> Vec<Affine> {
        let mut all = self.constraints.clone();
        if let Stealth::Relaxed { slack, .. } = self.stealth {
            all.push(Affine {
                terms: vec![(-1.0, Term::KlZ)],
                constant: slack,
            });
        }
        all
    }

    fn lagrangian(&self, cons: &[Affine], j: &[f64], lambda: &[f64], rho: f64, grad: Option<&mut [f64]>) -> f64 {
        match grad {
            None => {
                let mut l = self.eval(&self.objective, j, None);
                for (c, &lam) in cons.iter().zip(lambda) {
                    let ci = self.eval(c, j, None);
                    let s = (lam - rho * ci).max(0.0);
                    l -= (s * s - lam * lam) / (2.0 * rho);
                }
                l
            }
            Some(g) => {
                let mut l = self.eval(&self.objective, j, Some(g));
                let mut gc = vec![0.0; j.len()];
                for (c, &lam) in cons.iter().zip(lambda) {
                    let ci = self.eval(c, j, Some(&mut gc));
                    let s = (lam - rho * ci).max(0.0);
                    l -= (s * s - lam * lam) / (2.0 * rho);
                    for (gi, ci) in g.iter_mut().zip(&gc) {
                        *gi += s * ci;
                    }
                }
                l
            }
        }
    }

    /// Projected gradient ascent on the augmented Lagrangian from `start`.
    pub(crate) fn ascend(&self, start: Vec<f64>, poly: &Polytope, cfg: &OptimizerConfig) -> Vec<f64> {
        let cons = self.all_constraints();
        let mut j = start;
        let mut lambda = vec![0.0; cons.len()];
        let mut rho = RHO_INIT;
        let mut grad = vec![0.0; j.len()];
        let move_tol = 1e-3 * cfg.tol;
        for round in 0..OUTER_ROUNDS {
            let mut step = cfg.step_init;
            let mut stalled = 0;
            for _ in 0..cfg.max_iters {
                let l0 = self.lagrangian(&cons, &j, &lambda, rho, Some(&mut grad));
                let mut moved = None;
                while step > 1e-16 {
                    let shifted: Vec<f64> = j.iter().zip(&grad).map(|(a, g)| a + step * g).collect();
                    let trial = poly.project(&shifted);
                    let ascent: f64 = trial.iter().zip(&j).zip(&grad).map(|((t, a), g)| g * (t - a)).sum();
                    let l1 = self.lagrangian(&cons, &trial, &lambda, rho, None);
                    if l1 >= l0 + ARMIJO * ascent {
                        let delta = trial.iter().zip(&j).map(|(t, a)| (t - a).abs()).fold(0.0, f64::max);
                        j = trial;
                        step = (step * 2.0).min(MAX_STEP);
                        moved = Some((delta, l1 - l0));
                        break;
                    }
                    step *= 0.5;
                }
                match moved {
                    Some((delta, gain)) if delta >= move_tol => {
                        stalled = if gain <= STALL_GAIN * (1.0 + l0.abs()) { stalled + 1 } else { 0 };
                        if stalled >= STALL_ITERS {
                            break;
                        }
                    }
                    _ => break,
                }
            }
            if cons.is_empty() {
                break;
            }
            let mut settled = true;
            for (c, lam) in cons.iter().zip(lambda.iter_mut()) {
                let ci = self.eval(c, &j, None);
                let next = (*lam - rho * ci).max(0.0);
                if ci < FEASIBLE_GAP || (next - *lam).abs() > 1e-8 * lam.max(1.0) {
                    settled = false;
                }
                *lam = next;
            }
            if settled && round > 0 {
                break;
            }
            rho = (rho * 2.0).min(RHO_MAX);
        }
        j
    }

    /// Bisects along `(1 - t) P_U x P_X + t J` for the largest `t` at which
    /// every constraint holds. The anchor keeps `P_X`, hence stealth, and has
    /// `I(U; .) = 0`.
    pub(crate) fn restore(&self, j: Vec<f64>) -> Vec<f64> {
        let cons = self.all_constraints();
        let worst = |p: &[f64]| {
            cons.iter()
                .map(|c| self.eval(c, p, None))
                .fold(f64::INFINITY, f64::min)
        };
        if !self.restore || worst(&j) >= 0.0 {
            return j;
        }
        let nx = self.nx();
        let pu: Vec<f64> = j.chunks(nx).map(|r| r.iter().sum()).collect();
        let mut px = vec![0.0; nx];
        for row in j.chunks(nx) {
            for (p, v) in px.iter_mut().zip(row) {
                *p += v;
            }
        }
        let anchor: Vec<f64> = pu.iter().flat_map(|a| px.iter().map(move |b| a * b)).collect();
        let at = |t: f64| -> Vec<f64> { anchor.iter().zip(&j).map(|(a, b)| (1.0 - t) * a + t * b).collect() };
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if worst(&at(mid)) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(lo)
    }

    /// Runs `cfg.restarts` seeded starts plus the given warm starts and
    /// returns every end point as a candidate, in a fixed order.
    pub(crate) fn search(&self, cfg: &OptimizerConfig, warm: &[Vec<f64>]) -> Vec<Candidate> {
        let poly = self.polytope();
        let n = self.k * self.nx();
        let mut starts: Vec<Vec<f64>> = warm.to_vec();
        starts.extend((0..cfg.restarts).map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(r as u64));
            poly.project(&dirichlet_one(&mut rng, n))
        }));
        let mut out: Vec<Candidate> = starts
            .into_par_iter()
            .map(|s| {
                let end = self.restore(self.ascend(s, &poly, cfg));
                self.candidate(end, &poly)
            })
            .collect();
        // Warm starts are also kept as-is.
        out.extend(warm.iter().map(|w| self.candidate(w.clone(), &poly)));
        out
    }
}

/// Best feasible candidate: largest value, ties broken by the
/// lexicographically smallest joint.
pub(crate) fn best_feasible(cands: &[Candidate]) -> Option<&Candidate> {
    cands
        .iter()
        .filter(|c| c.feasible())
        .max_by(|a, b| a.value.total_cmp(&b.value).then_with(|| lex_cmp(&b.joint, &a.joint)))
}

/// Least-violating candidate, for reporting when nothing is feasible.
pub(crate) fn least_violating(cands: &[Candidate]) -> Option<&Candidate> {
    cands.iter().min_by(|a, b| {
        let va = a.stealth_residual + (-a.gap).max(0.0);
        let vb = b.stealth_residual + (-b.gap).max(0.0);
        va.total_cmp(&vb).then_with(|| lex_cmp(&a.joint, &b.joint))
    })
}

fn column_sums(j: &[f64], k: usize) -> Vec<f64> {
    let nx = j.len() / k;
    let mut p = vec![0.0; nx];
    for row in j.chunks(nx) {
        for (a, b) in p.iter_mut().zip(row) {
            *a += b;
        }
    }
    p
}

fn clamp_log(x: f64) -> f64 {
    if x > 0.0 {
        x.ln().clamp(-LOG_CLAMP, LOG_CLAMP)
    } else {
        -LOG_CLAMP
    }
}

fn mi_u(j: &[f64], k: usize, w: &Channel, grad: Option<&mut [f64]>) -> f64 {
    let nx = w.input_size();
    let ny = w.output_size();
    let mut puy = vec![0.0; k * ny];
    let mut pu = vec![0.0; k];
    for u in 0..k {
        for x in 0..nx {
            let m = j[u * nx + x];
            if m > 0.0 {
                pu[u] += m;
                for (o, wy) in puy[u * ny..(u + 1) * ny].iter_mut().zip(w.row(x)) {
                    *o += m * wy;
                }
            }
        }
    }
    let mut py = vec![0.0; ny];
    for row in puy.chunks(ny) {
        for (a, b) in py.iter_mut().zip(row) {
            *a += b;
        }
    }
    let mut value = 0.0;
    for u in 0..k {
        for y in 0..ny {
            let m = puy[u * ny + y];
            if m > 0.0 {
                value += m * (m / (pu[u] * py[y])).ln();
            }
        }
    }
    if let Some(g) = grad {
        let mut ratio = vec![0.0; ny];
        for u in 0..k {
            for y in 0..ny {
                ratio[y] = if pu[u] <= 0.0 {
                    f64::NAN
                } else if py[y] <= 0.0 {
                    clamp_log(1.0 / pu[u])
                } else {
                    clamp_log(puy[u * ny + y] / (pu[u] * py[y]))
                };
            }
            for x in 0..nx {
                let row = w.row(x);
                g[u * nx + x] = if pu[u] <= 0.0 {
                    row.iter()
                        .zip(&py)
                        .filter(|(a, _)| **a > 0.0)
                        .map(|(a, b)| a * clamp_log(a / b))
                        .sum()
                } else {
                    row.iter().zip(&ratio).filter(|(a, _)| **a > 0.0).map(|(a, r)| a * r).sum()
                };
            }
        }
    }
    value.max(0.0)
}

fn mi_x(j: &[f64], k: usize, w: &Channel, grad: Option<&mut [f64]>) -> f64 {
    let p = column_sums(j, k);
    let nx = p.len();
    let py = crate::prob::push_forward_raw(&p, w);
    let mut value = 0.0;
    let mut d = vec![0.0; nx];
    for x in 0..nx {
        let row = w.row(x);
        let mut dx = 0.0;
        for (a, b) in row.iter().zip(&py) {
            if *a > 0.0 {
                dx += a * clamp_log(a / b);
            }
        }
        d[x] = dx;
        if p[x] > 0.0 {
            value += p[x] * dx;
        }
    }
    if let Some(g) = grad {
        for u in 0..k {
            g[u * nx..(u + 1) * nx].copy_from_slice(&d);
        }
    }
    value.max(0.0)
}

fn kl_z(j: &[f64], k: usize, w: &Channel, q: &[f64], grad: Option<&mut [f64]>) -> f64 {
    let p = column_sums(j, k);
    let nx = p.len();
    let pz = crate::prob::push_forward_raw(&p, w);
    let mut value = 0.0;
    let logs: Vec<f64> = pz
        .iter()
        .zip(q)
        .map(|(a, b)| {
            if *b <= 0.0 {
                LOG_CLAMP
            } else {
                clamp_log(a / b)
            }
        })
        .collect();
    for (a, b) in pz.iter().zip(q) {
        if *a > 0.0 {
            value += if *b > 0.0 { a * (a / b).ln() } else { f64::INFINITY };
        }
    }
    if let Some(g) = grad {
        for x in 0..nx {
            let gx: f64 = w.row(x).iter().zip(&logs).map(|(a, l)| a * l).sum();
            for u in 0..k {
                g[u * nx + x] = gx;
            }
        }
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{bsc, Alphabet, Channel};
    use rand::Rng;

    fn finite_difference(p: &Problem<'_>, f: &Affine, j: &[f64]) -> Vec<f64> {
        let h = 1e-7;
        (0..j.len())
            .map(|i| {
                let mut a = j.to_vec();
                let mut b = j.to_vec();
                a[i] += h;
                b[i] -= h;
                (p.eval(f, &a, None) - p.eval(f, &b, None)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn gradients_match_finite_differences_up_to_a_constant() {
        let legit = Channel::new(
            Alphabet::indexed(3),
            Alphabet::indexed(2),
            vec![vec![0.9, 0.1], vec![0.3, 0.7], vec![0.5, 0.5]],
        )
        .unwrap();
        let eaves = Channel::new(
            Alphabet::indexed(3),
            Alphabet::indexed(3),
            vec![vec![0.6, 0.2, 0.2], vec![0.1, 0.8, 0.1], vec![0.2, 0.3, 0.5]],
        )
        .unwrap();
        let problem = Problem {
            legit: &legit,
            eaves: &eaves,
            k: 2,
            stealth: Stealth::Relaxed { q_z: vec![0.3, 0.3, 0.4], slack: 0.1 },
            objective: Affine::u_gap(),
            constraints: vec![],
            gap: Affine::u_gap(),
            restore: false,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for f in [
            Affine::u_gap(),
            Affine::x_gap(),
            Affine::of(vec![(1.0, Term::KlZ)]),
            Affine::of(vec![(1.0, Term::MiU(Which::Legit))]),
        ] {
            for _ in 0..5 {
                let j: Vec<f64> = dirichlet_one(&mut rng, 6).iter().map(|v| 0.94 * v + 0.01).collect();
                let mut g = vec![0.0; 6];
                problem.eval(&f, &j, Some(&mut g));
                let fd = finite_difference(&problem, &f, &j);
                // Analytic and numeric gradients agree along every direction
                // that preserves total mass.
                for _ in 0..5 {
                    let mut dir: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let mean = dir.iter().sum::<f64>() / 6.0;
                    dir.iter_mut().for_each(|d| *d -= mean);
                    let a: f64 = g.iter().zip(&dir).map(|(x, y)| x * y).sum();
                    let b: f64 = fd.iter().zip(&dir).map(|(x, y)| x * y).sum();
                    assert!((a - b).abs() < 1e-5, "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn restoration_reaches_the_constraint_boundary() {
        let legit = bsc(0.3).unwrap();
        let eaves = bsc(0.1).unwrap();
        let problem = Problem {
            legit: &legit,
            eaves: &eaves,
            k: 2,
            stealth: Stealth::Exact(vec![0.5, 0.5]),
            objective: Affine::of(vec![(1.0, Term::MiU(Which::Legit))]),
            constraints: vec![Affine::u_gap()],
            gap: Affine::u_gap(),
            restore: true,
        };
        let j = vec![0.5, 0.0, 0.0, 0.5];
        assert!(problem.eval(&Affine::u_gap(), &j, None) < 0.0);
        let r = problem.restore(j);
        assert!(problem.eval(&Affine::u_gap(), &r, None) >= 0.0);
        assert!(problem.polytope().residual(&r) < 1e-15);
    }
}
