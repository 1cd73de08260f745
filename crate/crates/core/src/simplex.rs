//! Numerical primitives on probability simplices shared by the analysis,
//! bound and identification modules.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};

/// Euclidean projection onto `{x >= 0, sum x = 1}` (sort-and-threshold).
pub(crate) fn project_simplex(v: &mut [f64]) {
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let t = (cumulative - 1.0) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// A uniform draw from the simplex of dimension `n` (Dirichlet(1)).
pub(crate) fn dirichlet_one<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// All compositions of `total` into `parts` non-negative integers, in
/// lexicographic order.
pub(crate) fn compositions(parts: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(parts: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=total {
            prefix.push(k);
            rec(parts - 1, total - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        rec(parts, total, &mut Vec::with_capacity(parts), &mut out);
    }
    out
}

/// Number of compositions of `total` into `parts` parts, saturating.
pub(crate) fn composition_count(parts: usize, total: usize) -> u128 {
    // binomial(total + parts - 1, parts - 1)
    let (n, k) = ((total + parts - 1) as u128, (parts - 1) as u128);
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Lexicographic comparison of two points, used to break ties when
/// reducing multi-start results.
pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// The polytope `{x >= 0 : A x = b}` with `A`'s row space stored through an
/// orthonormal basis, so redundant equality rows are harmless.
#[derive(Debug, Clone)]
pub(crate) struct Polytope {
    /// `A` is the single all-ones row with `b = 1`: the plain simplex.
    simplex: bool,
    basis: DMatrix<f64>,
    rhs: DVector<f64>,
    raw_a: DMatrix<f64>,
    raw_b: DVector<f64>,
}

impl Polytope {
    pub(crate) fn new(a: DMatrix<f64>, b: DVector<f64>) -> Self {
        let simplex = a.nrows() == 1 && a.iter().all(|&v| v == 1.0) && b[0] == 1.0;
        let svd = a.clone().svd(true, true);
        let u = svd.u.as_ref().expect("left singular vectors");
        let v_t = svd.v_t.as_ref().expect("right singular vectors");
        let s_max = svd.singular_values.max();
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > 1e-10 * s_max.max(1e-300))
            .collect();
        let n = a.ncols();
        let mut basis = DMatrix::zeros(keep.len(), n);
        let mut rhs = DVector::zeros(keep.len());
        for (r, &i) in keep.iter().enumerate() {
            basis.set_row(r, &v_t.row(i));
            rhs[r] = u.column(i).dot(&b) / svd.singular_values[i];
        }
        Self {
            simplex,
            basis,
            rhs,
            raw_a: a,
            raw_b: b,
        }
    }

    /// Max-abs defect of `A x = b`.
    pub(crate) fn residual(&self, x: &[f64]) -> f64 {
        let x = DVector::from_column_slice(x);
        (&self.raw_a * x - &self.raw_b).amax()
    }

    /// Euclidean projection of `v`, by semismooth Newton on the dual
    /// `max_l  -1/2 |(v + B^T l)_+|^2 + l^T c`.
    pub(crate) fn project(&self, v: &[f64]) -> Vec<f64> {
        if self.simplex {
            let mut x = v.to_vec();
            project_simplex(&mut x);
            return x;
        }
        let m = self.basis.nrows();
        let v = DVector::from_column_slice(v);
        let primal = |lambda: &DVector<f64>| -> DVector<f64> {
            (&v + self.basis.tr_mul(lambda)).map(|t| t.max(0.0))
        };
        let dual = |x: &DVector<f64>, lambda: &DVector<f64>| -0.5 * x.norm_squared() + lambda.dot(&self.rhs);

        let mut lambda = DVector::zeros(m);
        let mut x = primal(&lambda);
        for _ in 0..200 {
            let r = &self.rhs - &self.basis * &x;
            if r.amax() < 1e-13 {
                break;
            }
            let active: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 0.0).collect();
            let mut h = DMatrix::<f64>::identity(m, m) * (1e-12 + 1e-3 * r.amax().min(1.0));
            for &i in &active {
                let col = self.basis.column(i);
                h += col * col.transpose();
            }
            let d = match h.clone().cholesky() {
                Some(c) => c.solve(&r),
                None => r.clone(),
            };
            let current = dual(&x, &lambda);
            let slope = r.dot(&d);
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial = &lambda + &d * t;
                let xt = primal(&trial);
                if dual(&xt, &trial) >= current + 1e-4 * t * slope {
                    lambda = trial;
                    x = xt;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        x.as_slice().to_vec()
    }
}

fn lp_error(e: microlp::Error) -> Error {
    Error::LinearProgram(e.to_string())
}

/// `min_p max_z |sum_x p_x rows[x][z] - target[z]|` over the simplex.
/// Returns the optimal residual and a minimizer.
pub(crate) fn min_affine_residual(rows: &[&[f64]], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    let p: Vec<_> = rows.iter().map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    lp.add_constraint(p.iter().map(|&v| (v, 1.0)), ComparisonOp::Eq, 1.0);
    for (z, &q) in target.iter().enumerate() {
        let terms = || p.iter().zip(rows).map(move |(&v, r)| (v, r[z]));
        lp.add_constraint(terms().chain([(t, -1.0)]), ComparisonOp::Le, q);
        lp.add_constraint(terms().chain([(t, 1.0)]), ComparisonOp::Ge, q);
    }
    let outcome = lp.solve().map_err(lp_error)?;
    let sol = outcome
        .solution()
        .ok_or_else(|| Error::LinearProgram("solve interrupted".into()))?;
    let mut point: Vec<f64> = p.iter().map(|&v| sol.var_value(v).max(0.0)).collect();
    let s: f64 = point.iter().sum();
    point.iter_mut().for_each(|x| *x /= s);
    let residual = target
        .iter()
        .enumerate()
        .map(|(z, q)| (point.iter().zip(rows).map(|(a, r)| a * r[z]).sum::<f64>() - q).abs())
        .fold(0.0, f64::max);
    Ok((residual, point))
}

/// A vertex of `{p in simplex : sum_x p_x rows[x] = target}` minimizing
/// `cost`, or `None` when the set is empty.
pub(crate) fn affine_vertex(rows: &[&[f64]], target: &[f64], cost: &[f64]) -> Result<Option<Vec<f64>>> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let p: Vec<_> = cost.iter().map(|&c| lp.add_var(c, (0.0, 1.0))).collect();
    lp.add_constraint(p.iter().map(|&v| (v, 1.0)), ComparisonOp::Eq, 1.0);
    for (z, &q) in target.iter().enumerate() {
        lp.add_constraint(p.iter().zip(rows).map(|(&v, r)| (v, r[z])), ComparisonOp::Eq, q);
    }
    match lp.solve() {
        Ok(outcome) => {
            let sol = outcome
                .solution()
                .ok_or_else(|| Error::LinearProgram("solve interrupted".into()))?;
            let mut point: Vec<f64> = p.iter().map(|&v| sol.var_value(v).max(0.0)).collect();
            let s: f64 = point.iter().sum();
            point.iter_mut().for_each(|x| *x /= s);
            Ok(Some(point))
        }
        Err(microlp::Error::Infeasible) => Ok(None),
        Err(e) => Err(lp_error(e)),
    }
}
