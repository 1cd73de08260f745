use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::measures::kl_nats;
use crate::prob::{push_forward_raw, Channel, Distribution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    /// Capacity in nats.
    pub capacity: f64,
    pub input: Distribution,
    /// Final gap between the upper and lower Blahut-Arimoto estimates.
    pub gap: f64,
    pub iterations: usize,
}

/// Blahut-Arimoto iteration for `max_P I(P, W)`.
///
/// Stops once `max_x D(W_x || PW) - I(P, W) < tol`, the standard duality
/// certificate.
pub fn blahut_arimoto(w: &Channel, tol: f64, max_iters: usize) -> Result<CapacityResult> {
    let n = w.input_size();
    let mut p = vec![1.0 / n as f64; n];
    let mut d = vec![0.0; n];
    let mut iterations = 0;
    let (mut lower, mut upper);
    loop {
        let py = push_forward_raw(&p, w);
        for (x, dx) in d.iter_mut().enumerate() {
            *dx = kl_nats(w.row(x), &py).unwrap_or(f64::INFINITY);
        }
        lower = p.iter().zip(&d).filter(|(a, _)| **a > 0.0).map(|(a, b)| a * b).sum::<f64>();
        upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if upper - lower < tol || iterations >= max_iters {
            break;
        }
        let mut z = 0.0;
        for (px, dx) in p.iter_mut().zip(&d) {
            *px *= dx.exp();
            z += *px;
        }
        p.iter_mut().for_each(|v| *v /= z);
        iterations += 1;
    }
    Ok(CapacityResult {
        capacity: lower.max(0.0),
        input: Distribution::from_computed(w.input().clone(), p)?,
        gap: upper - lower,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::h2_bits;
    use crate::prob::{bec, bsc, Alphabet};
    use std::f64::consts::LN_2;

    #[test]
    fn closed_form_capacities() {
        let c = blahut_arimoto(&bsc(0.1).unwrap(), 1e-13, 10_000).unwrap();
        assert!((c.capacity / LN_2 - (1.0 - h2_bits(0.1))).abs() < 1e-10);
        let c = blahut_arimoto(&bec(0.3).unwrap(), 1e-13, 10_000).unwrap();
        assert!((c.capacity / LN_2 - 0.7).abs() < 1e-10);
        let c = blahut_arimoto(&Channel::identity(Alphabet::indexed(4)), 1e-13, 10).unwrap();
        assert!((c.capacity - 4f64.ln()).abs() < 1e-12);
    }
}
