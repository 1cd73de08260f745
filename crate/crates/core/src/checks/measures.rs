use std::f64::consts::{E, LN_2};

use rand::Rng;

use super::random::{random_channel, random_pmf};
use super::{stream, PropertyTally};
use crate::error::Result;
use crate::measures::{conditional_kl, d_alpha, entropy, kl, mutual_information, LogBase, Reference};
use crate::prob::{compose, extend, push_forward, Distribution};

const ALPHAS: [f64; 3] = [0.1, 0.5, 0.9];

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub(super) fn run(count: usize, seed: u64) -> Result<Vec<PropertyTally>> {
    let mut rng = stream(seed, 1);
    let mut assoc = PropertyTally::new("compose_associative");
    let mut push = PropertyTally::new("push_forward_composes");
    let mut rows = PropertyTally::new("extend_row_sums");
    let mut iid = PropertyTally::new("extend_commutes_with_iid");
    let mut identity = PropertyTally::new("kl_identity");
    let mut concave = PropertyTally::new("mutual_information_concave");
    let mut bases = PropertyTally::new("base_conversion");
    let mut markov = PropertyTally::informational("dalpha_markov_chain");
    let mut markov_fixed = PropertyTally::new("dalpha_markov_chain_corrected");

    for _ in 0..count {
        let mut size = || rng.random_range(2..=6);
        let (na, nb, nc, nd) = (size(), size(), size(), size());
        let a = random_channel(&mut rng, na, nb);
        let b = random_channel(&mut rng, nb, nc);
        let c = random_channel(&mut rng, nc, nd);
        let left = compose(&a, &compose(&b, &c)?)?;
        let right = compose(&compose(&a, &b)?, &c)?;
        assoc.record(left.max_abs_diff(&right).unwrap_or(f64::INFINITY), 1e-12);

        let p = random_pmf(&mut rng, na);
        let direct = push_forward(&p, &compose(&a, &b)?)?;
        let staged = push_forward(&push_forward(&p, &a)?, &b)?;
        push.record(max_abs(direct.mass(), staged.mass()), 1e-12);

        let n = rng.random_range(2..=3);
        let (si, so) = (rng.random_range(2..=3), rng.random_range(2..=3));
        let small = random_channel(&mut rng, si, so);
        let wn = extend(&small, n)?;
        rows.record(wn.max_row_defect(), n as f64 * 1e-9);
        let p_small = random_pmf(&mut rng, small.input_size());
        let lhs = push_forward(&p_small.iid_power(n, usize::MAX)?, &wn)?;
        let rhs = push_forward(&p_small, &small)?.iid_power(n, usize::MAX)?;
        iid.record(max_abs(lhs.mass(), rhs.mass()), 1e-12);

        let q = random_pmf(&mut rng, nb);
        let ckl = conditional_kl(&a, Reference::Constant(&q), &p, LogBase::Natural)?.value;
        let mi = mutual_information(&p, &a, LogBase::Natural)?;
        let out = push_forward(&p, &a)?;
        let d = kl(&out, &q, LogBase::Natural)?.value;
        identity.record((ckl - mi - d).abs(), 1e-12);

        let p2 = random_pmf(&mut rng, na);
        let lambda: f64 = rng.random();
        let mix = p.mix(&p2, lambda)?;
        let ends = lambda * mi + (1.0 - lambda) * mutual_information(&p2, &a, LogBase::Natural)?;
        concave.record(ends - mutual_information(&mix, &a, LogBase::Natural)?, 1e-12);

        let alpha = rng.random_range(0.05..0.95);
        let pb = random_pmf(&mut rng, nb);
        let pairs = [
            (entropy(&p, LogBase::Two), entropy(&p, LogBase::Natural)),
            (mi_bits(&p, &a)?, mi),
            (kl(&out, &q, LogBase::Two)?.value, d),
            (d_alpha(&pb, &q, alpha, LogBase::Two)?, d_alpha(&pb, &q, alpha, LogBase::Natural)?),
        ];
        bases.record(pairs.iter().map(|(bits, nats)| (bits - nats / LN_2).abs()).fold(0.0, f64::max), 1e-12);

        for alpha in ALPHAS {
            let da = d_alpha(&pb, &q, alpha, LogBase::Natural)?;
            let dk = kl(&pb, &q, LogBase::Natural)?.value;
            markov.record(da - dk / (1.0 - alpha), 1e-12);
            markov_fixed.record(da - (dk + 1.0 / E) / (1.0 - alpha), 1e-12);
        }
    }
    Ok(vec![assoc, push, rows, iid, identity, concave, bases, markov, markov_fixed])
}

fn mi_bits(p: &Distribution, w: &crate::prob::Channel) -> Result<f64> {
    mutual_information(p, w, LogBase::Two)
}
