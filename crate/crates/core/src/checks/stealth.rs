use rand::Rng;

use super::random::{random_channel, random_pmf};
use super::{stream, PropertyTally};
use crate::bounds::blahut_arimoto;
use crate::error::Result;
use crate::idsim::{
    build_toy_esid_code, evaluate_id_code, lemma1_dalpha_bound, lemma1_mutinf_bound, loglog, single_letter_stealth_check,
    stealth_of_code, IdCode, Lemma1Params, DEFAULT_ETA,
};
use crate::measures::LogBase;
use crate::prob::{push_forward, Alphabet, Channel, Distribution, WiretapChannel};

/// Converse-bound instances per suite run; each needs a nested optimization.
const MAX_TOY_CODES: usize = 10;
const Q_GRID: usize = 16;

/// A toy code over a binary input with `alpha < 1`, trying successive
/// seeds from `seed`. Returns the code, its legitimate channel and params.
pub(crate) fn toy_instance<R: Rng>(rng: &mut R, seed: u64) -> Result<Option<(IdCode, Channel, Lemma1Params)>> {
    for attempt in 0..32 {
        let legit = random_channel(rng, 2, 2);
        let q = Distribution::uniform(Alphabet::binary());
        let eaves = Channel::constant(Alphabet::binary(), &q);
        let w = WiretapChannel::new(legit.clone(), eaves)?;
        let m = rng.random_range(2..=3);
        let n = rng.random_range(1..=2);
        let code = build_toy_esid_code(&w, &q, m, n, seed.wrapping_add(attempt))?;
        let metrics = evaluate_id_code(&code, &legit)?;
        if let Ok(params) = Lemma1Params::new(metrics.lambda1, metrics.lambda2, DEFAULT_ETA) {
            return Ok(Some((code, legit, params)));
        }
    }
    Ok(None)
}

pub(super) fn run(count: usize, seed: u64) -> Result<Vec<PropertyTally>> {
    let mut rng = stream(seed, 3);
    let mut chain = PropertyTally::new("stealth_single_letter");
    let mut equality = PropertyTally::new("stealth_single_letter_iid_equality");
    for _ in 0..count {
        let k = rng.random_range(2..=3);
        let n = rng.random_range(2..=3);
        let q = random_pmf(&mut rng, k);
        let p = random_pmf(&mut rng, k.pow(n as u32));
        let c = single_letter_stealth_check(&p, &q, LogBase::Natural)?;
        chain.record(c.rhs - c.lhs, 1e-12);
        let marginal = random_pmf(&mut rng, k);
        let c = single_letter_stealth_check(&marginal.iid_power(n, usize::MAX)?, &q, LogBase::Natural)?;
        equality.record((c.lhs - c.rhs).abs(), 1e-12);
    }

    let mut simulating = PropertyTally::new("iid_code_stealth");
    let mut lower = PropertyTally::new("lemma1_loglog_below_dalpha");
    let mut sandwich = PropertyTally::new("lemma1_dalpha_below_mutinf");
    let mut dominance = PropertyTally::new("hull_below_capacity");
    for i in 0..count.min(MAX_TOY_CODES) {
        let legit = random_channel(&mut rng, 2, 2);
        let nz = rng.random_range(2..=3);
        let eaves = random_channel(&mut rng, 2, nz);
        let p = random_pmf(&mut rng, 2);
        let q = push_forward(&p, &eaves)?;
        let w = WiretapChannel::new(legit, eaves)?;
        let code = build_toy_esid_code(&w, &q, rng.random_range(2..=4), rng.random_range(1..=2), seed + i as u64)?;
        simulating.record(stealth_of_code(&code, w.eaves(), &q, LogBase::Natural)?, 1e-12);

        let Some((code, legit, params)) = toy_instance(&mut rng, seed + i as u64)? else {
            continue;
        };
        let d = lemma1_dalpha_bound(&code, &legit, &params, Q_GRID, LogBase::Natural)?;
        lower.record(loglog(code.size() as f64, LogBase::Natural) - d.bound, 0.0);
        sandwich.record(d.bound - d.mutinf_bound.unwrap_or(f64::NEG_INFINITY), 1e-6);
        if code.n() == 1 {
            let hull = lemma1_mutinf_bound(&code, &legit, &params, LogBase::Natural)?;
            let cap = blahut_arimoto(&legit, 1e-12, 100_000)?;
            dominance.record(hull.hull_value - (cap.capacity + cap.gap), 1e-9);
        }
    }
    Ok(vec![chain, equality, simulating, lower, sandwich, dominance])
}
