use super::random::{random_channel, random_wiretap};
use super::{fixtures, stream, PropertyTally};
use crate::analysis::{check_degraded, check_more_capable, default_grid_resolution, DEFAULT_DEGRADED_TOL};
use crate::bounds::{
    lower_bound_cor1, lower_bound_prop1, secret_id_rate, upper_bound_thm1, BoundResult, BoundStatus, OptimizerConfig,
    StealthConstraint,
};
use crate::error::Result;
use crate::measures::LogBase;
use crate::prob::{compose, Distribution, WiretapChannel};

use rand::Rng;

/// Random wiretap instances per run; each costs a handful of optimizations.
const MAX_RANDOM_INSTANCES: usize = 20;
const MAX_DEGRADED_INSTANCES: usize = 50;
const MORE_CAPABLE_INSTANCES: usize = 5;

struct Tallies {
    ordering: PropertyTally,
    residual: PropertyTally,
    equality: PropertyTally,
    determinism: PropertyTally,
}

fn all_bounds(
    w: &WiretapChannel,
    q_z: &Distribution,
    cfg: &OptimizerConfig,
) -> Result<[BoundResult; 4]> {
    let c = StealthConstraint::exact(q_z.clone());
    Ok([
        lower_bound_prop1(w, &c, cfg, LogBase::Two)?,
        lower_bound_cor1(w, &c, cfg, LogBase::Two)?,
        upper_bound_thm1(w, &c, cfg, LogBase::Two)?,
        secret_id_rate(w, cfg, LogBase::Two)?,
    ])
}

fn score(t: &mut Tallies, results: &[BoundResult; 4], degraded: bool) {
    let [prop1, cor1, thm1, sid] = results;
    if results.iter().all(|r| r.status == BoundStatus::Ok) {
        let defect = (prop1.value - cor1.value - 1e-9)
            .max(cor1.value - thm1.value - 1e-6)
            .max(cor1.value - sid.value - 1e-6);
        t.ordering.record(defect, 0.0);
    }
    for r in &results[..3] {
        if r.status == BoundStatus::Ok {
            t.residual.record(r.stealth_residual, 1e-7);
        }
    }
    if degraded && prop1.status == BoundStatus::Ok {
        t.equality.record(thm1.value - prop1.value, 1e-4);
    }
}

pub(super) fn run(count: usize, seed: u64, cfg: &OptimizerConfig) -> Result<Vec<PropertyTally>> {
    let mut t = Tallies {
        ordering: PropertyTally::new("bound_ordering"),
        residual: PropertyTally::new("argmax_stealth_residual"),
        equality: PropertyTally::new("thm1_equals_prop1_when_degraded"),
        determinism: PropertyTally::new("bound_determinism"),
    };
    for f in fixtures()? {
        let results = all_bounds(&f.wiretap, &f.q_z, cfg)?;
        let degraded = check_degraded(f.wiretap.legit(), f.wiretap.eaves(), DEFAULT_DEGRADED_TOL)?.degraded;
        score(&mut t, &results, degraded);
    }

    let mut rng = stream(seed, 2);
    for i in 0..count.min(MAX_RANDOM_INSTANCES) {
        let degraded = i % 2 == 0;
        let (w, q_z) = random_wiretap(&mut rng, 4, degraded);
        let results = all_bounds(&w, &q_z, cfg)?;
        score(&mut t, &results, degraded);
        if i == 0 {
            let again = lower_bound_prop1(&w, &StealthConstraint::exact(q_z), cfg, LogBase::Two)?;
            t.determinism.record(if again == results[0] { 0.0 } else { 1.0 }, 0.0);
        }
    }

    let mut witness = PropertyTally::new("degraded_witness");
    let mut capable = PropertyTally::new("degraded_implies_more_capable");
    for i in 0..count.min(MAX_DEGRADED_INSTANCES) {
        let nx = rng.random_range(2..=5);
        let ny = rng.random_range(2..=5);
        let nz = rng.random_range(2..=5);
        let w = random_channel(&mut rng, nx, ny);
        let eaves = compose(&w, &random_channel(&mut rng, ny, nz))?;
        let v = check_degraded(&w, &eaves, DEFAULT_DEGRADED_TOL)?;
        witness.record(if v.degraded { v.residual } else { f64::INFINITY }, DEFAULT_DEGRADED_TOL);
        if i < MORE_CAPABLE_INSTANCES && nx <= 3 {
            let m = check_more_capable(&w, &eaves, default_grid_resolution(nx), 4, LogBase::Natural)?;
            capable.record(if m.more_capable { 0.0 } else { -m.min_gap }, 0.0);
        }
    }
    Ok(vec![t.ordering, t.residual, t.equality, t.determinism, witness, capable])
}
