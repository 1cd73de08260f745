use esid_core::bounds::*;
use esid_core::example::{build_scenario, RevDegradedScenario};
use esid_core::measures::{binary_entropy, mutual_information};
use esid_core::prob::*;
use esid_core::LogBase;

const BITS: LogBase = LogBase::Two;

fn h2(p: f64) -> f64 {
    binary_entropy(p, BITS).unwrap()
}

fn uniform2() -> Distribution {
    Distribution::uniform(Alphabet::binary())
}

fn rev_degraded() -> (WiretapChannel, f64) {
    let s = RevDegradedScenario::critical(0.125).unwrap();
    (build_scenario(&s).unwrap().wiretap, s.eps)
}

fn bsc_pair(a: f64, b: f64) -> WiretapChannel {
    let legit = bsc(a).unwrap();
    let eaves = compose(&legit, &bsc(b).unwrap()).unwrap();
    WiretapChannel::new(legit, eaves).unwrap()
}

fn cfg() -> OptimizerConfig {
    OptimizerConfig::default()
}

#[test]
fn stealth_membership() {
    let (w, _) = rev_degraded();
    let exact = StealthConstraint::exact(uniform2());
    let p = Distribution::uniform(w.input().clone());
    assert!(stealth_polytope_membership(&p, w.eaves(), &exact).unwrap() < 1e-15);
    let corner = Distribution::point(w.input().clone(), 0);
    assert!((stealth_polytope_membership(&corner, w.eaves(), &exact).unwrap() - 0.5).abs() < 1e-15);
    let q = push_forward(&corner, w.eaves()).unwrap();
    let own = StealthConstraint::exact(q);
    assert_eq!(stealth_polytope_membership(&corner, w.eaves(), &own).unwrap(), 0.0);
}

#[test]
fn prop1_examples() {
    let (w, _) = rev_degraded();
    let c = StealthConstraint::exact(uniform2());
    let r = lower_bound_prop1(&w, &c, &cfg(), BITS).unwrap();
    assert_eq!(r.status, BoundStatus::Infeasible);

    let legit = bsc(0.1).unwrap();
    let blind = WiretapChannel::new(legit.clone(), Channel::constant(Alphabet::binary(), &uniform2())).unwrap();
    let r = lower_bound_prop1(&blind, &c, &cfg(), BITS).unwrap();
    assert_eq!(r.status, BoundStatus::Ok);
    assert!((r.value - (1.0 - h2(0.1))).abs() < 1e-8, "{}", r.value);
    assert!((r.argmax.input_law().get(0) - 0.5).abs() < 1e-4);

    let same = WiretapChannel::new(legit.clone(), legit).unwrap();
    let r = lower_bound_prop1(&same, &c, &cfg(), BITS).unwrap();
    assert!((r.value - (1.0 - h2(0.1))).abs() < 1e-8);
    assert!(r.secrecy_gap.abs() < 1e-12);
}

#[test]
fn cor1_examples() {
    let (w, _) = rev_degraded();
    let c = StealthConstraint::exact(uniform2());
    let four = OptimizerConfig {
        u_size: Some(4),
        ..cfg()
    };
    let r = lower_bound_cor1(&w, &c, &four, BITS).unwrap();
    assert_eq!(r.status, BoundStatus::Ok);
    assert!(r.value >= 1.0 - h2(0.125) - 1e-4, "{}", r.value);
    assert!(r.stealth_residual <= 1e-7);

    let one = OptimizerConfig {
        u_size: Some(1),
        ..cfg()
    };
    assert!(lower_bound_cor1(&w, &c, &one, BITS).unwrap().value.abs() < 1e-12);

    let pair = bsc_pair(0.1, 0.25);
    let cor1 = lower_bound_cor1(&pair, &c, &cfg(), BITS).unwrap();
    let prop1 = lower_bound_prop1(&pair, &c, &cfg(), BITS).unwrap();
    assert!((cor1.value - prop1.value).abs() < 1e-6);
}

#[test]
fn thm1_examples() {
    let (w, eps) = rev_degraded();
    let c = StealthConstraint::exact(uniform2());
    let r = upper_bound_thm1(&w, &c, &cfg(), BITS).unwrap();
    assert!((r.value - 2.0 * (1.0 - eps)).abs() < 1e-6, "{}", r.value);

    let pair = bsc_pair(0.1, 0.25);
    let thm1 = upper_bound_thm1(&pair, &c, &cfg(), BITS).unwrap();
    let prop1 = lower_bound_prop1(&pair, &c, &cfg(), BITS).unwrap();
    assert!((thm1.value - (1.0 - h2(0.1))).abs() < 1e-6);
    assert!((thm1.value - prop1.value).abs() < 1e-6);

    let legit = bsc(0.1).unwrap();
    let same = WiretapChannel::new(legit.clone(), legit).unwrap();
    let skewed = StealthConstraint::exact(Distribution::point(Alphabet::binary(), 0));
    let r = upper_bound_thm1(&same, &skewed, &cfg(), BITS).unwrap();
    assert_ne!(r.status, BoundStatus::Ok);
    assert_eq!(r.value, 0.0);
}

#[test]
fn zero_capacity_examples() {
    let (w, _) = rev_degraded();
    let c = StealthConstraint::exact(uniform2());
    assert_eq!(zero_capacity_check(&w, &c, &cfg()).unwrap(), ZeroCapacity::Positive);

    let dead = Channel::constant(Alphabet::binary(), &uniform2());
    let w = WiretapChannel::new(dead, Channel::identity(Alphabet::binary())).unwrap();
    assert_eq!(zero_capacity_check(&w, &c, &cfg()).unwrap(), ZeroCapacity::Zero);

    let legit = bsc(0.1).unwrap();
    let same = WiretapChannel::new(legit.clone(), legit).unwrap();
    let skewed = StealthConstraint::exact(Distribution::point(Alphabet::binary(), 0));
    assert_eq!(zero_capacity_check(&same, &skewed, &cfg()).unwrap(), ZeroCapacity::Zero);
}

#[test]
fn est_examples() {
    let (w, eps) = rev_degraded();
    let c = StealthConstraint::exact(uniform2());
    let r = est_upper_bound(&w, &c, &cfg(), BITS).unwrap();
    assert!(r.value <= 1.0 - eps + 1e-6, "{}", r.value);

    let legit = bsc(0.1).unwrap();
    let same = WiretapChannel::new(legit.clone(), legit.clone()).unwrap();
    assert!(est_upper_bound(&same, &c, &cfg(), BITS).unwrap().value.abs() < 1e-9);

    let blind = WiretapChannel::new(legit, Channel::constant(Alphabet::binary(), &uniform2())).unwrap();
    let est = est_upper_bound(&blind, &c, &cfg(), BITS).unwrap();
    let prop1 = lower_bound_prop1(&blind, &c, &cfg(), BITS).unwrap();
    assert!((est.value - prop1.value).abs() < 1e-6);
}

#[test]
fn secret_id_examples() {
    let (w, eps) = rev_degraded();
    let r = secret_id_rate(&w, &cfg(), BITS).unwrap();
    assert!((r.value - 2.0 * (1.0 - eps)).abs() < 1e-8);

    let dead = Channel::constant(Alphabet::binary(), &uniform2());
    let w = WiretapChannel::new(dead, bsc(0.2).unwrap()).unwrap();
    assert_eq!(secret_id_rate(&w, &cfg(), BITS).unwrap().value, 0.0);

    let four = Alphabet::indexed(4);
    let blind = Channel::constant(four.clone(), &uniform2());
    let w = WiretapChannel::new(Channel::identity(four), blind).unwrap();
    assert!((secret_id_rate(&w, &cfg(), BITS).unwrap().value - 2.0).abs() < 1e-9);
}

#[test]
fn cor1_embeds_prop1_optimum() {
    // Injecting the prop1 argmax as U = X reproduces its objective.
    let pair = bsc_pair(0.05, 0.2);
    let c = StealthConstraint::exact(uniform2());
    let prop1 = lower_bound_prop1(&pair, &c, &cfg(), LogBase::Natural).unwrap();
    let p = prop1.argmax.input_law();
    let embedded = JointDistribution::from_marginal_and_channel(&p, &Channel::identity(Alphabet::binary())).unwrap();
    let pu = embedded.marginal(Side::Left);
    let i_uy = mutual_information(&pu, &compose(&embedded.conditional_channel(), pair.legit()).unwrap(), LogBase::Natural)
        .unwrap();
    assert!((i_uy - prop1.value).abs() < 1e-9);
    let cor1 = lower_bound_cor1(&pair, &c, &cfg(), LogBase::Natural).unwrap();
    assert!(cor1.value >= i_uy - 1e-9);
}

#[test]
fn seeded_runs_repeat_exactly() {
    let pair = bsc_pair(0.1, 0.1);
    let c = StealthConstraint::exact(uniform2());
    let cfg = OptimizerConfig {
        restarts: 8,
        seed: 42,
        ..cfg()
    };
    let a = lower_bound_cor1(&pair, &c, &cfg, BITS).unwrap();
    let b = lower_bound_cor1(&pair, &c, &cfg, BITS).unwrap();
    assert_eq!(a, b);
}

#[test]
fn relaxed_stealth_contains_exact() {
    let pair = bsc_pair(0.1, 0.2);
    let exact = StealthConstraint::exact(uniform2());
    let relaxed = StealthConstraint::relaxed(uniform2(), 0.05).unwrap();
    let a = lower_bound_prop1(&pair, &exact, &cfg(), BITS).unwrap();
    let b = lower_bound_prop1(&pair, &relaxed, &cfg(), BITS).unwrap();
    assert!(b.value >= a.value - 1e-9);
}

#[test]
fn capacity_oracle() {
    let c = blahut_arimoto(&bec(0.25).unwrap(), 1e-12, 10_000).unwrap();
    assert!((c.capacity / std::f64::consts::LN_2 - 0.75).abs() < 1e-9);
}
