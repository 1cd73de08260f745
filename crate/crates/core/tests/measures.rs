use approx::assert_abs_diff_eq;
use esid_core::measures::*;
use esid_core::prob::*;
use proptest::prelude::*;

fn pmf(n: usize) -> impl Strategy<Value = Distribution> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(move |w| Distribution::from_weights(&w, Alphabet::indexed(n)).unwrap())
}

fn channel(nx: usize, ny: usize) -> impl Strategy<Value = Channel> {
    prop::collection::vec(prop::collection::vec(0.01f64..1.0, ny), nx).prop_map(move |rows| {
        let rows = rows
            .into_iter()
            .map(|r| {
                let s: f64 = r.iter().sum();
                r.into_iter().map(|v| v / s).collect()
            })
            .collect();
        Channel::new(Alphabet::indexed(nx), Alphabet::indexed(ny), rows).unwrap()
    })
}

fn joint_mass(p: &Distribution, w: &Channel) -> Vec<f64> {
    let mut out = Vec::new();
    for (x, &px) in p.mass().iter().enumerate() {
        out.extend(w.row(x).iter().map(|v| px * v));
    }
    out
}

fn flat(mass: Vec<f64>) -> Distribution {
    let n = mass.len();
    Distribution::from_weights(&mass, Alphabet::indexed(n)).unwrap()
}

fn d(p: &[f64]) -> Distribution {
    Distribution::new(Alphabet::indexed(p.len()), p.to_vec()).unwrap()
}

#[test]
fn dalpha_hand_atoms() {
    let p = d(&[0.5, 0.5]);
    let q = d(&[0.25, 0.75]);
    // Atoms: ln(2/3) and ln 2, each with mass 1/2.
    let low = d_alpha(&p, &q, 0.3, LogBase::Natural).unwrap();
    let high = d_alpha(&p, &q, 0.7, LogBase::Natural).unwrap();
    assert_abs_diff_eq!(low, (2.0f64 / 3.0).ln(), epsilon = 1e-15);
    assert_abs_diff_eq!(high, 2f64.ln(), epsilon = 1e-15);
    assert_abs_diff_eq!(d_alpha(&p, &q, 0.7, LogBase::Two).unwrap(), 1.0, epsilon = 1e-15);
}

#[test]
fn dalpha_rejects_bad_alpha_and_support() {
    let p = d(&[0.5, 0.5]);
    let q = d(&[1.0, 0.0]);
    assert!(d_alpha(&p, &p, 0.0, LogBase::Natural).is_err());
    assert!(d_alpha(&p, &p, 1.0, LogBase::Natural).is_err());
    assert!(d_alpha(&p, &q, 0.5, LogBase::Natural).is_err());
}

#[test]
fn kl_reports_infinite_divergence() {
    let p = d(&[0.5, 0.5]);
    let q = d(&[1.0, 0.0]);
    let v = kl(&p, &q, LogBase::Two).unwrap();
    assert!(!v.finite && v.value.is_infinite());
    assert_eq!(kl(&q, &p, LogBase::Two).unwrap().value, 1.0);
}

#[test]
fn binary_entropy_values() {
    assert_eq!(binary_entropy(0.5, LogBase::Two).unwrap(), 1.0);
    assert_eq!(binary_entropy(0.0, LogBase::Two).unwrap(), 0.0);
    assert_abs_diff_eq!(binary_entropy(0.11, LogBase::Two).unwrap(), 0.49991596, epsilon = 1e-7);
    assert!(binary_entropy(1.5, LogBase::Two).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kl_splits_into_information_and_marginal_gap(
        (p, w, q) in (2usize..5, 2usize..5).prop_flat_map(|(nx, ny)| (pmf(nx), channel(nx, ny), pmf(ny)))
    ) {
        let py = push_forward(&p, &w).unwrap();
        let joint = flat(joint_mass(&p, &w));
        let reference = flat(p.product(&q).mass().to_vec());
        let lhs = kl(&joint, &reference, LogBase::Natural).unwrap().value;
        let rhs = mutual_information(&p, &w, LogBase::Natural).unwrap()
            + kl(&py, &q, LogBase::Natural).unwrap().value;
        prop_assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn mutual_information_is_concave_in_input(
        (p1, p2, w) in (2usize..5, 2usize..5).prop_flat_map(|(nx, ny)| (pmf(nx), pmf(nx), channel(nx, ny))),
        lambda in 0.0f64..1.0,
    ) {
        let mixed = p1.mix(&p2, lambda).unwrap();
        let i = |p: &Distribution| mutual_information(p, &w, LogBase::Natural).unwrap();
        prop_assert!(i(&mixed) >= lambda * i(&p1) + (1.0 - lambda) * i(&p2) - 1e-12);
    }

    #[test]
    fn bits_are_nats_over_ln2((p, q) in (2usize..6).prop_flat_map(|n| (pmf(n), pmf(n)))) {
        let nats = kl(&p, &q, LogBase::Natural).unwrap().value;
        let bits = kl(&p, &q, LogBase::Two).unwrap().value;
        prop_assert!((bits * std::f64::consts::LN_2 - nats).abs() < 1e-12);
        let h = entropy(&p, LogBase::Two);
        prop_assert!(h >= 0.0 && h <= (p.len() as f64).log2() + 1e-12);
    }

    #[test]
    fn composition_is_associative(
        (a, b, c) in (2usize..4, 2usize..4, 2usize..4, 2usize..4)
            .prop_flat_map(|(n0, n1, n2, n3)| (channel(n0, n1), channel(n1, n2), channel(n2, n3)))
    ) {
        let left = compose(&compose(&a, &b).unwrap(), &c).unwrap();
        let right = compose(&a, &compose(&b, &c).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right).unwrap() < 1e-14);
    }

    #[test]
    fn processing_does_not_increase_kl(
        (p, q, w) in (2usize..5, 2usize..5).prop_flat_map(|(nx, ny)| (pmf(nx), pmf(nx), channel(nx, ny)))
    ) {
        let before = kl(&p, &q, LogBase::Natural).unwrap().value;
        let pw = push_forward(&p, &w).unwrap();
        let qw = push_forward(&q, &w).unwrap();
        prop_assert!(kl(&pw, &qw, LogBase::Natural).unwrap().value <= before + 1e-12);
    }

    #[test]
    fn dalpha_is_monotone_in_alpha(
        (p, q) in (2usize..6).prop_flat_map(|n| (pmf(n), pmf(n))),
        a in 0.01f64..0.98,
        step in 0.0f64..0.01,
    ) {
        let lo = d_alpha(&p, &q, a, LogBase::Natural).unwrap();
        let hi = d_alpha(&p, &q, a + step, LogBase::Natural).unwrap();
        prop_assert!(lo <= hi);
    }

    #[test]
    fn dalpha_obeys_markov_with_negative_part(
        (p, q) in (2usize..6).prop_flat_map(|n| (pmf(n), pmf(n))),
        alpha in 0.01f64..0.99,
    ) {
        // E_P[(log Q/P)^+] <= 1/e lifts Markov's inequality to signed LLRs.
        let dalpha = d_alpha(&p, &q, alpha, LogBase::Natural).unwrap();
        let div = kl(&p, &q, LogBase::Natural).unwrap().value;
        prop_assert!(dalpha <= (div + (-1f64).exp()) / (1.0 - alpha) + 1e-12);
    }

    #[test]
    fn extension_matches_iid_products((w, p) in (2usize..4, 2usize..4).prop_flat_map(|(nx, ny)| (channel(nx, ny), pmf(nx)))) {
        let w2 = extend(&w, 2).unwrap();
        let out = push_forward(&p.product(&p), &w2).unwrap();
        let py = push_forward(&p, &w).unwrap();
        let expected = py.product(&py);
        for (a, b) in out.mass().iter().zip(expected.mass()) {
            prop_assert!((a - b).abs() < 1e-14);
        }
    }
}
