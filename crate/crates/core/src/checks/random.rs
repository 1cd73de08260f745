//! Seeded generators for randomized property checks.

use rand::Rng;

use crate::prob::{compose, push_forward, Alphabet, Channel, Distribution, WiretapChannel};
use crate::simplex::dirichlet_one;

/// A full-support law on `n` symbols, uniform over the simplex.
pub fn random_pmf<R: Rng>(rng: &mut R, n: usize) -> Distribution {
    Distribution::from_computed(Alphabet::indexed(n), dirichlet_one(rng, n)).expect("Dirichlet draws are normalized")
}

/// A channel with independent uniform rows.
pub fn random_channel<R: Rng>(rng: &mut R, inputs: usize, outputs: usize) -> Channel {
    let rows = (0..inputs).map(|_| dirichlet_one(rng, outputs)).collect();
    Channel::new(Alphabet::indexed(inputs), Alphabet::indexed(outputs), rows).expect("Dirichlet rows are normalized")
}

/// A wiretap instance with `|X|, |Y|, |Z|` in `2..=max_size` and a `Q_Z`
/// that is the image of an interior input law, so the stealth polytope is
/// non-empty. With `degraded`, the eavesdropper sees `legit` followed by a
/// random channel.
pub fn random_wiretap<R: Rng>(rng: &mut R, max_size: usize, degraded: bool) -> (WiretapChannel, Distribution) {
    let nx = rng.random_range(2..=max_size);
    let ny = rng.random_range(2..=max_size);
    let nz = rng.random_range(2..=max_size);
    let legit = random_channel(rng, nx, ny);
    let eaves = if degraded {
        compose(&legit, &random_channel(rng, ny, nz)).expect("shapes agree")
    } else {
        random_channel(rng, nx, nz)
    };
    let p = random_pmf(rng, nx);
    let q_z = push_forward(&p, &eaves).expect("shapes agree");
    (WiretapChannel::new(legit, eaves).expect("shared input"), q_z)
}
