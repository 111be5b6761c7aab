//! Deterministic, seedable generators of random rational channels and probe
//! states, shared by the test suites and the CLI's self-check command.
//!
//! Everything here produces exact rational weights (lattice points on the
//! probability simplex) so that downstream identities can be checked with
//! exact arithmetic rather than tolerances.

use std::collections::BTreeSet;

use rand::Rng;

use crate::channel::{PauliVec4, Region};
use crate::multiqubit::MultiPauliChannel;
use crate::scalar::{Exact, Scalar};

/// Uniformly random composition of `total` into `parts` nonnegative integer
/// parts (stars-and-bars: a uniform choice of bar positions).
pub fn composition<R: Rng + ?Sized>(rng: &mut R, total: u64, parts: u32) -> Vec<u64> {
    assert!(parts >= 1);
    let bars = u64::from(parts) - 1;
    let slots = total + bars;
    let mut chosen = BTreeSet::new();
    while (chosen.len() as u64) < bars {
        chosen.insert(rng.random_range(0..slots));
    }
    let mut out = Vec::with_capacity(parts as usize);
    let mut prev = 0u64; // stars consumed so far, bars consumed so far
    let mut bars_seen = 0u64;
    for bar in &chosen {
        out.push(bar - prev);
        prev = bar + 1;
        bars_seen += 1;
    }
    debug_assert_eq!(bars_seen, bars);
    out.push(slots - prev);
    debug_assert_eq!(out.iter().sum::<u64>(), total);
    out
}

/// Composition of `total` into `parts` strictly positive parts.
pub fn positive_composition<R: Rng + ?Sized>(rng: &mut R, total: u64, parts: u32) -> Vec<u64> {
    assert!(total >= u64::from(parts));
    composition(rng, total - u64::from(parts), parts)
        .into_iter()
        .map(|k| k + 1)
        .collect()
}

fn lattice_channel(parts: [u64; 4], denom: u64) -> PauliVec4<Exact> {
    let comp = |k: u64| Exact::ratio(k as i64, denom as i64);
    PauliVec4::make_channel([comp(parts[0]), comp(parts[1]), comp(parts[2]), comp(parts[3])])
        .expect("lattice point sums to one")
}

/// Random rational channel with denominator `denom` (zero weights allowed,
/// so any region of the tetrahedron can occur).
pub fn rational_channel<R: Rng + ?Sized>(rng: &mut R, denom: u64) -> PauliVec4<Exact> {
    let c = composition(rng, denom, 4);
    lattice_channel([c[0], c[1], c[2], c[3]], denom)
}

/// Random rational channel with every weight at least `1/denom`
/// (full-support interior point).
pub fn interior_channel<R: Rng + ?Sized>(rng: &mut R, denom: u64) -> PauliVec4<Exact> {
    assert!(denom >= 4);
    let c = positive_composition(rng, denom, 4);
    lattice_channel([c[0], c[1], c[2], c[3]], denom)
}

/// Random rational channel lying in the requested tetrahedron region
/// (strictly inside it: every weight the region allows to be nonzero is
/// made nonzero).
pub fn region_channel<R: Rng + ?Sized>(
    rng: &mut R,
    region: Region,
    denom: u64,
) -> PauliVec4<Exact> {
    let place = |support: &[usize], rng: &mut R| {
        let c = positive_composition(rng, denom, support.len() as u32);
        let mut parts = [0u64; 4];
        for (slot, k) in support.iter().zip(c) {
            parts[*slot] = k;
        }
        lattice_channel(parts, denom)
    };
    match region {
        Region::IdentityVertex => PauliVec4::identity(),
        Region::UnitaryVertex(a) => PauliVec4::unitary(a as usize),
        Region::AxisEdge(a) => place(&[0, a as usize], rng),
        Region::Edge(u, v) => place(&[u as usize, v as usize], rng),
        Region::Face(w) => {
            let others: Vec<usize> = (1..=3).filter(|&i| i != w as usize).collect();
            place(&[0, others[0], others[1]], rng)
        }
        Region::BaseFace => place(&[1, 2, 3], rng),
        Region::Interior => interior_channel(rng, denom),
    }
}

/// Random ordered pair `(noisier, cleaner)` of interior channels with the
/// noisier one dominating componentwise on the noise weights:
/// `p_i(noisier) >= p_i(cleaner)` for `i = 1, 2, 3` (equivalently
/// `p_0(noisier) <= p_0(cleaner)`). The pair is equal when the randomly
/// drawn noise budget is zero.
pub fn noisier_pair<R: Rng + ?Sized>(
    rng: &mut R,
    denom: u64,
) -> (PauliVec4<Exact>, PauliVec4<Exact>) {
    assert!(denom >= 4);
    let base = positive_composition(rng, denom, 4);
    let cleaner = lattice_channel([base[0], base[1], base[2], base[3]], denom);
    let budget = rng.random_range(0..base[0]);
    let extra = composition(rng, budget, 3);
    let noisier = lattice_channel(
        [
            base[0] - budget,
            base[1] + extra[0],
            base[2] + extra[1],
            base[3] + extra[2],
        ],
        denom,
    );
    (noisier, cleaner)
}

/// Uniform random point in the closed unit ball (a valid Bloch vector).
pub fn bloch_vector<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let r = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        if r[0] * r[0] + r[1] * r[1] + r[2] * r[2] <= 1.0 {
            return r;
        }
    }
}

/// Round nonnegative reals to integers summing to `denom` by the
/// largest-remainder method.
fn largest_remainder(raw: &[f64], denom: u64) -> Vec<u64> {
    let total: f64 = raw.iter().sum();
    let scaled: Vec<f64> = raw.iter().map(|x| x * denom as f64 / total).collect();
    let mut parts: Vec<u64> = scaled.iter().map(|x| x.floor() as u64).collect();
    let mut shortfall = denom - parts.iter().sum::<u64>();
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = scaled[a] - scaled[a].floor();
        let fb = scaled[b] - scaled[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &i in &order {
        if shortfall == 0 {
            break;
        }
        parts[i] += 1;
        shortfall -= 1;
    }
    parts
}

/// Random `m`-qubit Pauli channel with rational weights of denominator
/// `denom`, supported (generically) on all `4^m` labels.
pub fn multi_channel<R: Rng + ?Sized>(rng: &mut R, m: u8, denom: u64) -> MultiPauliChannel<Exact> {
    let n_labels = 1usize << (2 * m);
    let raw: Vec<f64> = (0..n_labels).map(|_| rng.random_range(0.01..1.0)).collect();
    let parts = largest_remainder(&raw, denom);
    let mut weights = std::collections::BTreeMap::new();
    let mask = (1u32 << m) - 1;
    for (idx, &w) in parts.iter().enumerate() {
        if w == 0 {
            continue;
        }
        let x = idx as u32 & mask;
        let z = (idx as u32 >> m) & mask;
        weights.insert((x, z), Exact::ratio(w as i64, denom as i64));
    }
    MultiPauliChannel::make_channel(m, weights).expect("largest-remainder weights sum to one")
}

/// Random two-qubit Pauli channel carrying zero weight on the identity
/// label, spread over the remaining 15 labels with rational weights of
/// denominator 1000.
pub fn zero_identity_two_qubit<R: Rng + ?Sized>(rng: &mut R) -> MultiPauliChannel<Exact> {
    let denom = 1000u64;
    let raw: Vec<f64> = (0..15).map(|_| rng.random_range(0.01..1.0)).collect();
    let parts = largest_remainder(&raw, denom);
    let mut weights = std::collections::BTreeMap::new();
    let labels: Vec<(u32, u32)> = (1..16u32).map(|idx| (idx & 0b11, idx >> 2)).collect();
    for (label, &w) in labels.iter().zip(parts.iter()) {
        if w == 0 {
            continue;
        }
        weights.insert(*label, Exact::ratio(w as i64, denom as i64));
    }
    MultiPauliChannel::make_channel(2, weights).expect("weights sum to one")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn compositions_sum_and_cover() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let c = composition(&mut rng, 17, 4);
            assert_eq!(c.len(), 4);
            assert_eq!(c.iter().sum::<u64>(), 17);
        }
        // Boundary values are reachable.
        let mut saw_zero = false;
        let mut saw_total = false;
        for _ in 0..2000 {
            let c = composition(&mut rng, 3, 2);
            saw_zero |= c[0] == 0;
            saw_total |= c[0] == 3;
        }
        assert!(saw_zero && saw_total);
    }

    #[test]
    fn samplers_respect_their_regions() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        use crate::channel::classify;
        for region in [
            Region::IdentityVertex,
            Region::UnitaryVertex(2),
            Region::AxisEdge(3),
            Region::Edge(1, 2),
            Region::Face(1),
            Region::BaseFace,
            Region::Interior,
        ] {
            for _ in 0..20 {
                let ch = region_channel(&mut rng, region, 16);
                assert_eq!(classify(&ch).region, region, "sampler for {region:?}");
            }
        }
    }

    #[test]
    fn noisier_pair_dominates() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let (noisy, clean) = noisier_pair(&mut rng, 24);
            assert!(noisy.p(0) <= clean.p(0));
            for i in 1..4 {
                assert!(noisy.p(i) >= clean.p(i));
            }
        }
    }

    #[test]
    fn zero_identity_sampler_has_no_identity_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let ch = zero_identity_two_qubit(&mut rng);
            assert!(ch
                .weights()
                .get(&(0, 0))
                .map(Zero::is_zero)
                .unwrap_or(true));
            let total: Exact = ch.weights().values().cloned().sum();
            assert!(total.is_one());
            assert!(ch.weights().len() >= 10, "support should stay broad");
        }
    }
}
