//! Multi-qubit Pauli words in symplectic form, switch pairing for
//! multi-qubit Pauli channels, and the identity-outcome rate that exhibits
//! why single-switch distillation stops working beyond one qubit.

use std::collections::BTreeMap;
use std::fmt;

use crate::channel::PauliVec4;
use crate::kraus::{Mat2, C64};
use crate::scalar::Scalar;
use crate::switch::merge_scatter;
use crate::Error;

/// Weight map of a multi-qubit Pauli channel, keyed by `(x, z)` label.
type LabelWeights<S> = BTreeMap<(u32, u32), S>;

/// An `m`-qubit Pauli word `i^phase * W(x, z)` with
/// `W(x, z) = ⊗_k i^{x_k z_k} X^{x_k} Z^{z_k}` (so the single-qubit
/// `W(1, 1)` is exactly Y). Bit `k` of `x`/`z` addresses qubit `k`, which is
/// the `k`-th tensor factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymplecticPauli {
    pub x: u32,
    pub z: u32,
    /// Power of `i` in the prefactor (mod 4).
    pub phase: u8,
    /// Number of qubits.
    pub m: u8,
}

/// Phase power `k` in `W_a W_b = i^k W_{a XOR b}` for single-qubit labels,
/// derived from the dense matrices at first use. Index `x | z << 1`.
fn single_product_phase(a: (u8, u8), b: (u8, u8)) -> u8 {
    static TABLE: std::sync::OnceLock<[[u8; 4]; 4]> = std::sync::OnceLock::new();
    let t = TABLE.get_or_init(|| {
        let dense = |x: u8, z: u8| -> Mat2 {
            let xm = if x == 1 { Mat2::pauli(1) } else { Mat2::id() };
            let zm = if z == 1 { Mat2::pauli(3) } else { Mat2::id() };
            let m = xm.mul(&zm);
            if x == 1 && z == 1 {
                m.scale(C64::i())
            } else {
                m
            }
        };
        let phases = [
            C64::new(1.0, 0.0),
            C64::i(),
            C64::new(-1.0, 0.0),
            -C64::i(),
        ];
        let mut t = [[0u8; 4]; 4];
        for ia in 0..4u8 {
            for ib in 0..4u8 {
                let (xa, za) = (ia & 1, ia >> 1);
                let (xb, zb) = (ib & 1, ib >> 1);
                let prod = dense(xa, za).mul(&dense(xb, zb));
                let target = dense(xa ^ xb, za ^ zb);
                let k = phases
                    .iter()
                    .position(|p| prod.sub(&target.scale(*p)).frobenius_norm() < 1e-12)
                    .expect("Pauli word products differ by a power of i");
                t[ia as usize][ib as usize] = k as u8;
            }
        }
        t
    });
    t[(a.0 | a.1 << 1) as usize][(b.0 | b.1 << 1) as usize]
}

impl SymplecticPauli {
    /// Phase-free word on `m` qubits.
    pub fn new(m: u8, x: u32, z: u32) -> Self {
        assert!((1..=16).contains(&m), "qubit count out of range");
        let mask = (1u32 << m) - 1;
        assert!(x & !mask == 0 && z & !mask == 0, "label bits exceed m");
        Self { x, z, phase: 0, m }
    }

    pub fn identity(m: u8) -> Self {
        Self::new(m, 0, 0)
    }

    pub fn is_identity_label(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Operator product, tracking the accumulated power of `i`.
    pub fn product(&self, other: &Self) -> Result<Self, Error> {
        if self.m != other.m {
            return Err(Error::SizeMismatch);
        }
        let mut k = u32::from(self.phase) + u32::from(other.phase);
        for q in 0..self.m {
            let a = ((self.x >> q & 1) as u8, (self.z >> q & 1) as u8);
            let b = ((other.x >> q & 1) as u8, (other.z >> q & 1) as u8);
            k += u32::from(single_product_phase(a, b));
        }
        Ok(Self {
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: (k % 4) as u8,
            m: self.m,
        })
    }

    /// Two Pauli words either commute or anticommute; they commute exactly
    /// when the symplectic form `<x_a, z_b> + <z_a, x_b>` is even.
    pub fn commutes(&self, other: &Self) -> Result<bool, Error> {
        if self.m != other.m {
            return Err(Error::SizeMismatch);
        }
        let parity =
            (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        Ok(parity.is_multiple_of(2))
    }

    /// Dense `2^m x 2^m` matrix (first tensor factor most significant),
    /// including the phase prefactor.
    pub fn to_dense(&self) -> Vec<C64> {
        let mut acc = vec![C64::new(1.0, 0.0)];
        let mut dim = 1usize;
        for q in 0..self.m {
            let x = (self.x >> q & 1) as usize;
            let z = (self.z >> q & 1) as usize;
            let factor = match (x, z) {
                (0, 0) => Mat2::pauli(0),
                (1, 0) => Mat2::pauli(1),
                (0, 1) => Mat2::pauli(3),
                _ => Mat2::pauli(2),
            };
            // acc = acc ⊗ factor ... with qubit 0 as the FIRST factor we
            // must append new qubits as the LEAST significant block.
            let new_dim = dim * 2;
            let mut next = vec![C64::new(0.0, 0.0); new_dim * new_dim];
            for i in 0..dim {
                for j in 0..dim {
                    for a in 0..2 {
                        for b in 0..2 {
                            next[(i * 2 + a) * new_dim + (j * 2 + b)] =
                                acc[i * dim + j] * factor.entry(a, b);
                        }
                    }
                }
            }
            acc = next;
            dim = new_dim;
        }
        let phase = [
            C64::new(1.0, 0.0),
            C64::i(),
            C64::new(-1.0, 0.0),
            -C64::i(),
        ][self.phase as usize];
        acc.iter().map(|e| e * phase).collect()
    }
}

impl fmt::Display for SymplecticPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.m {
            if q > 0 {
                f.write_str("⊗")?;
            }
            let x = self.x >> q & 1;
            let z = self.z >> q & 1;
            f.write_str(match (x, z) {
                (0, 0) => "1",
                (1, 0) => "X",
                (0, 1) => "Z",
                _ => "Y",
            })?;
        }
        Ok(())
    }
}

/// Full bracket of two Pauli words: the anticommutator `{a, b}` when
/// `anticommutator` is true, the commutator `[a, b]` otherwise. Either
/// bracket is `2 a b` when it survives and vanishes (`None`) otherwise —
/// the anticommutator survives exactly for commuting words. The surviving
/// bracket is returned as a complex coefficient `2 i^k` and a phase-free
/// word.
pub fn bracket(
    a: &SymplecticPauli,
    b: &SymplecticPauli,
    anticommutator: bool,
) -> Result<Option<(C64, SymplecticPauli)>, Error> {
    if a.commutes(b)? != anticommutator {
        return Ok(None);
    }
    let prod = a.product(b)?;
    let phase = [
        C64::new(1.0, 0.0),
        C64::i(),
        C64::new(-1.0, 0.0),
        -C64::i(),
    ][prod.phase as usize];
    let word = SymplecticPauli::new(prod.m, prod.x, prod.z);
    Ok(Some((phase * C64::new(2.0, 0.0), word)))
}

/// An `m`-qubit Pauli channel: a probability distribution over phase-free
/// Pauli labels `(x, z)`. Zero weights are dropped, so the map's key set is
/// the channel's support.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPauliChannel<S: Scalar> {
    m: u8,
    weights: BTreeMap<(u32, u32), S>,
}

impl<S: Scalar> MultiPauliChannel<S> {
    /// Validate a weight map into a channel (labels within `m` qubits,
    /// weights nonnegative, total exactly one — within 1e-12 in float
    /// mode).
    pub fn make_channel(
        m: u8,
        weights: BTreeMap<(u32, u32), S>,
    ) -> Result<Self, Error> {
        assert!((1..=16).contains(&m), "qubit count out of range");
        let mask = !((1u64 << m) as u32).wrapping_sub(1);
        let mut total = S::zero();
        let mut clean = BTreeMap::new();
        for ((x, z), w) in weights {
            if x & mask != 0 || z & mask != 0 {
                return Err(Error::Parse(format!("label ({x}, {z}) exceeds {m} qubits")));
            }
            if !w.to_f64().is_finite() {
                return Err(Error::NotNormalised);
            }
            if w < S::zero() {
                return Err(Error::NegativeWeight);
            }
            if w.is_zero() {
                continue;
            }
            total = total + w.clone();
            clean.insert((x, z), w);
        }
        let normalised = if S::EXACT {
            total == S::one()
        } else {
            (total.to_f64() - 1.0).abs() <= crate::scalar::FLOAT_EQ_TOL
        };
        if !normalised {
            return Err(Error::NotNormalised);
        }
        Ok(Self { m, weights: clean })
    }

    /// The identity channel on `m` qubits.
    pub fn identity(m: u8) -> Self {
        let mut weights = BTreeMap::new();
        weights.insert((0, 0), S::one());
        Self { m, weights }
    }

    /// Embed a single-qubit channel (I, X, Y, Z weights) as a 1-qubit
    /// multi-channel.
    pub fn from_single(ch: &PauliVec4<S>) -> Self {
        let labels = [(0u32, 0u32), (1, 0), (1, 1), (0, 1)];
        let mut weights = BTreeMap::new();
        for (i, label) in labels.iter().enumerate() {
            if !ch.p(i).is_zero() {
                weights.insert(*label, ch.p(i).clone());
            }
        }
        Self { m: 1, weights }
    }

    /// Tensor product channel: independent noise on the two blocks.
    pub fn tensor(&self, other: &Self) -> Self {
        let m = self.m + other.m;
        assert!(m <= 16);
        let mut weights = BTreeMap::new();
        for ((x1, z1), w1) in &self.weights {
            for ((x2, z2), w2) in &other.weights {
                weights.insert(
                    (x1 | x2 << self.m, z1 | z2 << self.m),
                    w1.clone() * w2.clone(),
                );
            }
        }
        Self { m, weights }
    }

    pub fn m(&self) -> u8 {
        self.m
    }

    /// Support and weights (zero entries are never stored).
    pub fn weights(&self) -> &BTreeMap<(u32, u32), S> {
        &self.weights
    }

    /// True when the channel is exactly the identity (all weight on the
    /// identity label).
    pub fn is_identity(&self) -> bool {
        self.weights.len() == 1 && self.weights.contains_key(&(0, 0))
    }
}

/// One branch of a multi-qubit switch measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPairingResult<S: Scalar> {
    pub weight: S,
    /// Normalised output channel; the identity placeholder when `weight`
    /// is zero.
    pub channel: MultiPauliChannel<S>,
}

fn commute_labels(a: (u32, u32), b: (u32, u32)) -> bool {
    ((a.0 & b.1).count_ones() + (a.1 & b.0).count_ones()).is_multiple_of(2)
}

/// Unnormalised switch pairing on weight maps: ordered label pairs land on
/// the product label, in the `+` branch when they commute and the `−`
/// branch when they don't. Phases are irrelevant because only squared
/// magnitudes survive the ancilla projection.
fn pair_multi_unnorm<S: Scalar>(
    e: &LabelWeights<S>,
    f: &LabelWeights<S>,
) -> (LabelWeights<S>, LabelWeights<S>) {
    let mut plus: LabelWeights<S> = BTreeMap::new();
    let mut minus: LabelWeights<S> = BTreeMap::new();
    for (la, wa) in e {
        for (lb, wb) in f {
            let prod = (la.0 ^ lb.0, la.1 ^ lb.1);
            let target = if commute_labels(*la, *lb) {
                &mut plus
            } else {
                &mut minus
            };
            let w = wa.clone() * wb.clone();
            match target.get_mut(&prod) {
                Some(slot) => *slot = slot.clone() + w,
                None => {
                    target.insert(prod, w);
                }
            }
        }
    }
    (plus, minus)
}

fn normalise_multi<S: Scalar>(
    m: u8,
    raw: BTreeMap<(u32, u32), S>,
) -> MultiPairingResult<S> {
    let weight = raw.values().fold(S::zero(), |acc, w| acc + w.clone());
    if weight.is_zero() {
        return MultiPairingResult {
            weight,
            channel: MultiPauliChannel::identity(m),
        };
    }
    let weights = raw
        .into_iter()
        .map(|(l, w)| (l, w / weight.clone()))
        .collect();
    MultiPairingResult {
        weight,
        channel: MultiPauliChannel { m, weights },
    }
}

/// Switch both branches for two `m`-qubit Pauli channels: returns the
/// (`+`, `−`) outcomes with their probabilities and normalised channels.
pub fn switch_ensemble_multi<S: Scalar>(
    e: &MultiPauliChannel<S>,
    f: &MultiPauliChannel<S>,
) -> Result<(MultiPairingResult<S>, MultiPairingResult<S>), Error> {
    if e.m != f.m {
        return Err(Error::SizeMismatch);
    }
    let (plus, minus) = pair_multi_unnorm(&e.weights, &f.weights);
    Ok((normalise_multi(e.m, plus), normalise_multi(e.m, minus)))
}

/// Maximum nesting order of the multi-qubit identity-outcome scan.
pub const MAX_MULTI_ORDER: i64 = 2;

/// Total probability that an order-`n` nesting of switches on `2^n` copies
/// of the channel ends in an outcome whose conditional channel is exactly
/// the identity. At order 0 this is 1 for the identity channel and 0
/// otherwise.
pub fn identity_outcome_rate_multi<S: Scalar>(
    ch: &MultiPauliChannel<S>,
    order: i64,
) -> Result<S, Error> {
    if order < 0 {
        return Err(Error::OrderNegative);
    }
    if order > MAX_MULTI_ORDER {
        return Err(Error::OrderTooLarge {
            got: order,
            max: MAX_MULTI_ORDER,
        });
    }
    // Unnormalised weight maps per outcome record, dense by record bits.
    let mut table: Vec<BTreeMap<(u32, u32), S>> = vec![ch.weights.clone()];
    let mut len = 0usize;
    for _ in 0..order {
        let (scatter_a, scatter_b, root) = merge_scatter(len);
        let scatter = |bits: usize, map: &[usize]| -> usize {
            let mut out = 0usize;
            for (k, pos) in map.iter().enumerate() {
                if bits >> k & 1 == 1 {
                    out |= 1 << pos;
                }
            }
            out
        };
        let mut next: Vec<BTreeMap<(u32, u32), S>> =
            vec![BTreeMap::new(); 1 << (2 * len + 1)];
        for (ia, wa) in table.iter().enumerate() {
            let base_a = scatter(ia, &scatter_a);
            for (ib, wb) in table.iter().enumerate() {
                let bits = base_a | scatter(ib, &scatter_b);
                let (plus, minus) = pair_multi_unnorm(wa, wb);
                for (sign_bits, part) in [(bits, plus), (bits | 1 << root, minus)] {
                    let slot = &mut next[sign_bits];
                    for (l, w) in part {
                        match slot.get_mut(&l) {
                            Some(acc) => *acc = acc.clone() + w,
                            None => {
                                slot.insert(l, w);
                            }
                        }
                    }
                }
            }
        }
        table = next;
        len = 2 * len + 1;
    }
    let mut rate = S::zero();
    for map in &table {
        let support: Vec<_> = map.iter().filter(|(_, w)| !w.is_zero()).collect();
        if support.len() == 1 && *support[0].0 == (0, 0) {
            rate = rate + support[0].1.clone();
        }
    }
    Ok(rate)
}
