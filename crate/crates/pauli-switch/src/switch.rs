//! The quantum-switch pairing algebra on Pauli channels, outcome-string
//! bookkeeping for nested switches, and the exact outcome ensembles of
//! higher-order superswitches.
//!
//! A quantum switch fed two Pauli channels and measured in the coherent
//! control basis `|±>` produces, per outcome, another Pauli channel. Both
//! branches are bilinear in the input weight vectors, so the whole nested
//! construction can be evaluated exactly on unnormalised weight vectors and
//! normalised once at the end.

use serde_json::{json, Value};
use std::fmt;
use std::str::FromStr;

use crate::channel::PauliVec4;
use crate::scalar::{sum4, Scalar};
use crate::Error;

/// One branch of a switch measurement: the probability of the outcome and
/// the normalised channel the survivors experience.
#[derive(Clone, Debug, PartialEq)]
pub struct PairingResult<S: Scalar> {
    pub weight: S,
    /// Normalised output channel; the identity placeholder when `weight`
    /// is zero.
    pub channel: PauliVec4<S>,
}

/// Unnormalised "+" branch of the switch pairing:
/// `(sum_i p_i q_i, p0 q1 + p1 q0, p0 q2 + p2 q0, p0 q3 + p3 q0)`.
///
/// The anticommutator of two Pauli conjugations contributes here: labels
/// that commute survive the `|+>` projection, and the product of equal
/// labels is the identity (the diagonal term), while the identity times a
/// Pauli keeps its label (the off-diagonal terms).
pub fn pair_plus_unnorm<S: Scalar>(p: &[S; 4], q: &[S; 4]) -> [S; 4] {
    [
        p[0].clone() * q[0].clone()
            + p[1].clone() * q[1].clone()
            + p[2].clone() * q[2].clone()
            + p[3].clone() * q[3].clone(),
        p[0].clone() * q[1].clone() + p[1].clone() * q[0].clone(),
        p[0].clone() * q[2].clone() + p[2].clone() * q[0].clone(),
        p[0].clone() * q[3].clone() + p[3].clone() * q[0].clone(),
    ]
}

/// Unnormalised "−" branch of the switch pairing:
/// `(0, p2 q3 + p3 q2, p3 q1 + p1 q3, p1 q2 + p2 q1)`.
///
/// Only anticommuting label pairs survive the `|−>` projection, and the
/// product of two distinct non-identity Paulis is the third — so the
/// identity component is structurally zero for every input.
pub fn pair_minus_unnorm<S: Scalar>(p: &[S; 4], q: &[S; 4]) -> [S; 4] {
    [
        S::zero(),
        p[2].clone() * q[3].clone() + p[3].clone() * q[2].clone(),
        p[3].clone() * q[1].clone() + p[1].clone() * q[3].clone(),
        p[1].clone() * q[2].clone() + p[2].clone() * q[1].clone(),
    ]
}

fn normalise<S: Scalar>(raw: [S; 4]) -> PairingResult<S> {
    let weight = sum4(&raw);
    if weight.is_zero() {
        return PairingResult {
            weight,
            channel: PauliVec4::identity(),
        };
    }
    let channel = PauliVec4::new_unchecked([
        raw[0].clone() / weight.clone(),
        raw[1].clone() / weight.clone(),
        raw[2].clone() / weight.clone(),
        raw[3].clone() / weight.clone(),
    ]);
    PairingResult { weight, channel }
}

/// "+" branch of the switch on two normalised channels: outcome weight and
/// normalised output channel.
pub fn pair_plus<S: Scalar>(p: &PauliVec4<S>, q: &PauliVec4<S>) -> PairingResult<S> {
    normalise(pair_plus_unnorm(p.components(), q.components()))
}

/// "−" branch of the switch on two normalised channels.
pub fn pair_minus<S: Scalar>(p: &PauliVec4<S>, q: &PauliVec4<S>) -> PairingResult<S> {
    normalise(pair_minus_unnorm(p.components(), q.components()))
}

/// Measurement record of a nested switch: one `+`/`−` character per control
/// ancilla, serialised level order — innermost switches first, within each
/// level the left block before the right block, the outermost (root) switch
/// last. An order-`n` superswitch has `2^n - 1` characters.
///
/// Stored bit-packed: bit `k` set means position `k` reads `−`. Dense
/// enumeration of all outcomes of a given length is by increasing `bits`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OutcomeString {
    bits: u32,
    len: u8,
}

impl OutcomeString {
    pub fn from_bits(bits: u32, len: u8) -> Self {
        assert!(len <= 32 && (len == 32 || bits < (1u64 << len) as u32));
        Self { bits, len }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// True when position `k` (level order) reads `−`.
    pub fn is_minus(&self, k: usize) -> bool {
        assert!(k < self.len());
        self.bits >> k & 1 == 1
    }
}

impl fmt::Display for OutcomeString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.len() {
            f.write_str(if self.is_minus(k) { "-" } else { "+" })?;
        }
        Ok(())
    }
}

impl FromStr for OutcomeString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let mut bits = 0u32;
        let mut len = 0u8;
        for c in s.chars() {
            if len >= 32 {
                return Err(Error::Parse(s.to_string()));
            }
            match c {
                '+' => {}
                '-' => bits |= 1 << len,
                _ => return Err(Error::Parse(s.to_string())),
            }
            len += 1;
        }
        Ok(Self { bits, len })
    }
}

/// Position bookkeeping for nesting two order-`m` superswitches under a new
/// root switch: where each character of the left (`a`) and right (`b`)
/// sub-records lands in the combined level-order record, plus the position
/// of the new root character.
///
/// `sub_len` must be `2^m - 1`. Depth-`d` blocks (innermost = depth 1) of
/// the two sub-records are placed side by side — left block first — inside
/// the combined depth-`d` block, and the root goes last.
pub(crate) fn merge_scatter(sub_len: usize) -> (Vec<usize>, Vec<usize>, usize) {
    let m = (sub_len + 1).trailing_zeros() as usize;
    assert_eq!(1usize << m, sub_len + 1, "sub_len must be 2^m - 1");
    let mut a = vec![0usize; sub_len];
    let mut b = vec![0usize; sub_len];
    for d in 1..=m {
        let block = 1usize << (m - d);
        let src = (1usize << m) - (block << 1);
        let dst = (1usize << (m + 1)) - (1usize << (m + 2 - d));
        for o in 0..block {
            a[src + o] = dst + o;
            b[src + o] = dst + block + o;
        }
    }
    (a, b, (1usize << (m + 1)) - 2)
}

/// One outcome of a superswitch measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleEntry<S: Scalar> {
    pub outcome: OutcomeString,
    pub prob: S,
    /// Normalised conditional channel; the identity placeholder when the
    /// outcome has probability zero.
    pub channel: PauliVec4<S>,
    /// True when `prob` is zero and `channel` is only a placeholder.
    pub placeholder: bool,
}

/// Complete outcome ensemble of an order-`n` superswitch: `2^(2^n - 1)`
/// entries in dense outcome order, probabilities summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeEnsemble<S: Scalar> {
    pub order: u32,
    pub entries: Vec<EnsembleEntry<S>>,
}

impl<S: Scalar> OutcomeEnsemble<S> {
    /// Look up an outcome by its record string.
    pub fn get(&self, outcome: &str) -> Option<&EnsembleEntry<S>> {
        let key: OutcomeString = outcome.parse().ok()?;
        self.entries.iter().find(|e| e.outcome == key)
    }
}

/// Maximum supported superswitch order for the exact ensemble engine. The
/// outcome table doubles in length with each extra character (order 5 would
/// already need 2^31 entries).
pub const MAX_SUPERSWITCH_ORDER: i64 = 4;

/// Exact outcome ensemble of the order-`n` superswitch fed `2^n` copies of
/// `ch`. Order 0 is the bare channel (a single empty outcome record);
/// order 1 is the plain quantum switch. Orders above
/// [`MAX_SUPERSWITCH_ORDER`] are rejected with [`Error::OrderTooLarge`].
pub fn superswitch<S: Scalar>(ch: &PauliVec4<S>, order: i64) -> Result<OutcomeEnsemble<S>, Error> {
    if order < 0 {
        return Err(Error::OrderNegative);
    }
    if order > MAX_SUPERSWITCH_ORDER {
        return Err(Error::OrderTooLarge {
            got: order,
            max: MAX_SUPERSWITCH_ORDER,
        });
    }
    // Unnormalised weight vectors, indexed densely by outcome bits.
    let mut table: Vec<[S; 4]> = vec![ch.components().clone()];
    let mut len = 0usize;
    for _ in 0..order {
        table = combine_level(&table, len);
        len = 2 * len + 1;
    }
    let entries = table
        .into_iter()
        .enumerate()
        .map(|(bits, raw)| {
            let prob = sum4(&raw);
            let placeholder = prob.is_zero();
            let PairingResult { channel, .. } = normalise(raw);
            EnsembleEntry {
                outcome: OutcomeString::from_bits(bits as u32, len as u8),
                prob,
                channel,
                placeholder,
            }
        })
        .collect();
    Ok(OutcomeEnsemble {
        order: order as u32,
        entries,
    })
}

/// Nest two copies of an order-`m` outcome table (record length `sub_len`)
/// under a fresh root switch.
fn combine_level<S: Scalar>(table: &[[S; 4]], sub_len: usize) -> Vec<[S; 4]> {
    let (scatter_a, scatter_b, root) = merge_scatter(sub_len);
    let scatter = |bits: usize, map: &[usize]| -> usize {
        let mut out = 0usize;
        for (k, pos) in map.iter().enumerate() {
            if bits >> k & 1 == 1 {
                out |= 1 << pos;
            }
        }
        out
    };
    let zero = || [S::zero(), S::zero(), S::zero(), S::zero()];
    let mut out = vec![zero(); 1 << (2 * sub_len + 1)];
    for (ia, va) in table.iter().enumerate() {
        let base_a = scatter(ia, &scatter_a);
        for (ib, vb) in table.iter().enumerate() {
            let bits = base_a | scatter(ib, &scatter_b);
            let plus = pair_plus_unnorm(va, vb);
            let minus = pair_minus_unnorm(va, vb);
            accumulate(&mut out[bits], plus);
            accumulate(&mut out[bits | 1 << root], minus);
        }
    }
    out
}

fn accumulate<S: Scalar>(acc: &mut [S; 4], add: [S; 4]) {
    for (slot, x) in acc.iter_mut().zip(add) {
        *slot = slot.clone() + x;
    }
}

/// The plain quantum switch: order-1 superswitch (outcomes `+` and `−`).
pub fn quantum_switch<S: Scalar>(ch: &PauliVec4<S>) -> OutcomeEnsemble<S> {
    superswitch(ch, 1).expect("order 1 is always supported")
}

/// Closed-form order-2 ensemble, written out polynomial by polynomial as an
/// independent check on the recursive engine. Entries appear in the same
/// dense outcome order as [`superswitch`] produces.
pub fn order2_closed_form<S: Scalar>(ch: &PauliVec4<S>) -> OutcomeEnsemble<S> {
    let p0 = ch.p(0).clone();
    let p1 = ch.p(1).clone();
    let p2 = ch.p(2).clone();
    let p3 = ch.p(3).clone();
    let e1 = p1.clone() + p2.clone() + p3.clone();
    let s2 = p1.clone() * p1.clone() + p2.clone() * p2.clone() + p3.clone() * p3.clone();
    let m2 = p1.clone() * p2.clone() + p2.clone() * p3.clone() + p3.clone() * p1.clone();
    let t = p0.clone() * p0.clone() + s2.clone();
    let n = |k: i64| S::from_int(k);

    // prob("+++") = p0^4 + 4 p0^3 e1 + 6 p0^2 s2 + 4 p0 e1 s2 + s2^2,
    // noise part 4 p0 t {p1, p2, p3}, identity part the remainder.
    let q_ppp = p0.clone() * p0.clone() * p0.clone() * p0.clone()
        + n(4) * p0.clone() * p0.clone() * p0.clone() * e1.clone()
        + n(6) * p0.clone() * p0.clone() * s2.clone()
        + n(4) * p0.clone() * e1.clone() * s2.clone()
        + s2.clone() * s2.clone();
    let c_ppp = {
        let f = n(4) * p0.clone() * t.clone();
        let noise = [
            f.clone() * p1.clone(),
            f.clone() * p2.clone(),
            f * p3.clone(),
        ];
        [
            q_ppp.clone() - noise[0].clone() - noise[1].clone() - noise[2].clone(),
            noise[0].clone(),
            noise[1].clone(),
            noise[2].clone(),
        ]
    };

    // prob("-++") = prob("+-+") = 12 p0 p1 p2 p3 + 2 t m2,
    // channel ∝ 2 t {p2 p3, p1 p3, p1 p2} plus an identity remainder.
    let q_mpp = n(12) * p0.clone() * p1.clone() * p2.clone() * p3.clone()
        + n(2) * t.clone() * m2.clone();
    let c_mpp = {
        let f = n(2) * t.clone();
        let noise = [
            f.clone() * p2.clone() * p3.clone(),
            f.clone() * p1.clone() * p3.clone(),
            f * p1.clone() * p2.clone(),
        ];
        [
            q_mpp.clone() - noise[0].clone() - noise[1].clone() - noise[2].clone(),
            noise[0].clone(),
            noise[1].clone(),
            noise[2].clone(),
        ]
    };

    // prob("--+") = 4 (p1^2 p2^2 + p2^2 p3^2 + p3^2 p1^2); channel exactly Id.
    let q_mmp = n(4)
        * (p1.clone() * p1.clone() * p2.clone() * p2.clone()
            + p2.clone() * p2.clone() * p3.clone() * p3.clone()
            + p3.clone() * p3.clone() * p1.clone() * p1.clone());
    let c_mmp = [q_mmp.clone(), S::zero(), S::zero(), S::zero()];

    // prob("++-") = 8 p0^2 m2; channel ∝ {p2 p3, p1 p3, p1 p2}, no identity.
    let q_ppm = n(8) * p0.clone() * p0.clone() * m2.clone();
    let c_ppm = {
        let f = n(8) * p0.clone() * p0.clone();
        [
            S::zero(),
            f.clone() * p2.clone() * p3.clone(),
            f.clone() * p1.clone() * p3.clone(),
            f * p1.clone() * p2.clone(),
        ]
    };

    // prob("-+-") = prob("+--")
    //   = 4 p0 (p1^2 (p2 + p3) + p2^2 (p3 + p1) + p3^2 (p1 + p2)),
    // channel ∝ {p1 (p2^2 + p3^2), p2 (p1^2 + p3^2), p3 (p1^2 + p2^2)}.
    let c_mpm = {
        let f = n(4) * p0.clone();
        [
            S::zero(),
            f.clone() * p1.clone() * (p2.clone() * p2.clone() + p3.clone() * p3.clone()),
            f.clone() * p2.clone() * (p1.clone() * p1.clone() + p3.clone() * p3.clone()),
            f * p3.clone() * (p1.clone() * p1.clone() + p2.clone() * p2.clone()),
        ]
    };
    let q_mpm = sum4(&c_mpm);

    // prob("---") = 8 p1 p2 p3 (p1 + p2 + p3); channel ∝ {p1, p2, p3}.
    let q_mmm = n(8) * p1.clone() * p2.clone() * p3.clone() * e1.clone();
    let c_mmm = {
        let f = n(8) * p1.clone() * p2.clone() * p3.clone();
        [
            S::zero(),
            f.clone() * p1.clone(),
            f.clone() * p2.clone(),
            f * p3.clone(),
        ]
    };

    let raw: [( &str, S, [S; 4]); 8] = [
        ("+++", q_ppp, c_ppp),
        ("-++", q_mpp.clone(), c_mpp.clone()),
        ("+-+", q_mpp, c_mpp),
        ("--+", q_mmp, c_mmp),
        ("++-", q_ppm, c_ppm),
        ("-+-", q_mpm.clone(), c_mpm.clone()),
        ("+--", q_mpm, c_mpm),
        ("---", q_mmm, c_mmm),
    ];
    let entries = raw
        .into_iter()
        .map(|(name, prob, vec)| {
            debug_assert!(sum4(&vec) == prob);
            let placeholder = prob.is_zero();
            let PairingResult { channel, .. } = normalise(vec);
            EnsembleEntry {
                outcome: name.parse().expect("static outcome string"),
                prob,
                channel,
                placeholder,
            }
        })
        .collect();
    OutcomeEnsemble { order: 2, entries }
}

/// Probability that a superswitch run lands on an outcome whose conditional
/// channel is exactly the identity or a single Pauli unitary. A unitary
/// outcome counts as distilled because the heralded gate can be undone,
/// leaving a perfect channel.
pub fn distillation_rate<S: Scalar>(ens: &OutcomeEnsemble<S>) -> S {
    let mut rate = S::zero();
    for e in &ens.entries {
        if !e.placeholder && e.channel.exact_basis_index().is_some() {
            rate = rate + e.prob.clone();
        }
    }
    rate
}

/// JSON form of an ensemble: outcome record, probability, and channel
/// weights, each scalar rendered in the active mode's text form.
pub fn ensemble_to_json<S: Scalar>(ens: &OutcomeEnsemble<S>) -> Value {
    json!({
        "order": ens.order,
        "entries": ens.entries.iter().map(|e| json!({
            "outcome": e.outcome.to_string(),
            "prob": e.prob.render(),
            "channel": e.channel.components().iter().map(Scalar::render).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}
