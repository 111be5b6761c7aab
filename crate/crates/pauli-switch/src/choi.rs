//! The channel–state correspondence for Pauli channels: their
//! maximally-entangled-state images are Bell-diagonal two-qubit states,
//! with the channel weights reappearing verbatim as Bell weights. That
//! makes separability a one-line test and lets the switch be checked at
//! the state level against the channel-level pairing algebra.

use serde::{Deserialize, Serialize};

use crate::channel::PauliVec4;
use crate::scalar::{sum4, Scalar};
use crate::switch::{pair_minus_unnorm, pair_plus_unnorm};
use crate::Error;

/// A Bell-diagonal two-qubit state. Weight order is frozen as
/// `(Phi+, Psi+, Psi-, Phi-)` — the order in which conjugating one half of
/// `Phi+` by 1, X, Y, Z produces the Bell basis — and the JSON form
/// records the labels explicitly so a silent permutation cannot slip
/// through serialisation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellDiagonal<S: Scalar> {
    pub weights: [S; 4],
}

/// Labels matching the frozen weight order.
pub const BELL_LABELS: [&str; 4] = ["phi_plus", "psi_plus", "psi_minus", "phi_minus"];

impl<S: Scalar> BellDiagonal<S> {
    /// Validate raw weights (nonnegative, sum one — exact in rational
    /// mode, within 1e-12 in float mode).
    pub fn new(weights: [S; 4]) -> Result<Self, Error> {
        // Bell weights obey the same simplex constraints as channel
        // weights, so reuse that validation.
        let ch = PauliVec4::make_channel(weights)?;
        Ok(Self {
            weights: ch.components().clone(),
        })
    }

    pub fn weight(&self, i: usize) -> &S {
        &self.weights[i]
    }

    /// Largest Bell weight, as `(index, value)`.
    pub fn max_weight(&self) -> (usize, S) {
        let mut idx = 0;
        for i in 1..4 {
            if self.weights[i] > self.weights[idx] {
                idx = i;
            }
        }
        (idx, self.weights[idx].clone())
    }
}

/// Image of a Pauli channel under the channel–state correspondence:
/// feeding one half of `Phi+` through the channel yields the
/// Bell-diagonal state whose weights are exactly the channel's weights,
/// in the frozen Bell order.
pub fn channel_to_bell<S: Scalar>(ch: &PauliVec4<S>) -> BellDiagonal<S> {
    BellDiagonal {
        weights: ch.components().clone(),
    }
}

/// Separability of a Bell-diagonal state: separable iff the largest Bell
/// weight is at most 1/2. (For two qubits this is the positive-partial-
/// transpose condition specialised to the Bell-diagonal family; the dense
/// eigenvalue test backs it in this module's tests.)
pub fn is_separable<S: Scalar>(bd: &BellDiagonal<S>) -> bool {
    let half = S::ratio(1, 2);
    bd.max_weight().1 <= half
}

/// One branch of the state-level switch: outcome probability and the
/// conditional two-qubit state of the target pair.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSwitchBranch<S: Scalar> {
    pub prob: S,
    /// Conditional Bell-diagonal state; pure `Phi+` as a placeholder when
    /// `prob` is zero.
    pub state: BellDiagonal<S>,
    pub placeholder: bool,
}

/// Run the switch at the state level: both channel copies act on one half
/// of `Phi+`, the control is measured in the coherent basis, and each
/// outcome leaves the target pair in a Bell-diagonal state. Returns the
/// `('+', '-')` branches.
///
/// The branch weights are written out directly from the interference
/// terms — `'+'` collects the squares `sum p_i^2` on `Phi+` plus the
/// identity cross terms `2 p0 p_i`, `'-'` collects the anti-commuting
/// cross terms `2 p_j p_k` — so this function is an independent
/// transcription, cross-checked in tests against the channel-level switch
/// composed with [`channel_to_bell`].
pub fn state_level_switch<S: Scalar>(
    ch: &PauliVec4<S>,
) -> (StateSwitchBranch<S>, StateSwitchBranch<S>) {
    let p = ch.components();
    let squares = p[0].clone() * p[0].clone()
        + p[1].clone() * p[1].clone()
        + p[2].clone() * p[2].clone()
        + p[3].clone() * p[3].clone();
    let two = S::from_int(2);
    let plus_raw: [S; 4] = [
        squares,
        two.clone() * p[0].clone() * p[1].clone(),
        two.clone() * p[0].clone() * p[2].clone(),
        two.clone() * p[0].clone() * p[3].clone(),
    ];
    let minus_raw: [S; 4] = [
        S::zero(),
        two.clone() * p[2].clone() * p[3].clone(),
        two.clone() * p[3].clone() * p[1].clone(),
        two * p[1].clone() * p[2].clone(),
    ];
    (branch_from_raw(plus_raw), branch_from_raw(minus_raw))
}

fn branch_from_raw<S: Scalar>(raw: [S; 4]) -> StateSwitchBranch<S> {
    let prob = sum4(&raw);
    if prob.is_zero() {
        return StateSwitchBranch {
            prob,
            state: BellDiagonal {
                weights: [S::one(), S::zero(), S::zero(), S::zero()],
            },
            placeholder: true,
        };
    }
    let weights = [
        raw[0].clone() / prob.clone(),
        raw[1].clone() / prob.clone(),
        raw[2].clone() / prob.clone(),
        raw[3].clone() / prob.clone(),
    ];
    StateSwitchBranch {
        prob,
        state: BellDiagonal { weights },
        placeholder: false,
    }
}

/// The same branches computed through the pairing algebra instead of the
/// written-out interference terms; exported for the CLI's consistency
/// report.
pub fn state_level_switch_via_pairings<S: Scalar>(
    ch: &PauliVec4<S>,
) -> (StateSwitchBranch<S>, StateSwitchBranch<S>) {
    let p = ch.components();
    (
        branch_from_raw(pair_plus_unnorm(p, p)),
        branch_from_raw(pair_minus_unnorm(p, p)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::classify;
    use crate::kraus::{choi_of_kraus, pauli_kraus, C64};
    use crate::sample;
    use crate::scalar::Exact;
    use crate::switch::quantum_switch;
    use nalgebra::Matrix4;
    use num_traits::{One, Zero};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ch(text: &str) -> PauliVec4<Exact> {
        PauliVec4::parse(text).unwrap()
    }

    fn r(num: i64, den: i64) -> Exact {
        Exact::ratio(num, den)
    }

    /// Dense 4x4 density matrix of a Bell-diagonal state in the product
    /// basis |ab> with index 2a + b.
    fn dense(bd: &BellDiagonal<f64>) -> Matrix4<f64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // Rows: Phi+, Psi+, Psi-, Phi- over (|00>, |01>, |10>, |11>).
        let bell = [
            [s, 0.0, 0.0, s],
            [0.0, s, s, 0.0],
            [0.0, s, -s, 0.0],
            [s, 0.0, 0.0, -s],
        ];
        let mut rho = Matrix4::zeros();
        for (k, vec) in bell.iter().enumerate() {
            for i in 0..4 {
                for j in 0..4 {
                    rho[(i, j)] += bd.weights[k] * vec[i] * vec[j];
                }
            }
        }
        rho
    }

    /// Positive-partial-transpose check on the dense matrix: transpose the
    /// second qubit's indices and test the smallest eigenvalue. For two
    /// qubits this decides separability exactly.
    fn ppt_separable(bd: &BellDiagonal<f64>) -> bool {
        let rho = dense(bd);
        let mut pt = Matrix4::zeros();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        // (a,b),(c,d) -> (a,d),(c,b)
                        pt[(2 * a + d, 2 * c + b)] = rho[(2 * a + b, 2 * c + d)];
                    }
                }
            }
        }
        let eig = nalgebra::SymmetricEigen::new(pt);
        eig.eigenvalues.iter().all(|&l| l > -1e-12)
    }

    #[test]
    fn identity_maps_to_pure_phi_plus() {
        let bd = channel_to_bell(&PauliVec4::<Exact>::identity());
        assert_eq!(
            bd.weights,
            [Exact::one(), Exact::zero(), Exact::zero(), Exact::zero()]
        );
        assert!(!is_separable(&bd));
    }

    #[test]
    fn depolarising_maps_to_the_isotropic_mixture() {
        let bd = channel_to_bell(&PauliVec4::depolarising(r(1, 2)).unwrap());
        assert_eq!(bd.weights, [r(5, 8), r(1, 8), r(1, 8), r(1, 8)]);
        // (1-p) on Phi+ plus p/4 spread over all four.
        assert_eq!(bd.weights[0], r(1, 2) + r(1, 8));
    }

    #[test]
    fn bell_weights_match_the_dense_choi_diagonal() {
        // The frozen ordering is the one the dense Choi matrix produces:
        // sandwich the Choi of a channel between Bell vectors and compare.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = [
            [s, 0.0, 0.0, s],
            [0.0, s, s, 0.0],
            [0.0, s, -s, 0.0],
            [s, 0.0, 0.0, -s],
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut cases = vec![ch("0, 1/2, 1/2, 0"), ch("1/4, 1/4, 1/4, 1/4")];
        for _ in 0..10 {
            cases.push(sample::rational_channel(&mut rng, 20));
        }
        for chan in cases {
            let j = choi_of_kraus(&pauli_kraus(&chan.to_f64()));
            let bd = channel_to_bell(&chan);
            for (k, vec) in bell.iter().enumerate() {
                let mut w = C64::new(0.0, 0.0);
                for u in 0..4 {
                    for v in 0..4 {
                        w += C64::new(vec[u], 0.0) * j[u][v] * C64::new(vec[v], 0.0);
                    }
                }
                assert!(w.im.abs() < 1e-12);
                assert!(
                    (w.re - bd.weights[k].to_f64()).abs() < 1e-12,
                    "weight {k} mismatch for {chan:?}"
                );
            }
        }
    }

    #[test]
    fn separability_examples_and_dense_ppt_agree() {
        assert!(is_separable(&BellDiagonal::new([
            r(1, 4),
            r(1, 4),
            r(1, 4),
            r(1, 4)
        ])
        .unwrap()));

        let lopsided = BellDiagonal::new([r(11, 20), r(9, 20), Exact::zero(), Exact::zero()])
            .unwrap();
        assert!(!is_separable(&lopsided));
        let lopsided_f = BellDiagonal {
            weights: [0.55, 0.45, 0.0, 0.0],
        };
        assert!(!ppt_separable(&lopsided_f));

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let weights = sample::rational_channel(&mut rng, 40);
            let exact_bd = channel_to_bell(&weights);
            let float_bd = BellDiagonal {
                weights: *weights.to_f64().components(),
            };
            assert_eq!(
                is_separable(&exact_bd),
                ppt_separable(&float_bd),
                "half-weight rule vs dense PPT on {weights:?}"
            );
        }
    }

    #[test]
    fn separability_equals_entanglement_breaking() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let chan = sample::rational_channel(&mut rng, 24);
            assert_eq!(
                is_separable(&channel_to_bell(&chan)),
                classify(&chan).entanglement_breaking
            );
        }
    }

    #[test]
    fn state_level_switch_written_examples() {
        // Equal X/Y mixture: the '-' outcome leaves the pair in pure Phi-
        // with probability 1/2.
        let (plus, minus) = state_level_switch(&ch("0, 1/2, 1/2, 0"));
        assert_eq!(minus.prob, r(1, 2));
        assert_eq!(
            minus.state.weights,
            [Exact::zero(), Exact::zero(), Exact::zero(), Exact::one()]
        );
        assert_eq!(plus.prob, r(1, 2));
        assert_eq!(
            plus.state.weights,
            [Exact::one(), Exact::zero(), Exact::zero(), Exact::zero()]
        );

        // Identity channel: '+' fires with certainty, leaving Phi+.
        let (plus, minus) = state_level_switch(&PauliVec4::<Exact>::identity());
        assert_eq!(plus.prob, Exact::one());
        assert!(!plus.placeholder);
        assert_eq!(
            plus.state.weights,
            [Exact::one(), Exact::zero(), Exact::zero(), Exact::zero()]
        );
        assert!(minus.prob.is_zero());
        assert!(minus.placeholder);
    }

    #[test]
    fn state_level_and_channel_level_switches_agree_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..100 {
            let chan = sample::rational_channel(&mut rng, 30);
            let (plus, minus) = state_level_switch(&chan);
            let (plus2, minus2) = state_level_switch_via_pairings(&chan);
            assert_eq!(plus, plus2);
            assert_eq!(minus, minus2);

            let ens = quantum_switch(&chan);
            for (branch, outcome) in [(&plus, "+"), (&minus, "-")] {
                let entry = ens.get(outcome).unwrap();
                assert_eq!(branch.prob, entry.prob);
                assert_eq!(branch.placeholder, entry.placeholder);
                if !entry.placeholder {
                    assert_eq!(
                        branch.state.weights,
                        channel_to_bell(&entry.channel).weights
                    );
                }
            }
        }
    }

    #[test]
    fn bell_weight_validation_rejects_bad_input() {
        assert!(matches!(
            BellDiagonal::new([r(1, 2), r(1, 2), r(1, 2), r(-1, 2)]),
            Err(Error::NegativeWeight)
        ));
        assert!(matches!(
            BellDiagonal::new([r(1, 2), r(1, 2), r(1, 2), Exact::zero()]),
            Err(Error::NotNormalised)
        ));
    }
}
