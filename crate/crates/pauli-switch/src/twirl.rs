//! Group-averaging (twirling) support: extract the depolarising parameter
//! an arbitrary qubit channel acquires under a unitary-design average,
//! feed it to the cascade recurrences, and account for the resources a
//! design-based protocol consumes.
//!
//! Twirling matters because the cascade engines act on Pauli channels;
//! averaging over a unitary 2-design projects any CPTP qubit channel onto
//! the depolarising family, whose parameter is computable directly from
//! the traces of the channel's Kraus operators — no dense average needed.
//! The dense 24-Clifford average in [`crate::kraus`] stays available as
//! the independent oracle for that shortcut.

use num_bigint::BigUint;

use crate::channel::PauliVec4;
use crate::kraus::Mat2;
use crate::recurrence::rate_at_order;
use crate::scalar::Scalar;
use crate::Error;

fn completeness_check(ops: &[Mat2]) -> Result<(), Error> {
    let mut comp = Mat2::zero();
    for k in ops {
        comp = comp.add(&k.dagger().mul(k));
    }
    let resid = comp.sub(&Mat2::id()).frobenius_norm();
    if resid > 1e-9 {
        return Err(Error::NotCptp(resid));
    }
    Ok(())
}

/// Depolarising parameter of the twirled channel, from Kraus traces:
/// `eta = (4 - sum_i |tr K_i|^2) / 3`.
///
/// `eta = 0` for the identity channel, `1` for a maximally depolarising
/// channel, up to `4/3` at the anti-aligning extreme. The squared modulus
/// of the trace is the convention under which the identity maps to zero;
/// see [`depolarising_parameter_square_trace`] for the alternative reading
/// that fails that sanity check. Agreement with the dense group-average
/// oracle ([`crate::kraus::clifford_twirl`]) is part of this module's
/// tests.
///
/// Errors: [`Error::NotCptp`] when the Kraus set is not trace preserving
/// within 1e-9.
pub fn depolarising_parameter(ops: &[Mat2]) -> Result<f64, Error> {
    completeness_check(ops)?;
    let trace_weight: f64 = ops.iter().map(|k| k.trace().norm_sqr()).sum();
    Ok((4.0 - trace_weight) / 3.0)
}

/// Alternative trace convention: `eta = 1 - (sum_i |tr(K_i^2)| - 1) / 3`,
/// reading the formula as the modulus of the trace of the squared
/// operator.
///
/// Under this reading the identity channel comes out at `2/3` instead of
/// `0`, so it cannot be the operating convention; it is kept callable so
/// verification reports can show the two variants side by side.
pub fn depolarising_parameter_square_trace(ops: &[Mat2]) -> Result<f64, Error> {
    completeness_check(ops)?;
    let trace_weight: f64 = ops.iter().map(|k| k.mul(k).trace().norm()).sum();
    Ok(1.0 - (trace_weight - 1.0) / 3.0)
}

/// Distillation rate of the twirled channel at cascade order `n`: the
/// depolarising channel with parameter `eta` pushed through the bucket
/// recurrences.
///
/// Errors: whatever [`PauliVec4::depolarising`] or
/// [`rate_at_order`] reject (parameter out of `[0, 4/3]`, negative order).
pub fn twirled_rate<S: Scalar>(eta: S, n: i64) -> Result<S, Error> {
    let ch = PauliVec4::depolarising(eta)?;
    rate_at_order(&ch, n)
}

/// The two order-2 quartic rate coefficients in circulation for a twirled
/// channel, as `(composed, inflated)`: `3 eta^4 / 64`, which equals
/// [`twirled_rate`] at order 2 for channels with an identity component,
/// and a sixteen-fold larger `3 eta^4 / 4` whose normalisation matches no
/// engine in this crate. Both are returned so reports can print them side
/// by side.
pub fn order_two_rate_variants<S: Scalar>(eta: &S) -> (S, S) {
    let e2 = eta.clone() * eta.clone();
    let e4 = e2.clone() * e2;
    (S::ratio(3, 64) * e4.clone(), S::ratio(3, 4) * e4)
}

/// Exact resource ledger for running an order-`n` cascade on a channel
/// twirled with an `N`-element unitary design.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResourceCost {
    pub order: u32,
    pub design_size: u64,
    /// Input states consumed: `N^(2^n)`.
    pub state_copies: BigUint,
    /// Channel uses consumed: `2^n * N^(2^n)` — each cascade run burns
    /// `2^n` channel copies, and one run happens per state copy.
    pub channel_copies: BigUint,
    /// Independent cascade executions: `N^(2^n)`.
    pub superswitch_count: BigUint,
}

/// Compute the ledger. Each of the `2^n` channel slots in the cascade
/// needs its own independently-sampled design rotation, so de-randomising
/// the average takes `N^(2^n)` parallel runs.
///
/// Requires `n >= 1`, `1 <= N`, and `n < 32` (the exponent `2^n` must fit
/// a machine word; the counts themselves are arbitrary precision).
pub fn resource_cost(n: u32, design_size: u64) -> ResourceCost {
    assert!(n >= 1, "cascade order must be at least 1");
    assert!(n < 32, "exponent 2^n must fit a machine word");
    assert!(design_size >= 1, "a design has at least one element");
    let slots = 1u32 << n;
    let runs = BigUint::from(design_size).pow(slots);
    ResourceCost {
        order: n,
        design_size,
        state_copies: runs.clone(),
        channel_copies: BigUint::from(slots) * &runs,
        superswitch_count: runs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kraus::{clifford_twirl, pauli_kraus, random_cptp_kraus};
    use crate::sample;
    use crate::scalar::Exact;
    use crate::Scalar;
    use num_traits::Zero;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(num: i64, den: i64) -> Exact {
        Exact::ratio(num, den)
    }

    fn amplitude_damping(gamma: f64) -> Vec<Mat2> {
        use crate::kraus::C64;
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let keep = C64::new((1.0 - gamma).sqrt(), 0.0);
        let decay = C64::new(gamma.sqrt(), 0.0);
        vec![Mat2([one, z, z, keep]), Mat2([z, decay, z, z])]
    }

    #[test]
    fn identity_channel_has_zero_parameter() {
        let eta = depolarising_parameter(&[Mat2::id()]).unwrap();
        assert!(eta.abs() < 1e-15);
        // The square-trace reading puts the identity at 2/3 — the reason
        // it is not the operating convention.
        let alt = depolarising_parameter_square_trace(&[Mat2::id()]).unwrap();
        assert!((alt - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_channels_reduce_to_the_identity_weight_formula() {
        // For a Pauli channel only the identity Kraus operator has a
        // trace, so eta = (4 - 4 p0) / 3.
        let ch = PauliVec4::make_channel([0.7, 0.1, 0.1, 0.1]).unwrap();
        let eta = depolarising_parameter(&pauli_kraus(&ch)).unwrap();
        assert!((eta - 0.4).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let chan = sample::rational_channel(&mut rng, 32);
            let chan_f = chan.to_f64();
            let eta = depolarising_parameter(&pauli_kraus(&chan_f)).unwrap();
            let expected = (4.0 - 4.0 * chan_f.p(0)) / 3.0;
            assert!((eta - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn depolarising_kraus_sets_recover_their_parameter() {
        for p in [0.0, 0.3, 1.0, 1.25] {
            let ch = PauliVec4::depolarising(p).unwrap();
            let eta = depolarising_parameter(&pauli_kraus(&ch)).unwrap();
            assert!((eta - p).abs() < 1e-12, "p = {p}: eta = {eta}");
        }
    }

    #[test]
    fn trace_formula_matches_the_dense_group_average() {
        // Amplitude damping at gamma = 1/2: eta = (5/2 - sqrt(2)) / 3.
        let ad = amplitude_damping(0.5);
        let eta = depolarising_parameter(&ad).unwrap();
        assert!((eta - (2.5 - std::f64::consts::SQRT_2) / 3.0).abs() < 1e-12);
        assert!((eta - 0.361_928_81).abs() < 1e-8);
        assert!((eta - clifford_twirl(&ad).unwrap()).abs() < 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n_ops in 1..=4 {
            for _ in 0..5 {
                let ops = random_cptp_kraus(&mut rng, n_ops);
                let fast = depolarising_parameter(&ops).unwrap();
                let dense = clifford_twirl(&ops).unwrap();
                assert!(
                    (fast - dense).abs() < 1e-10,
                    "trace formula {fast} vs group average {dense}"
                );
                assert!((0.0..=4.0 / 3.0 + 1e-12).contains(&fast));
            }
        }
    }

    #[test]
    fn non_trace_preserving_sets_are_rejected() {
        let squashed = [Mat2::id().scale(crate::kraus::C64::new(0.9, 0.0))];
        assert!(matches!(
            depolarising_parameter(&squashed),
            Err(Error::NotCptp(_))
        ));
        assert!(matches!(
            depolarising_parameter_square_trace(&squashed),
            Err(Error::NotCptp(_))
        ));
    }

    #[test]
    fn twirled_rate_feeds_the_recurrence() {
        assert_eq!(twirled_rate(Exact::ratio(1, 1), 2).unwrap(), r(3, 64));
        assert_eq!(twirled_rate(r(4, 3), 2).unwrap(), r(7, 27));
        for n in 0..=5 {
            assert!(twirled_rate(Exact::zero(), n).unwrap().is_zero());
        }
        // Identical to dispatching the depolarising channel directly.
        for k in [1, 10, 24, 32] {
            let eta = r(k, 24);
            let direct =
                rate_at_order(&PauliVec4::depolarising(eta.clone()).unwrap(), 3).unwrap();
            assert_eq!(twirled_rate(eta, 3).unwrap(), direct);
        }
    }

    #[test]
    fn order_two_variants_differ_by_sixteen() {
        let (composed, inflated) = order_two_rate_variants(&r(1, 2));
        assert_eq!(composed, r(3, 1024));
        assert_eq!(inflated, Exact::from_int(16) * composed.clone());
        assert_eq!(composed, twirled_rate(r(1, 2), 2).unwrap());
    }

    #[test]
    fn resource_ledger_examples() {
        let c = resource_cost(1, 10);
        assert_eq!(c.state_copies, BigUint::from(100u32));
        assert_eq!(c.channel_copies, BigUint::from(200u32));
        assert_eq!(c.superswitch_count, BigUint::from(100u32));

        let c = resource_cost(1, 3);
        assert_eq!(c.state_copies, BigUint::from(9u32));
        assert_eq!(c.channel_copies, BigUint::from(18u32));
        assert_eq!(c.superswitch_count, BigUint::from(9u32));

        let c = resource_cost(2, 3);
        assert_eq!(c.state_copies, BigUint::from(81u32));
        assert_eq!(c.channel_copies, BigUint::from(324u32));
        assert_eq!(c.superswitch_count, BigUint::from(81u32));

        for n in 1..=6u32 {
            for design_size in [1u64, 2, 10] {
                let c = resource_cost(n, design_size);
                assert_eq!(
                    c.channel_copies,
                    BigUint::from(1u32 << n) * &c.state_copies
                );
                assert_eq!(c.superswitch_count, c.state_copies);
            }
        }
    }
}
