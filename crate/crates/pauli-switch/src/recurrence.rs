//! Bucketed recurrences that propagate switch-cascade outcome ensembles to
//! arbitrary order without enumerating the doubling outcome tree.
//!
//! At order `n` a nested switch cascade produces `2^(2^n - 1)` outcome
//! branches, but the branch channels only ever occupy a handful of
//! zero-pattern families. Because both switch pairings are bilinear, the
//! total weight-vector mass of each family evolves under a closed quadratic
//! map: summing pairings over a family equals pairing the family's summed
//! (unnormalised) weight vector with itself. Each state type below stores
//! those family aggregates; one `step` squares the ensemble, i.e. moves
//! from order `n` to order `n + 1`.
//!
//! Three recurrences cover the tetrahedron of Pauli channels:
//! - [`InteriorBucketState`]: full-support channels. Buckets: identity mass
//!   `a`, zero-identity mass `b` (channels with no identity weight), and
//!   generic mass `c`.
//! - [`FaceBucketState`]: channels with exactly one noise weight zero.
//!   The '−' pairing of two on-face vectors is a pure Pauli unitary along
//!   the missing axis, so a dedicated unitary bucket `bu` appears, plus the
//!   on-face zero-identity bucket `d`.
//! - [`BaseBucketState`]: channels with zero identity weight, where the '+'
//!   pairing collapses to pure identity and only two buckets survive.
//!
//! All three conserve total mass exactly in rational mode; float-mode
//! drivers renormalise each step because the squaring dynamics double any
//! accumulated mass error per iteration.

use crate::channel::{classify, conjugate_by_pauli, PauliVec4, Region};
use crate::scalar::{sum4, Scalar};
use crate::switch::{pair_minus_unnorm, pair_plus_unnorm};
use crate::Error;

/// How the interior recurrence treats the zero-identity bucket's
/// self-pairing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StepMode {
    /// Route every pairing of exact bucket vectors. Lossless at every
    /// order; the engine used by [`rate_at_order`].
    #[default]
    ExactBilinear,
    /// Replace the zero-identity bucket's self-pairing by its closed form
    /// at the bucket's attracting direction `(0, 1/3, 1/3, 1/3)`: the
    /// identity mass gains `(sum b)^2 / 3` and each noise component gains
    /// `2 (sum b)^2 / 9`. Exact whenever the bucket direction is uniform
    /// (depolarising inputs keep it uniform at every order), asymptotically
    /// correct otherwise.
    UniformClosure,
}

fn lift3<S: Scalar>(v: &[S; 3]) -> [S; 4] {
    [S::zero(), v[0].clone(), v[1].clone(), v[2].clone()]
}

fn drop0<S: Scalar>(v: &[S; 4]) -> [S; 3] {
    debug_assert!(v[0].is_zero());
    [v[1].clone(), v[2].clone(), v[3].clone()]
}

fn scale4<S: Scalar>(v: &[S; 4], k: &S) -> [S; 4] {
    [
        v[0].clone() * k.clone(),
        v[1].clone() * k.clone(),
        v[2].clone() * k.clone(),
        v[3].clone() * k.clone(),
    ]
}

fn add4<S: Scalar>(a: &[S; 4], b: &[S; 4]) -> [S; 4] {
    [
        a[0].clone() + b[0].clone(),
        a[1].clone() + b[1].clone(),
        a[2].clone() + b[2].clone(),
        a[3].clone() + b[3].clone(),
    ]
}

fn sum3<S: Scalar>(v: &[S; 3]) -> S {
    v[0].clone() + v[1].clone() + v[2].clone()
}

/// Bucket aggregate of a cascade ensemble for a full-support channel.
///
/// `a` is the identity mass, `b` the summed weight vectors of
/// zero-identity branch channels (noise components only; the identity
/// component is structurally zero), `c` the summed weight vectors of all
/// remaining branches. Buckets are unnormalised: the branch probability is
/// already folded into the vector, so `a + sum(b) + sum(c) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct InteriorBucketState<S: Scalar> {
    pub a: S,
    pub b: [S; 3],
    pub c: [S; 4],
    pub order: u32,
}

impl<S: Scalar> InteriorBucketState<S> {
    /// Order-zero state: the bare channel sits in the generic bucket.
    pub fn new(ch: &PauliVec4<S>) -> Self {
        Self {
            a: S::zero(),
            b: [S::zero(), S::zero(), S::zero()],
            c: ch.components().clone(),
            order: 0,
        }
    }

    /// Total mass across all buckets; exactly one for a valid state in
    /// rational mode.
    pub fn total_mass(&self) -> S {
        self.a.clone() + sum3(&self.b) + sum4(&self.c)
    }

    /// Distillation rate read-out: the identity mass.
    pub fn rate(&self) -> S {
        self.a.clone()
    }

    /// State with every bucket divided by the total mass. Mathematically a
    /// no-op (steps conserve mass); float-mode iteration applies it each
    /// step because squaring doubles any accumulated mass error.
    pub fn normalised(&self) -> Self {
        let t = self.total_mass();
        if t.is_zero() {
            return self.clone();
        }
        Self {
            a: self.a.clone() / t.clone(),
            b: [
                self.b[0].clone() / t.clone(),
                self.b[1].clone() / t.clone(),
                self.b[2].clone() / t.clone(),
            ],
            c: [
                self.c[0].clone() / t.clone(),
                self.c[1].clone() / t.clone(),
                self.c[2].clone() / t.clone(),
                self.c[3].clone() / t,
            ],
            order: self.order,
        }
    }
}

/// One squaring step of the interior recurrence: combine the order-`n`
/// ensemble with itself through both switch pairings and re-bucket.
///
/// Routing is structural, by bucket: pairings with the identity bucket
/// keep their partner's bucket; every '−' output has zero identity
/// component and lands in `b`; the zero-identity bucket's self-'+' is pure
/// identity and lands in `a`; all other '+' outputs land in `c`. Keeping
/// identity-valued `c`-mass inside `c` (rather than inspecting values) is
/// what makes the identity channel itself a fixed point with `a = 0`.
pub fn interior_step<S: Scalar>(st: &InteriorBucketState<S>, mode: StepMode) -> InteriorBucketState<S> {
    let two = S::from_int(2);
    let b4 = lift3(&st.b);

    // b x b: '+' is pure identity (both inputs have zero identity part),
    // '−' stays zero-identity.
    let (bb_to_a, bb_to_b) = match mode {
        StepMode::ExactBilinear => {
            let plus = pair_plus_unnorm(&b4, &b4);
            debug_assert!(plus[1].is_zero() && plus[2].is_zero() && plus[3].is_zero());
            (plus[0].clone(), pair_minus_unnorm(&b4, &b4))
        }
        StepMode::UniformClosure => {
            let beta = sum3(&st.b);
            let beta2 = beta.clone() * beta;
            let third = S::ratio(1, 3);
            let two_ninths = S::ratio(2, 9);
            (
                beta2.clone() * third,
                [
                    S::zero(),
                    beta2.clone() * two_ninths.clone(),
                    beta2.clone() * two_ninths.clone(),
                    beta2 * two_ninths,
                ],
            )
        }
    };

    // Identity mass: a x a plus the zero-identity self-'+'.
    let a_next = st.a.clone() * st.a.clone() + bb_to_a;

    // Zero-identity bucket: pairing with the identity keeps the vector
    // ('+' branch contributes, '−' vanishes); every other '−' output
    // belongs here too.
    let minus_bc = pair_minus_unnorm(&b4, &st.c);
    let minus_cc = pair_minus_unnorm(&st.c, &st.c);
    let mut b_next4 = scale4(&b4, &(two.clone() * st.a.clone()));
    b_next4 = add4(&b_next4, &bb_to_b);
    b_next4 = add4(&b_next4, &scale4(&minus_bc, &two));
    b_next4 = add4(&b_next4, &minus_cc);

    // Generic bucket: identity-pairing keeps it, plus the remaining '+'
    // outputs (c x c and the b x c cross term).
    let plus_cc = pair_plus_unnorm(&st.c, &st.c);
    let plus_bc = pair_plus_unnorm(&b4, &st.c);
    let mut c_next = scale4(&st.c, &(two.clone() * st.a.clone()));
    c_next = add4(&c_next, &plus_cc);
    c_next = add4(&c_next, &scale4(&plus_bc, &two));

    InteriorBucketState {
        a: a_next,
        b: drop0(&b_next4),
        c: c_next,
        order: st.order + 1,
    }
}

/// Bucket aggregate for a channel on one side face of the tetrahedron
/// (exactly one noise weight zero, identity weight present) or on the
/// opposite edge (support on the face's two noise axes only).
///
/// `face_axis` names the missing noise weight (1–3). `a` is identity mass,
/// `bu` the mass of the pure Pauli unitary along `face_axis` — reachable
/// because the '−' pairing of two on-face vectors is exactly that unitary —
/// `c` the on-face generic bucket (component `face_axis` stays zero), and
/// `d` the on-face zero-identity bucket (components 0 and `face_axis` stay
/// zero; stored over the three noise axes).
#[derive(Clone, Debug, PartialEq)]
pub struct FaceBucketState<S: Scalar> {
    pub face_axis: u8,
    pub a: S,
    pub bu: S,
    pub c: [S; 4],
    pub d: [S; 3],
    pub order: u32,
}

impl<S: Scalar> FaceBucketState<S> {
    /// Order-zero state for a face channel (enters the generic bucket) or
    /// an opposite-edge channel (enters the zero-identity bucket).
    /// Any other region is [`Error::ShapeMismatch`].
    pub fn new(ch: &PauliVec4<S>) -> Result<Self, Error> {
        let zero3 = [S::zero(), S::zero(), S::zero()];
        let zero4 = [S::zero(), S::zero(), S::zero(), S::zero()];
        match classify(ch).region {
            Region::Face(w) => Ok(Self {
                face_axis: w,
                a: S::zero(),
                bu: S::zero(),
                c: ch.components().clone(),
                d: zero3,
                order: 0,
            }),
            Region::Edge(u, v) => {
                let w = 6 - u - v;
                Ok(Self {
                    face_axis: w,
                    a: S::zero(),
                    bu: S::zero(),
                    c: zero4,
                    d: drop0(&[
                        S::zero(),
                        ch.p(1).clone(),
                        ch.p(2).clone(),
                        ch.p(3).clone(),
                    ]),
                    order: 0,
                })
            }
            _ => Err(Error::ShapeMismatch),
        }
    }

    fn validate(&self) -> Result<(), Error> {
        let w = self.face_axis as usize;
        if !(1..=3).contains(&w) {
            return Err(Error::ShapeMismatch);
        }
        if !self.c[w].is_zero() || !self.d[w - 1].is_zero() {
            return Err(Error::ShapeMismatch);
        }
        Ok(())
    }

    pub fn total_mass(&self) -> S {
        self.a.clone() + self.bu.clone() + sum4(&self.c) + sum3(&self.d)
    }

    /// Distillation rate read-out: identity mass plus the heralded-unitary
    /// mass (the unitary outcome can be undone after the fact).
    pub fn rate(&self) -> S {
        self.a.clone() + self.bu.clone()
    }

    pub fn normalised(&self) -> Self {
        let t = self.total_mass();
        if t.is_zero() {
            return self.clone();
        }
        let div4 = |v: &[S; 4]| {
            [
                v[0].clone() / t.clone(),
                v[1].clone() / t.clone(),
                v[2].clone() / t.clone(),
                v[3].clone() / t.clone(),
            ]
        };
        Self {
            face_axis: self.face_axis,
            a: self.a.clone() / t.clone(),
            bu: self.bu.clone() / t.clone(),
            c: div4(&self.c),
            d: [
                self.d[0].clone() / t.clone(),
                self.d[1].clone() / t.clone(),
                self.d[2].clone() / t.clone(),
            ],
            order: self.order,
        }
    }
}

/// One squaring step of the face recurrence.
///
/// All four buckets are pure weight vectors, so the sixteen ordered bucket
/// pairs are pushed through both pairings and each output is routed by its
/// zero pattern: pure identity to `a`, pure `face_axis` unitary to `bu`,
/// zero-identity on-face vectors to `d`, everything else to `c`. On-face
/// inputs can never produce an output carrying both identity and
/// `face_axis` weight, which keeps the routing total.
pub fn face_step<S: Scalar>(st: &FaceBucketState<S>) -> Result<FaceBucketState<S>, Error> {
    st.validate()?;
    let w = st.face_axis as usize;
    let mut a = S::zero();
    let mut bu = S::zero();
    let mut c = [S::zero(), S::zero(), S::zero(), S::zero()];
    let mut d4 = [S::zero(), S::zero(), S::zero(), S::zero()];

    let mut unit_w = [S::zero(), S::zero(), S::zero(), S::zero()];
    unit_w[w] = st.bu.clone();
    let vectors: [[S; 4]; 4] = [
        [st.a.clone(), S::zero(), S::zero(), S::zero()],
        unit_w,
        st.c.clone(),
        lift3(&st.d),
    ];

    {
        let mut route = |v: [S; 4]| {
            let noise_zero = v[1].is_zero() && v[2].is_zero() && v[3].is_zero();
            if noise_zero {
                // Pure identity (or an all-zero vector, which adds nothing).
                a = a.clone() + v[0].clone();
            } else if v[0].is_zero() && (1..4).all(|i| i == w || v[i].is_zero()) {
                bu = bu.clone() + v[w].clone();
            } else if v[0].is_zero() {
                debug_assert!(v[w].is_zero());
                d4 = add4(&d4, &v);
            } else {
                debug_assert!(v[w].is_zero());
                c = add4(&c, &v);
            }
        };
        let two = S::from_int(2);
        for i in 0..4 {
            for j in i..4 {
                let k = if i == j { S::one() } else { two.clone() };
                route(scale4(&pair_plus_unnorm(&vectors[i], &vectors[j]), &k));
                route(scale4(&pair_minus_unnorm(&vectors[i], &vectors[j]), &k));
            }
        }
    }

    Ok(FaceBucketState {
        face_axis: st.face_axis,
        a,
        bu,
        c,
        d: drop0(&d4),
        order: st.order + 1,
    })
}

/// Bucket aggregate for a channel with zero identity weight and full noise
/// support. Only two buckets survive: the '+' pairing of two zero-identity
/// vectors is pure identity (mass to `a`), the '−' pairing keeps the
/// identity component zero (mass stays in `c`).
#[derive(Clone, Debug, PartialEq)]
pub struct BaseBucketState<S: Scalar> {
    pub a: S,
    pub c: [S; 4],
    pub order: u32,
}

impl<S: Scalar> BaseBucketState<S> {
    /// Order-zero state. The channel must have zero identity weight and
    /// all three noise weights nonzero; anything else is
    /// [`Error::ShapeMismatch`].
    pub fn new(ch: &PauliVec4<S>) -> Result<Self, Error> {
        match classify(ch).region {
            Region::BaseFace => Ok(Self {
                a: S::zero(),
                c: ch.components().clone(),
                order: 0,
            }),
            _ => Err(Error::ShapeMismatch),
        }
    }

    pub fn total_mass(&self) -> S {
        self.a.clone() + sum4(&self.c)
    }

    /// Distillation rate read-out: the identity mass.
    pub fn rate(&self) -> S {
        self.a.clone()
    }

    pub fn normalised(&self) -> Self {
        let t = self.total_mass();
        if t.is_zero() {
            return self.clone();
        }
        Self {
            a: self.a.clone() / t.clone(),
            c: [
                self.c[0].clone() / t.clone(),
                self.c[1].clone() / t.clone(),
                self.c[2].clone() / t.clone(),
                self.c[3].clone() / t,
            ],
            order: self.order,
        }
    }
}

/// One squaring step of the zero-identity recurrence.
pub fn base_step<S: Scalar>(st: &BaseBucketState<S>) -> Result<BaseBucketState<S>, Error> {
    if !st.c[0].is_zero() {
        return Err(Error::ShapeMismatch);
    }
    let two = S::from_int(2);
    let plus = pair_plus_unnorm(&st.c, &st.c);
    debug_assert!(plus[1].is_zero() && plus[2].is_zero() && plus[3].is_zero());
    let minus = pair_minus_unnorm(&st.c, &st.c);
    let a_next = st.a.clone() * st.a.clone() + plus[0].clone();
    let c_next = add4(&scale4(&st.c, &(two * st.a.clone())), &minus);
    Ok(BaseBucketState {
        a: a_next,
        c: c_next,
        order: st.order + 1,
    })
}

/// Exact distillation rate of the order-`n` cascade built from `ch`.
///
/// Classifies the channel, selects the recurrence for its tetrahedron
/// region, iterates `n` squaring steps in [`StepMode::ExactBilinear`], and
/// reads the identity mass (plus the heralded-unitary mass on faces).
/// Channels supported on the identity and a single Pauli axis are
/// pre-rotated by a perpendicular Pauli conjugation first, which moves them
/// onto a two-unitary edge where one cascade step distils deterministically;
/// the two channel vertices (identity, single unitary) admit no pre-rotation
/// that helps, and their rate is zero at every order. Float mode
/// renormalises each step.
///
/// Errors: [`Error::OrderNegative`] when `n < 0`.
pub fn rate_at_order<S: Scalar>(ch: &PauliVec4<S>, n: i64) -> Result<S, Error> {
    if n < 0 {
        return Err(Error::OrderNegative);
    }
    match classify(ch).region {
        Region::IdentityVertex | Region::UnitaryVertex(_) => Ok(S::zero()),
        Region::AxisEdge(axis) => {
            let rot = if axis == 1 { 2 } else { 1 };
            rate_at_order(&conjugate_by_pauli(ch, rot), n)
        }
        Region::Edge(_, _) | Region::Face(_) => {
            let mut st = FaceBucketState::new(ch).expect("region checked");
            for _ in 0..n {
                st = face_step(&st)?;
                if !S::EXACT {
                    st = st.normalised();
                }
            }
            Ok(st.rate())
        }
        Region::BaseFace => {
            let mut st = BaseBucketState::new(ch).expect("region checked");
            for _ in 0..n {
                st = base_step(&st)?;
                if !S::EXACT {
                    st = st.normalised();
                }
            }
            Ok(st.rate())
        }
        Region::Interior => {
            let mut st = InteriorBucketState::new(ch);
            for _ in 0..n {
                st = interior_step(&st, StepMode::ExactBilinear);
                if !S::EXACT {
                    st = st.normalised();
                }
            }
            Ok(st.rate())
        }
    }
}

/// Successive-iterate tolerance for asymptotic (float-mode) runs.
pub const CONVERGENCE_TOL: f64 = 1e-12;
/// Iteration cap for asymptotic runs.
pub const MAX_FIXED_POINT_ITERS: u32 = 10_000;

/// Iterate the region-appropriate recurrence in float mode until the
/// normalised state stops moving (max component change below
/// [`CONVERGENCE_TOL`]) or [`MAX_FIXED_POINT_ITERS`] is reached. Returns
/// the limiting rate and the number of steps taken. Vertex channels return
/// `(0.0, 0)` immediately.
pub fn converged_rate(ch: &PauliVec4<f64>, mode: StepMode) -> (f64, u32) {
    fn run<T: Clone>(
        mut state: T,
        step: impl Fn(&T) -> T,
        flatten: impl Fn(&T) -> Vec<f64>,
        rate: impl Fn(&T) -> f64,
    ) -> (f64, u32) {
        let mut iters = 0;
        while iters < MAX_FIXED_POINT_ITERS {
            let next = step(&state);
            iters += 1;
            let prev_flat = flatten(&state);
            let next_flat = flatten(&next);
            let diff = prev_flat
                .iter()
                .zip(&next_flat)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max);
            state = next;
            if diff < CONVERGENCE_TOL {
                break;
            }
        }
        (rate(&state), iters)
    }

    match classify(ch).region {
        Region::IdentityVertex | Region::UnitaryVertex(_) => (0.0, 0),
        Region::AxisEdge(axis) => {
            let rot = if axis == 1 { 2 } else { 1 };
            converged_rate(&conjugate_by_pauli(ch, rot), mode)
        }
        Region::Edge(_, _) | Region::Face(_) => run(
            FaceBucketState::new(ch).expect("region checked"),
            |st| face_step(st).expect("valid face state").normalised(),
            |st| {
                let mut v = vec![st.a, st.bu];
                v.extend_from_slice(&st.c);
                v.extend_from_slice(&st.d);
                v
            },
            FaceBucketState::rate,
        ),
        Region::BaseFace => run(
            BaseBucketState::new(ch).expect("region checked"),
            |st| base_step(st).expect("valid base state").normalised(),
            |st| {
                let mut v = vec![st.a];
                v.extend_from_slice(&st.c);
                v
            },
            BaseBucketState::rate,
        ),
        Region::Interior => run(
            InteriorBucketState::new(ch),
            |st| interior_step(st, mode).normalised(),
            |st| {
                let mut v = vec![st.a];
                v.extend_from_slice(&st.b);
                v.extend_from_slice(&st.c);
                v
            },
            InteriorBucketState::rate,
        ),
    }
}

/// Tetrahedron regions with a closed-form asymptotic fixed point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedPointRegion {
    Interior,
    SideFace,
    BaseFace,
    /// The depolarising family's endpoint channel `(0, 1/3, 1/3, 1/3)`:
    /// the zero-identity recurrence's fixed point expressed in interior
    /// bucket coordinates (generic-bucket mass zero).
    DepolarisingEndpoint,
}

/// Closed-form asymptotic fixed point of a recurrence, with normalised
/// limit directions for the buckets that retain mass.
#[derive(Clone, Debug, PartialEq)]
pub enum FixedPoint {
    Interior {
        /// Identity mass; equals the asymptotic rate `(2 - sqrt(3))/4`.
        alpha: f64,
        /// Zero-identity bucket mass `sqrt(3)/4`.
        beta: f64,
        /// Generic bucket mass `1/2`.
        gamma: f64,
        /// Limit direction of the generic bucket.
        p_limit: [f64; 4],
        /// Limit direction of the zero-identity bucket.
        q_limit: [f64; 4],
    },
    SideFace {
        /// Identity mass `(2 - sqrt(2))/4`.
        alpha: f64,
        /// Heralded-unitary mass `1/4`.
        unitary: f64,
        /// On-face generic bucket mass `1/4`.
        gamma: f64,
        /// On-face zero-identity bucket mass `1/(2 sqrt(2))`.
        delta: f64,
        /// Limit direction of the generic bucket (missing axis 3).
        p_limit: [f64; 4],
        /// Limit direction of the zero-identity bucket (missing axis 3).
        q_limit: [f64; 4],
    },
    BaseFace {
        /// Identity mass; the asymptotic rate `1/4`.
        alpha: f64,
        /// Zero-identity mass `3/4`.
        beta: f64,
        /// Limit direction of the zero-identity bucket (uniform).
        p_limit: [f64; 4],
    },
    DepolarisingEndpoint {
        alpha: f64,
        beta: f64,
        /// Generic-bucket mass: exactly zero on this invariant subspace.
        gamma: f64,
        /// Escape direction of the generic bucket: the dominant
        /// eigenvector of the step linearised at the fixed point, which is
        /// the same direction the interior fixed point selects.
        p_limit: [f64; 4],
        /// Limit direction of the zero-identity bucket (uniform).
        q_limit: [f64; 4],
    },
}

impl FixedPoint {
    /// Asymptotic distillation rate at this fixed point.
    pub fn rate(&self) -> f64 {
        match self {
            FixedPoint::Interior { alpha, .. } => *alpha,
            FixedPoint::SideFace { alpha, unitary, .. } => alpha + unitary,
            FixedPoint::BaseFace { alpha, .. } => *alpha,
            FixedPoint::DepolarisingEndpoint { alpha, .. } => *alpha,
        }
    }
}

/// Hard-coded closed-form fixed points. These are derived analytically;
/// the tests verify them by iterating the recurrences to convergence, not
/// the other way around. Side-face constants are stated for the face with
/// noise axis 3 missing; the other faces are axis relabelings.
pub fn fixed_point(region: FixedPointRegion) -> FixedPoint {
    let s2 = std::f64::consts::SQRT_2;
    let s3 = 3.0f64.sqrt();
    match region {
        FixedPointRegion::Interior => FixedPoint::Interior {
            alpha: (2.0 - s3) / 4.0,
            beta: s3 / 4.0,
            gamma: 0.5,
            p_limit: [
                (s3 - 1.0) / 2.0,
                (3.0 - s3) / 6.0,
                (3.0 - s3) / 6.0,
                (3.0 - s3) / 6.0,
            ],
            q_limit: [0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        },
        FixedPointRegion::SideFace => FixedPoint::SideFace {
            alpha: (2.0 - s2) / 4.0,
            unitary: 0.25,
            gamma: 0.25,
            delta: 1.0 / (2.0 * s2),
            p_limit: [s2 - 1.0, 1.0 - 1.0 / s2, 1.0 - 1.0 / s2, 0.0],
            q_limit: [0.0, 0.5, 0.5, 0.0],
        },
        FixedPointRegion::BaseFace => FixedPoint::BaseFace {
            alpha: 0.25,
            beta: 0.75,
            p_limit: [0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        },
        FixedPointRegion::DepolarisingEndpoint => FixedPoint::DepolarisingEndpoint {
            alpha: 0.25,
            beta: 0.75,
            gamma: 0.0,
            p_limit: [
                (s3 - 1.0) / 2.0,
                (3.0 - s3) / 6.0,
                (3.0 - s3) / 6.0,
                (3.0 - s3) / 6.0,
            ],
            q_limit: [0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        },
    }
}

/// Highest order [`depolarising_rate_curve`] accepts. Each step is O(1) in
/// the order, but rational-mode coefficient sizes square per step, so the
/// cap keeps exact sweeps bounded.
pub const MAX_CURVE_ORDER: i64 = 64;

/// One cell of a rate sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct RateCurvePoint<S: Scalar> {
    pub p: S,
    pub order: u32,
    pub rate: S,
}

/// Distillation-rate table for the depolarising family: one row per
/// `(p, order)` pair, in the given grid-major order.
///
/// Errors: [`Error::OrderNegative`] for a negative order,
/// [`Error::OrderTooLarge`] above [`MAX_CURVE_ORDER`], plus any channel
///-construction error for out-of-range `p`.
pub fn depolarising_rate_curve<S: Scalar>(
    ps: &[S],
    orders: &[i64],
) -> Result<Vec<RateCurvePoint<S>>, Error> {
    validate_orders(orders)?;
    let mut out = Vec::with_capacity(ps.len() * orders.len());
    for p in ps {
        let ch = PauliVec4::depolarising(p.clone())?;
        for &n in orders {
            out.push(RateCurvePoint {
                p: p.clone(),
                order: n as u32,
                rate: rate_at_order(&ch, n)?,
            });
        }
    }
    Ok(out)
}

/// Rate table for an explicit channel list: `(channel index, order, rate)`.
pub fn channel_rate_curve<S: Scalar>(
    channels: &[PauliVec4<S>],
    orders: &[i64],
) -> Result<Vec<(usize, u32, S)>, Error> {
    validate_orders(orders)?;
    let mut out = Vec::with_capacity(channels.len() * orders.len());
    for (idx, ch) in channels.iter().enumerate() {
        for &n in orders {
            out.push((idx, n as u32, rate_at_order(ch, n)?));
        }
    }
    Ok(out)
}

fn validate_orders(orders: &[i64]) -> Result<(), Error> {
    for &n in orders {
        if n < 0 {
            return Err(Error::OrderNegative);
        }
        if n > MAX_CURVE_ORDER {
            return Err(Error::OrderTooLarge {
                got: n,
                max: MAX_CURVE_ORDER,
            });
        }
    }
    Ok(())
}

/// Tabulated closed-form depolarising rate polynomial at `order` (2–5),
/// evaluated at `p`. Returns `None` outside the tabulated orders.
///
/// Orders 2 and 3 are compact; orders 4 and 5 are long coefficient
/// transcriptions, so [`compare_closed_forms`] exists to audit them
/// against the recurrence engine instead of trusting them blindly.
pub fn depolarising_rate_closed_form<S: Scalar>(order: u32, p: &S) -> Option<S> {
    match order {
        2 => {
            // 3 p^4 / 64
            let p2 = p.clone() * p.clone();
            let p4 = p2.clone() * p2;
            Some(S::ratio(3, 64) * p4)
        }
        3 => {
            // (3/64) (p - 2)^4 p^4 + 9 p^8 / 4096
            let p2 = p.clone() * p.clone();
            let p4 = p2.clone() * p2.clone();
            let p8 = p4.clone() * p4.clone();
            let shifted = p.clone() - S::from_int(2);
            let shifted2 = shifted.clone() * shifted;
            let shifted4 = shifted2.clone() * shifted2;
            Some(S::ratio(3, 64) * shifted4 * p4 + S::ratio(9, 4096) * p8)
        }
        4 => Some(eval_poly_from_p4(p, &ORDER4_COEFFS)),
        5 => Some(eval_poly_from_p4(p, &ORDER5_COEFFS)),
        _ => None,
    }
}

/// Coefficients of the tabulated order-4 depolarising rate polynomial for
/// powers p^4 .. p^16, as (numerator, denominator) pairs.
const ORDER4_COEFFS: [(i64, i64); 13] = [
    (12, 1),
    (-72, 1),
    (210, 1),
    (-390, 1),
    (4095, 8),
    (-999, 2),
    (11877, 32),
    (-6759, 32),
    (746673, 8192),
    (-118833, 4096),
    (105651, 16384),
    (-14673, 16384),
    (981201, 16777216),
];

/// Coefficients of the tabulated order-5 depolarising rate polynomial for
/// powers p^4 .. p^32.
const ORDER5_COEFFS: [(i64, i64); 29] = [
    (192, 1),
    (-2688, 1),
    (19488, 1),
    (-96096, 1),
    (359052, 1),
    (-1076304, 1),
    (2679264, 1),
    (-5663592, 1),
    (660468723, 64),
    (-524016063, 32),
    (2916648909, 128),
    (-3575251239, 128),
    (247771513233, 8192),
    (-29664177201, 1024),
    (402111190275, 16384),
    (-301008655485, 16384),
    (25426529527977, 2097152),
    (-7371155519931, 1048576),
    (14948591861835, 4194304),
    (-6585748985817, 4194304),
    (40009926738525, 67108864),
    (-3238417329813, 16777216),
    (14102865567135, 268435456),
    (-3165750102405, 268435456),
    (146071342742253, 68719476736),
    (-10160062539117, 34359738368),
    (4095741366951, 137438953472),
    (-266117803725, 137438953472),
    (17141597128353, 281474976710656),
];

/// Horner evaluation of `p^4 * (coeffs[0] + coeffs[1] p + ...)`.
fn eval_poly_from_p4<S: Scalar>(p: &S, coeffs: &[(i64, i64)]) -> S {
    let mut acc = S::zero();
    for &(num, den) in coeffs.iter().rev() {
        acc = acc * p.clone() + S::ratio(num, den);
    }
    let p2 = p.clone() * p.clone();
    let p4 = p2.clone() * p2;
    acc * p4
}

/// One audit cell: the recurrence-engine rate and the tabulated
/// closed-form value at the same `(order, p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedFormComparison<S: Scalar> {
    pub order: u32,
    pub p: S,
    pub recurrence: S,
    pub closed_form: S,
    pub matches: bool,
}

/// Audit the tabulated closed-form polynomials against the recurrence
/// engine on a grid. A degree-32 polynomial identity is pinned by 33
/// distinct points, so exact agreement on such a grid proves the printed
/// transcription correct; any mismatch is reported as data rather than
/// panicking, for surfacing through the verification report.
pub fn compare_closed_forms<S: Scalar>(orders: &[u32], ps: &[S]) -> Vec<ClosedFormComparison<S>> {
    let mut out = Vec::new();
    for &order in orders {
        for p in ps {
            let Some(closed) = depolarising_rate_closed_form(order, p) else {
                continue;
            };
            let ch = PauliVec4::depolarising(p.clone()).expect("grid p in range");
            let rec = rate_at_order(&ch, i64::from(order)).expect("order fits");
            let matches = if S::EXACT {
                rec == closed
            } else {
                (rec.to_f64() - closed.to_f64()).abs() <= 1e-9
            };
            out.push(ClosedFormComparison {
                order,
                p: p.clone(),
                recurrence: rec,
                closed_form: closed,
                matches,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use crate::scalar::Exact;
    use num_traits::{One, Zero};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ch(text: &str) -> PauliVec4<Exact> {
        PauliVec4::parse(text).unwrap()
    }

    fn r(num: i64, den: i64) -> Exact {
        Exact::ratio(num, den)
    }

    fn interior_state_after(chan: &PauliVec4<Exact>, n: u32, mode: StepMode) -> InteriorBucketState<Exact> {
        let mut st = InteriorBucketState::new(chan);
        for _ in 0..n {
            st = interior_step(&st, mode);
        }
        st
    }

    #[test]
    fn every_step_conserves_total_mass_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let chan = sample::rational_channel(&mut rng, 36);
            for mode in [StepMode::ExactBilinear, StepMode::UniformClosure] {
                let mut st = InteriorBucketState::new(&chan);
                for _ in 0..5 {
                    st = interior_step(&st, mode);
                    assert_eq!(st.total_mass(), Exact::one());
                }
            }
        }
        for seed in 0..30u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = (seed % 3 + 1) as u8;
            let chan = sample::region_channel(&mut rng, Region::Face(w), 36);
            let mut st = FaceBucketState::new(&chan).unwrap();
            for _ in 0..5 {
                st = face_step(&st).unwrap();
                assert_eq!(st.total_mass(), Exact::one());
            }
            let chan = sample::region_channel(&mut rng, Region::BaseFace, 36);
            let mut st = BaseBucketState::new(&chan).unwrap();
            for _ in 0..5 {
                st = base_step(&st).unwrap();
                assert_eq!(st.total_mass(), Exact::one());
            }
        }
    }

    #[test]
    fn identity_channel_is_fixed_with_zero_identity_mass() {
        // The representation keeps the bare channel in the generic bucket,
        // so the identity channel never registers as distilled output: its
        // cascade never fires a measurement that heralds success.
        let id = PauliVec4::<Exact>::identity();
        for mode in [StepMode::ExactBilinear, StepMode::UniformClosure] {
            let mut st = InteriorBucketState::new(&id);
            for _ in 0..3 {
                st = interior_step(&st, mode);
                assert!(st.a.is_zero());
                assert_eq!(st.c, [Exact::one(), Exact::zero(), Exact::zero(), Exact::zero()]);
                assert!(st.b.iter().all(Zero::is_zero));
            }
        }
    }

    #[test]
    fn two_steps_give_the_quartic_identity_mass() {
        // Depolarising p: identity mass after two steps is 3 p^4 / 64.
        let p = r(3, 5);
        let chan = PauliVec4::depolarising(p.clone()).unwrap();
        let st = interior_state_after(&chan, 2, StepMode::ExactBilinear);
        let p4 = p.clone() * p.clone() * p.clone() * p.clone();
        assert_eq!(st.a, r(3, 64) * p4);

        // General channels: 4 (p1^2 p2^2 + p2^2 p3^2 + p3^2 p1^2).
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..25 {
            let chan = sample::rational_channel(&mut rng, 30);
            let st = interior_state_after(&chan, 2, StepMode::ExactBilinear);
            let [_, p1, p2, p3] = chan.components().clone();
            let expected = Exact::from_int(4)
                * (p1.clone() * p1.clone() * p2.clone() * p2.clone()
                    + p2.clone() * p2.clone() * p3.clone() * p3.clone()
                    + p3.clone() * p3.clone() * p1.clone() * p1.clone());
            assert_eq!(st.a, expected);
        }
    }

    #[test]
    fn step_modes_agree_exactly_on_the_depolarising_family() {
        // Depolarising channels keep the zero-identity bucket's direction
        // uniform at every order, which is exactly the regime where the
        // uniform-closure shortcut is lossless.
        for p in [r(1, 4), r(1, 1), r(13, 10), r(4, 3)] {
            let chan = PauliVec4::depolarising(p).unwrap();
            let mut exact = InteriorBucketState::new(&chan);
            let mut closed = InteriorBucketState::new(&chan);
            for _ in 0..6 {
                exact = interior_step(&exact, StepMode::ExactBilinear);
                closed = interior_step(&closed, StepMode::UniformClosure);
                assert_eq!(exact, closed);
            }
        }
    }

    #[test]
    fn step_modes_reach_the_same_interior_limit() {
        // Off the depolarising family the two modes differ at finite
        // order but share the attracting fixed point.
        let chan = PauliVec4::make_channel([0.4, 0.3, 0.2, 0.1]).unwrap();
        let mut exact = InteriorBucketState::new(&chan);
        let mut closed = InteriorBucketState::new(&chan);
        for _ in 0..200 {
            exact = interior_step(&exact, StepMode::ExactBilinear).normalised();
            closed = interior_step(&closed, StepMode::UniformClosure).normalised();
        }
        assert_ne!(exact.a, closed.a); // distinct trajectories...
        let alpha = fixed_point(FixedPointRegion::Interior).rate();
        assert!((exact.a - alpha).abs() < 1e-9); // ...same limit
        assert!((closed.a - alpha).abs() < 1e-9);
    }

    #[test]
    fn interior_iteration_reaches_the_closed_form_fixed_point() {
        let FixedPoint::Interior {
            alpha,
            beta,
            gamma,
            p_limit,
            q_limit,
        } = fixed_point(FixedPointRegion::Interior)
        else {
            panic!("region/constant mismatch")
        };
        assert!((alpha + beta + gamma - 1.0).abs() < 1e-15);
        assert!((alpha - 0.0670).abs() < 5e-5);

        for chan in [
            PauliVec4::depolarising(0.5).unwrap(),
            PauliVec4::make_channel([0.4, 0.3, 0.2, 0.1]).unwrap(),
        ] {
            let mut st = InteriorBucketState::new(&chan);
            let mut iters = 0;
            loop {
                let next = interior_step(&st, StepMode::ExactBilinear).normalised();
                iters += 1;
                let diff = (next.a - st.a).abs().max(
                    (0..4)
                        .map(|i| (next.c[i] - st.c[i]).abs())
                        .fold(0.0f64, f64::max),
                );
                st = next;
                if diff < CONVERGENCE_TOL || iters >= MAX_FIXED_POINT_ITERS {
                    break;
                }
            }
            assert!(iters < 200, "interior convergence took {iters} steps");
            assert!((st.a - alpha).abs() < 1e-9);
            let b_mass: f64 = st.b.iter().sum();
            let c_mass: f64 = st.c.iter().sum();
            assert!((b_mass - beta).abs() < 1e-9);
            assert!((c_mass - gamma).abs() < 1e-9);
            for i in 0..4 {
                assert!((st.c[i] / c_mass - p_limit[i]).abs() < 1e-9);
            }
            for i in 0..3 {
                assert!((st.b[i] / b_mass - q_limit[i + 1]).abs() < 1e-9);
            }
        }

        let (rate, iters) = converged_rate(
            &PauliVec4::depolarising(0.5).unwrap(),
            StepMode::ExactBilinear,
        );
        assert!((rate - alpha).abs() < 1e-9);
        assert!(iters < MAX_FIXED_POINT_ITERS);
    }

    #[test]
    fn face_step_one_step_examples() {
        // Equal mix of two distinct Pauli unitaries: one step distils
        // deterministically, splitting evenly between identity and the
        // heralded third-axis unitary.
        let exy = ch("0, 1/2, 1/2, 0");
        let st = FaceBucketState::new(&exy).unwrap();
        assert_eq!(st.face_axis, 3);
        let st = face_step(&st).unwrap();
        assert_eq!(st.a, r(1, 2));
        assert_eq!(st.bu, r(1, 2));
        assert_eq!(st.rate(), Exact::one());

        // Face channel: the heralded-unitary mass after one step is
        // 2 p1 p2 (the '−' branch of the generic bucket with itself).
        let face = ch("1/2, 1/4, 1/4, 0");
        let st = face_step(&FaceBucketState::new(&face).unwrap()).unwrap();
        assert_eq!(st.bu, r(1, 8));
    }

    #[test]
    fn face_iteration_reaches_the_side_face_constants() {
        let FixedPoint::SideFace {
            alpha,
            unitary,
            gamma,
            delta,
            p_limit,
            q_limit,
        } = fixed_point(FixedPointRegion::SideFace)
        else {
            panic!("region/constant mismatch")
        };
        assert!((alpha + unitary + gamma + delta - 1.0).abs() < 1e-15);
        let fp_rate = fixed_point(FixedPointRegion::SideFace).rate();
        assert!((fp_rate - (3.0 - std::f64::consts::SQRT_2) / 4.0).abs() < 1e-15);
        assert!((fp_rate - 0.3965).abs() < 2e-4);

        let chan = PauliVec4::make_channel([0.5, 0.25, 0.25, 0.0]).unwrap();
        let mut st = FaceBucketState::new(&chan).unwrap();
        let mut iters = 0;
        loop {
            let next = face_step(&st).unwrap().normalised();
            iters += 1;
            let mut diff: f64 = (next.a - st.a).abs().max((next.bu - st.bu).abs());
            for i in 0..4 {
                diff = diff.max((next.c[i] - st.c[i]).abs());
            }
            st = next;
            if diff < CONVERGENCE_TOL || iters >= MAX_FIXED_POINT_ITERS {
                break;
            }
        }
        assert!(iters < 500, "face convergence took {iters} steps");
        assert!((st.a - alpha).abs() < 1e-9);
        assert!((st.bu - unitary).abs() < 1e-9);
        let c_mass: f64 = st.c.iter().sum();
        let d_mass: f64 = st.d.iter().sum();
        assert!((c_mass - gamma).abs() < 1e-9);
        assert!((d_mass - delta).abs() < 1e-9);
        for i in 0..4 {
            assert!((st.c[i] / c_mass - p_limit[i]).abs() < 1e-9);
        }
        for i in 0..3 {
            assert!((st.d[i] / d_mass - q_limit[i + 1]).abs() < 1e-9);
        }
        assert!((st.rate() - fp_rate).abs() < 1e-9);
    }

    #[test]
    fn base_recurrence_low_orders_and_limit() {
        let uniform = ch("0, 1/3, 1/3, 1/3");
        let st = BaseBucketState::new(&uniform).unwrap();
        let st1 = base_step(&st).unwrap();
        assert_eq!(st1.rate(), r(1, 3));
        let st2 = base_step(&st1).unwrap();
        assert_eq!(st2.rate(), r(7, 27));

        let (rate, iters) = converged_rate(
            &PauliVec4::make_channel([0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap(),
            StepMode::ExactBilinear,
        );
        assert!((rate - 0.25).abs() < 1e-9);
        // The base fixed point is superattracting: the iteration lands on
        // it in a handful of steps, not hundreds.
        assert!(iters < 20, "base convergence took {iters} steps");
        let fp = fixed_point(FixedPointRegion::BaseFace);
        assert!((fp.rate() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn endpoint_constants_form_an_exact_stationary_state() {
        // The depolarising endpoint constants, written in interior bucket
        // coordinates, map to themselves exactly under both step modes:
        // with the generic bucket empty the interior step restricts to the
        // zero-identity recurrence.
        let st = InteriorBucketState::<Exact> {
            a: r(1, 4),
            b: [r(1, 4), r(1, 4), r(1, 4)],
            c: [Exact::zero(), Exact::zero(), Exact::zero(), Exact::zero()],
            order: 0,
        };
        for mode in [StepMode::ExactBilinear, StepMode::UniformClosure] {
            let next = interior_step(&st, mode);
            assert_eq!(next.a, st.a);
            assert_eq!(next.b, st.b);
            assert_eq!(next.c, st.c);
        }
        let FixedPoint::DepolarisingEndpoint {
            alpha,
            beta,
            gamma,
            p_limit,
            q_limit,
        } = fixed_point(FixedPointRegion::DepolarisingEndpoint)
        else {
            panic!("region/constant mismatch")
        };
        assert_eq!((alpha, beta, gamma), (0.25, 0.75, 0.0));
        assert!((p_limit.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(q_limit, [0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
        // Its escape direction matches the interior fixed point's limit
        // direction.
        let FixedPoint::Interior { p_limit: p_int, .. } = fixed_point(FixedPointRegion::Interior)
        else {
            panic!("region/constant mismatch")
        };
        assert_eq!(p_limit, p_int);
    }

    #[test]
    fn rate_dispatch_matches_the_tabulated_low_order_values() {
        let dep1 = PauliVec4::depolarising(Exact::one()).unwrap();
        assert_eq!(rate_at_order(&dep1, 2).unwrap(), r(3, 64));
        assert_eq!(rate_at_order(&dep1, 3).unwrap(), r(201, 4096));

        // No full-support channel distils at the plain switch.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let chan = sample::interior_channel(&mut rng, 24);
            assert!(rate_at_order(&chan, 0).unwrap().is_zero());
            assert!(rate_at_order(&chan, 1).unwrap().is_zero());
        }

        // Mixtures of the identity with one Pauli unitary distil
        // deterministically after a perpendicular-Pauli pre-rotation.
        for axis in 1..=3u8 {
            let mut comps = [Exact::zero(), Exact::zero(), Exact::zero(), Exact::zero()];
            comps[0] = r(2, 3);
            comps[axis as usize] = r(1, 3);
            let chan = PauliVec4::make_channel(comps).unwrap();
            assert_eq!(rate_at_order(&chan, 1).unwrap(), Exact::one());
            assert_eq!(rate_at_order(&chan, 2).unwrap(), Exact::one());
        }

        // Two-unitary edges distil deterministically in one step with no
        // pre-rotation.
        assert_eq!(rate_at_order(&ch("0, 1/2, 0, 1/2"), 1).unwrap(), Exact::one());

        // Vertices cannot be improved at any order.
        let id = PauliVec4::<Exact>::identity();
        let uz = PauliVec4::<Exact>::unitary(3);
        for n in 0..4 {
            assert!(rate_at_order(&id, n).unwrap().is_zero());
            assert!(rate_at_order(&uz, n).unwrap().is_zero());
        }

        // Zero-identity channels route to the two-bucket recurrence.
        let dep_end = PauliVec4::depolarising(r(4, 3)).unwrap();
        assert_eq!(rate_at_order(&dep_end, 1).unwrap(), r(1, 3));
        assert_eq!(rate_at_order(&dep_end, 2).unwrap(), r(7, 27));

        assert!(matches!(
            rate_at_order(&dep1, -1),
            Err(Error::OrderNegative)
        ));
    }

    #[test]
    fn closed_forms_match_the_engine_at_orders_two_and_three() {
        // 33 distinct points pin any polynomial of degree <= 32.
        let ps: Vec<Exact> = (0..33).map(|k| r(k, 32)).collect();
        let report = compare_closed_forms(&[2, 3], &ps);
        assert_eq!(report.len(), 66);
        assert!(report.iter().all(|cell| cell.matches));
    }

    #[test]
    fn closed_forms_match_the_engine_at_orders_four_and_five() {
        // The long printed transcriptions check out exactly: the audit
        // grid pins the degree-32 identity, so the table in this module is
        // a faithful copy and the engine reproduces it.
        let ps: Vec<Exact> = (0..33).map(|k| r(k, 32)).collect();
        let report = compare_closed_forms(&[4, 5], &ps);
        assert_eq!(report.len(), 66);
        for cell in &report {
            assert!(
                cell.matches,
                "order {} at p = {}: engine {} vs closed form {}",
                cell.order,
                cell.p,
                cell.recurrence,
                cell.closed_form
            );
        }
    }

    #[test]
    fn noisier_channels_distil_no_worse_at_order_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let (noisy, clean) = sample::noisier_pair(&mut rng, 28);
            let rn = rate_at_order(&noisy, 2).unwrap();
            let rc = rate_at_order(&clean, 2).unwrap();
            assert!(rn >= rc);
            if noisy != clean {
                assert!(rn > rc);
            }
        }
    }

    #[test]
    fn beyond_the_unital_point_higher_order_can_lose() {
        // Inside the simplex the rate grows with order, but past p = 1 the
        // Bloch factors flip sign and the ordering breaks: at p = 13/10
        // the plain switch already beats the order-2 cascade.
        let chan = PauliVec4::depolarising(r(13, 10)).unwrap();
        let rates: Vec<Exact> = (1..=8)
            .map(|n| rate_at_order(&chan, n).unwrap())
            .collect();
        assert!(rates[1] > rates[2], "expected a drop from order 2 to 3");
        assert!(
            (0..7).any(|i| rates[i + 1] < rates[i]),
            "expected some order increase to lower the rate"
        );
    }

    #[test]
    fn rate_curve_tables_and_bounds() {
        // The identity endpoint stays at rate zero for every order.
        let pts = depolarising_rate_curve(&[Exact::zero()], &[0, 1, 2, 5, 8]).unwrap();
        assert_eq!(pts.len(), 5);
        assert!(pts.iter().all(|pt| pt.rate.is_zero()));

        // The far endpoint decreases strictly from 1/3 toward 1/4.
        let endpoint = PauliVec4::depolarising(r(4, 3)).unwrap();
        let mut prev = rate_at_order(&endpoint, 1).unwrap();
        assert_eq!(prev, r(1, 3));
        for n in 2..=8 {
            let next = rate_at_order(&endpoint, n).unwrap();
            assert!(next < prev);
            assert!(next > r(1, 4));
            prev = next;
        }

        let grid: Vec<Exact> = (1..=8).map(|k| r(k, 8)).collect();
        let pts = depolarising_rate_curve(&grid, &[2, 3]).unwrap();
        assert_eq!(pts.len(), 16);

        assert!(matches!(
            depolarising_rate_curve(&grid, &[65]),
            Err(Error::OrderTooLarge { got: 65, max: 64 })
        ));
        assert!(matches!(
            depolarising_rate_curve(&grid, &[-1]),
            Err(Error::OrderNegative)
        ));

        let channels = [PauliVec4::depolarising(Exact::one()).unwrap()];
        let rows = channel_rate_curve(&channels, &[2]).unwrap();
        assert_eq!(rows, vec![(0usize, 2u32, r(3, 64))]);
    }

    #[test]
    fn state_constructors_reject_wrong_regions() {
        assert!(matches!(
            FaceBucketState::new(&ch("1/4, 1/4, 1/4, 1/4")),
            Err(Error::ShapeMismatch)
        ));
        assert!(matches!(
            FaceBucketState::new(&PauliVec4::<Exact>::identity()),
            Err(Error::ShapeMismatch)
        ));
        assert!(matches!(
            BaseBucketState::new(&ch("0, 1/2, 1/2, 0")),
            Err(Error::ShapeMismatch)
        ));
        let mut bad = BaseBucketState::new(&ch("0, 1/3, 1/3, 1/3")).unwrap();
        bad.c[0] = r(1, 10);
        assert!(matches!(base_step(&bad), Err(Error::ShapeMismatch)));
        let mut bad_face = FaceBucketState::new(&ch("1/2, 1/4, 1/4, 0")).unwrap();
        bad_face.c[3] = r(1, 10);
        assert!(matches!(face_step(&bad_face), Err(Error::ShapeMismatch)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn rates_are_probabilities_and_mass_is_conserved(seed in 0u64..1 << 48, denom in 4u64..48, n in 0i64..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let chan = sample::rational_channel(&mut rng, denom);
            let rate = rate_at_order(&chan, n).unwrap();
            prop_assert!(rate >= Exact::zero());
            prop_assert!(rate <= Exact::one());

            let mut st = InteriorBucketState::new(&chan);
            for _ in 0..n {
                st = interior_step(&st, StepMode::ExactBilinear);
            }
            prop_assert_eq!(st.total_mass(), Exact::one());
        }

        #[test]
        fn depolarising_rates_increase_strictly_with_order_up_to_the_unital_point(k in 1i64..=40) {
            // Strict growth in the order on 0 < p <= 1; the plain switch
            // sits at rate zero and every later order improves on the
            // previous one.
            let p = Exact::ratio(k, 40);
            let chan = PauliVec4::depolarising(p).unwrap();
            prop_assert!(rate_at_order(&chan, 1).unwrap().is_zero());
            let mut prev = Exact::zero();
            for n in 2..=5 {
                let rate = rate_at_order(&chan, n).unwrap();
                prop_assert!(rate > prev);
                prev = rate;
            }
        }
    }
}
