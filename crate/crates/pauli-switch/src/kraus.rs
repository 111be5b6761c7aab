//! Dense-matrix oracle for the switch constructions: explicit Kraus
//! operators of switches and nested superswitches, simulated ancilla
//! measurement, Choi matrices, Clifford twirling, and an exact
//! symbolic-label engine built on Pauli commutation brackets.
//!
//! Everything here is deliberately independent of the pairing algebra in
//! [`crate::switch`]: the two are compared against each other in tests, so
//! neither may borrow the other's arithmetic.

use num_complex::Complex64;
use num_traits::Zero;
use rand::Rng;

use crate::channel::PauliVec4;
use crate::scalar::{Exact, Scalar};
use crate::switch::{merge_scatter, EnsembleEntry, OutcomeEnsemble, OutcomeString};
use crate::Error;

pub type C64 = Complex64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Dense 2x2 complex matrix, row-major `[m00, m01, m10, m11]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [C64; 4]);

impl Mat2 {
    pub fn zero() -> Self {
        Mat2([czero(); 4])
    }

    pub fn id() -> Self {
        Mat2([c(1.0, 0.0), czero(), czero(), c(1.0, 0.0)])
    }

    /// The Pauli matrix with index `i` (0 = identity, 1 = X, 2 = Y, 3 = Z).
    pub fn pauli(i: usize) -> Self {
        match i {
            0 => Self::id(),
            1 => Mat2([czero(), c(1.0, 0.0), c(1.0, 0.0), czero()]),
            2 => Mat2([czero(), c(0.0, -1.0), c(0.0, 1.0), czero()]),
            3 => Mat2([c(1.0, 0.0), czero(), czero(), c(-1.0, 0.0)]),
            _ => panic!("Pauli index must be 0..4"),
        }
    }

    /// Density matrix `(I + r . sigma) / 2` of the Bloch vector `r`.
    pub fn from_bloch(r: [f64; 3]) -> Self {
        let mut m = Self::id();
        for (i, ri) in r.iter().enumerate() {
            m = m.add(&Self::pauli(i + 1).scale(c(*ri, 0.0)));
        }
        m.scale(c(0.5, 0.0))
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.0[row * 2 + col]
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Mat2(std::array::from_fn(|k| self.0[k] + rhs.0[k]))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Mat2(std::array::from_fn(|k| self.0[k] - rhs.0[k]))
    }

    pub fn scale(&self, f: C64) -> Self {
        Mat2(std::array::from_fn(|k| self.0[k] * f))
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ])
    }

    pub fn dagger(&self) -> Self {
        Mat2([
            self.0[0].conj(),
            self.0[2].conj(),
            self.0[1].conj(),
            self.0[3].conj(),
        ])
    }

    pub fn transpose(&self) -> Self {
        Mat2([self.0[0], self.0[2], self.0[1], self.0[3]])
    }

    pub fn conj_entries(&self) -> Self {
        Mat2(std::array::from_fn(|k| self.0[k].conj()))
    }

    pub fn trace(&self) -> C64 {
        self.0[0] + self.0[3]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// One Kraus operator of a switch construction, block-diagonal in the
/// control-ancilla computational basis: `blocks[a]` is the system action
/// when the ancillas are in computational state `a` (bit `k` of `a` is
/// ancilla `k`, which records outcome-string position `k`).
#[derive(Clone, Debug, PartialEq)]
pub struct KrausOp {
    pub blocks: Vec<Mat2>,
}

impl KrausOp {
    /// Dense matrix on system x ancillas, basis index `s * 2^n_anc + a`.
    pub fn to_dense(&self) -> Vec<C64> {
        let nb = self.blocks.len();
        let dim = 2 * nb;
        let mut m = vec![czero(); dim * dim];
        for (a, block) in self.blocks.iter().enumerate() {
            for s_out in 0..2 {
                for s_in in 0..2 {
                    m[(s_out * nb + a) * dim + (s_in * nb + a)] = block.entry(s_out, s_in);
                }
            }
        }
        m
    }
}

/// A full Kraus decomposition of a switch construction before the ancilla
/// measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseKrausSet {
    pub n_ancillas: u32,
    pub ops: Vec<KrausOp>,
}

/// Kraus operators `sqrt(p_i) sigma_i` of a bare Pauli channel.
pub fn pauli_kraus<S: Scalar>(ch: &PauliVec4<S>) -> Vec<Mat2> {
    let p = ch.to_f64();
    (0..4)
        .map(|i| Mat2::pauli(i).scale(c(p.p(i).sqrt(), 0.0)))
        .collect()
}

/// The 16 Kraus operators of a quantum switch fed channels `E` (applied
/// second when the control reads 0) and `F`: operator `(i, j)` acts as
/// `E_i F_j` on control state 0 and `F_j E_i` on control state 1, with
/// `E_i = sqrt(p_i) sigma_i`. Written out directly, independent of the
/// recursive builder.
pub fn switch_kraus<S: Scalar>(ch_e: &PauliVec4<S>, ch_f: &PauliVec4<S>) -> DenseKrausSet {
    let e = pauli_kraus(ch_e);
    let f = pauli_kraus(ch_f);
    let mut ops = Vec::with_capacity(16);
    for ei in &e {
        for fj in &f {
            ops.push(KrausOp {
                blocks: vec![ei.mul(fj), fj.mul(ei)],
            });
        }
    }
    DenseKrausSet { n_ancillas: 1, ops }
}

/// Maximum superswitch order the dense Kraus builder supports. Order 4
/// would need `4^16` operators of 32768 blocks each (≈ 9 TB); the symbolic
/// engine [`nested_bracket_ensemble`] covers that regime instead.
pub const MAX_DENSE_ORDER: i64 = 3;

/// Dense Kraus decomposition of the order-`n` superswitch on `2^n` copies
/// of `ch`: built by recursively nesting two order-`(n-1)` sets under a
/// fresh root control (root ancilla bit 0 applies left-then-right as
/// written, bit 1 the reverse), with sub-record ancillas scattered exactly
/// like the outcome-string positions.
pub fn superswitch_kraus<S: Scalar>(
    ch: &PauliVec4<S>,
    order: i64,
) -> Result<DenseKrausSet, Error> {
    if order < 0 {
        return Err(Error::OrderNegative);
    }
    if order > MAX_DENSE_ORDER {
        return Err(Error::OrderTooLarge {
            got: order,
            max: MAX_DENSE_ORDER,
        });
    }
    let mut set = DenseKrausSet {
        n_ancillas: 0,
        ops: pauli_kraus(ch)
            .into_iter()
            .map(|k| KrausOp { blocks: vec![k] })
            .collect(),
    };
    for _ in 0..order {
        set = combine_kraus(&set);
    }
    Ok(set)
}

fn combine_kraus(sub: &DenseKrausSet) -> DenseKrausSet {
    let sub_anc = sub.n_ancillas as usize;
    let (scatter_a, scatter_b, root) = merge_scatter(sub_anc);
    let scatter = |bits: usize, map: &[usize]| -> usize {
        let mut out = 0usize;
        for (k, pos) in map.iter().enumerate() {
            if bits >> k & 1 == 1 {
                out |= 1 << pos;
            }
        }
        out
    };
    let n_anc = 2 * sub_anc + 1;
    let scat_a: Vec<usize> = (0..1usize << sub_anc).map(|x| scatter(x, &scatter_a)).collect();
    let scat_b: Vec<usize> = (0..1usize << sub_anc).map(|x| scatter(x, &scatter_b)).collect();
    let mut ops = Vec::with_capacity(sub.ops.len() * sub.ops.len());
    for op_a in &sub.ops {
        for op_b in &sub.ops {
            let mut blocks = vec![Mat2::zero(); 1 << n_anc];
            for (ia, ba) in op_a.blocks.iter().enumerate() {
                for (ib, bb) in op_b.blocks.iter().enumerate() {
                    let base = scat_a[ia] | scat_b[ib];
                    blocks[base] = ba.mul(bb);
                    blocks[base | 1 << root] = bb.mul(ba);
                }
            }
            ops.push(KrausOp { blocks });
        }
    }
    DenseKrausSet {
        n_ancillas: n_anc as u32,
        ops,
    }
}

/// Largest deviation of the per-block completeness sums `sum_K B_a(K)^† B_a(K)`
/// from the identity (Frobenius norm). Zero for a trace-preserving set.
pub fn completeness_residual(set: &DenseKrausSet) -> f64 {
    let nb = 1usize << set.n_ancillas;
    let mut worst: f64 = 0.0;
    for a in 0..nb {
        let mut acc = Mat2::zero();
        for op in &set.ops {
            let b = &op.blocks[a];
            acc = acc.add(&b.dagger().mul(b));
        }
        worst = worst.max(acc.sub(&Mat2::id()).frobenius_norm());
    }
    worst
}

/// In-place Walsh–Hadamard transform over matrix-valued data:
/// `v[sigma] <- sum_a (-1)^{popcount(a & sigma)} v[a]`.
fn fwht(v: &mut [Mat2]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        let mut base = 0;
        while base < n {
            for k in base..base + h {
                let x = v[k];
                let y = v[k + h];
                v[k] = x.add(&y);
                v[k + h] = x.sub(&y);
            }
            base += 2 * h;
        }
        h *= 2;
    }
}

/// Pauli coefficients `(c0, c1, c2, c3)` of `A = c0 I + c1 X + c2 Y + c3 Z`.
fn pauli_coefficients(m: &Mat2) -> [C64; 4] {
    let a00 = m.entry(0, 0);
    let a01 = m.entry(0, 1);
    let a10 = m.entry(1, 0);
    let a11 = m.entry(1, 1);
    let half = c(0.5, 0.0);
    [
        (a00 + a11) * half,
        (a01 + a10) * half,
        (a01 - a10) * half * C64::i(),
        (a00 - a11) * half,
    ]
}

/// Simulate the ancilla measurement of a switch Kraus set: ancillas are
/// prepared in `|+...+>`, the system probes one half of a maximally
/// entangled pair, and every ancilla is read out in the `|±>` basis.
/// Returns the exact outcome ensemble: for each `±` record, its probability
/// and the conditional Pauli channel.
///
/// Fails with [`Error::NonPauliResidual`] if any conditional state is not
/// diagonal in the maximally-entangled basis beyond 1e-9 (a switch of Pauli
/// channels never is). Outcomes with probability at most 1e-14 are flagged
/// as placeholders.
pub fn measure_ensemble(set: &DenseKrausSet) -> Result<OutcomeEnsemble<f64>, Error> {
    let n_anc = set.n_ancillas as usize;
    debug_assert!((n_anc + 1).is_power_of_two());
    let blocks = if n_anc <= 3 {
        measure_dense_probe(set)
    } else {
        measure_blockwise(set)
    };
    let order = (n_anc + 1).trailing_zeros();
    let mut entries = Vec::with_capacity(blocks.len());
    for (sigma, g) in blocks.iter().enumerate() {
        let mut off: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    off = off.max(g[i][j].norm());
                }
            }
        }
        if off > 1e-9 {
            return Err(Error::NonPauliResidual(off));
        }
        let w: [f64; 4] = std::array::from_fn(|i| g[i][i].re.max(0.0));
        let prob: f64 = w.iter().sum();
        let placeholder = prob <= 1e-14;
        let channel = if placeholder {
            PauliVec4::identity()
        } else {
            PauliVec4::new_unchecked(std::array::from_fn(|i| w[i] / prob))
        };
        entries.push(EnsembleEntry {
            outcome: OutcomeString::from_bits(sigma as u32, n_anc as u8),
            prob,
            channel,
            placeholder,
        });
    }
    Ok(OutcomeEnsemble { order, entries })
}

/// Measurement by literal state-vector simulation on system x ancillas x
/// reference. Only used for small ancilla counts; cross-validated against
/// [`measure_blockwise`].
fn measure_dense_probe(set: &DenseKrausSet) -> Vec<[[C64; 4]; 4]> {
    let n_anc = set.n_ancillas as usize;
    let nb = 1usize << n_anc;
    let amp0 = (0.5f64).sqrt() * (nb as f64).sqrt().recip();
    let proj = (nb as f64).sqrt().recip();
    let mut rho_prod = vec![[[czero(); 4]; 4]; nb];
    for op in &set.ops {
        // psi[(s', a, r)] after the operator, from the probe
        // (1/sqrt2) sum_s |s>_S |+..+>_A |s>_R.
        let mut psi = vec![czero(); 2 * nb * 2];
        for (a, block) in op.blocks.iter().enumerate() {
            for s_out in 0..2 {
                for r in 0..2 {
                    psi[(s_out * nb + a) * 2 + r] = block.entry(s_out, r) * amp0;
                }
            }
        }
        for sigma in 0..nb {
            // Project every ancilla onto its +/- outcome.
            let mut cond = [czero(); 4]; // (s', r)
            for a in 0..nb {
                let sign = if (a & sigma).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                for s_out in 0..2 {
                    for r in 0..2 {
                        cond[s_out * 2 + r] += psi[(s_out * nb + a) * 2 + r] * c(sign * proj, 0.0);
                    }
                }
            }
            for u in 0..4 {
                for v in 0..4 {
                    rho_prod[sigma][u][v] += cond[u] * cond[v].conj();
                }
            }
        }
    }
    rho_prod.iter().map(product_to_bell).collect()
}

/// Measurement via a Walsh–Hadamard transform over the ancilla blocks of
/// each operator: the `sigma`-projected system action is
/// `2^-n_anc * sum_a (-1)^{popcount(a & sigma)} blocks[a]`, whose Pauli
/// coefficients feed the conditional maximally-entangled-basis state
/// directly. Scales to large ancilla counts without building state vectors.
fn measure_blockwise(set: &DenseKrausSet) -> Vec<[[C64; 4]; 4]> {
    let n_anc = set.n_ancillas as usize;
    let nb = 1usize << n_anc;
    let norm = (nb as f64).recip();
    let mut g = vec![[[czero(); 4]; 4]; nb];
    for op in &set.ops {
        let mut wht = op.blocks.clone();
        fwht(&mut wht);
        for (sigma, m) in wht.iter().enumerate() {
            let scaled = m.scale(c(norm, 0.0));
            if scaled.frobenius_norm() < 1e-15 {
                continue;
            }
            let coeff = pauli_coefficients(&scaled);
            let acc = &mut g[sigma];
            for i in 0..4 {
                for j in 0..4 {
                    acc[i][j] += coeff[i] * coeff[j].conj();
                }
            }
        }
    }
    g
}

/// Maximally entangled basis vectors over a pair of qubits (product basis
/// index `s * 2 + r`), ordered to correspond to Pauli labels I, X, Y, Z
/// acting on the first qubit.
fn bell_vectors() -> [[C64; 4]; 4] {
    let h = (0.5f64).sqrt();
    [
        [c(h, 0.0), czero(), czero(), c(h, 0.0)],
        [czero(), c(h, 0.0), c(h, 0.0), czero()],
        [czero(), c(h, 0.0), c(-h, 0.0), czero()],
        [c(h, 0.0), czero(), czero(), c(-h, 0.0)],
    ]
}

/// Conjugate a 4x4 product-basis matrix into the maximally entangled basis.
fn product_to_bell(rho: &[[C64; 4]; 4]) -> [[C64; 4]; 4] {
    let b = bell_vectors();
    let mut out = [[czero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = czero();
            for u in 0..4 {
                for v in 0..4 {
                    acc += b[i][u].conj() * rho[u][v] * b[j][v];
                }
            }
            out[i][j] = acc;
        }
    }
    out
}

/// Choi matrix `(E ⊗ id)(|Phi><Phi|)` of a channel given by Kraus operators,
/// in the product basis (index `s * 2 + r`), trace one for a CPTP set.
pub fn choi_of_kraus(ops: &[Mat2]) -> [[C64; 4]; 4] {
    let mut j = [[czero(); 4]; 4];
    let half = c(0.5, 0.0);
    for k in ops {
        // w[(s', r)] with index s' * 2 + r: entry (s', r) of K.
        let w = [k.entry(0, 0), k.entry(0, 1), k.entry(1, 0), k.entry(1, 1)];
        for u in 0..4 {
            for v in 0..4 {
                j[u][v] += w[u] * w[v].conj() * half;
            }
        }
    }
    j
}

fn canonical_phase(m: &Mat2) -> Mat2 {
    for e in m.0 {
        if e.norm() > 1e-9 {
            return m.scale(e.conj() / e.norm());
        }
    }
    *m
}

fn phase_key(m: &Mat2) -> [i64; 8] {
    let mc = canonical_phase(m);
    let mut key = [0i64; 8];
    for (k, e) in mc.0.iter().enumerate() {
        key[2 * k] = (e.re * 1e6).round() as i64;
        key[2 * k + 1] = (e.im * 1e6).round() as i64;
    }
    key
}

/// The 24 single-qubit Clifford unitaries (up to global phase), generated
/// by closing `{H, S}` under multiplication.
pub fn single_qubit_cliffords() -> Vec<Mat2> {
    let h = (0.5f64).sqrt();
    let gen_h = Mat2([c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]);
    let gen_s = Mat2([c(1.0, 0.0), czero(), czero(), c(0.0, 1.0)]);
    let mut seen = std::collections::BTreeSet::new();
    let mut group = Vec::new();
    let mut queue = vec![Mat2::id()];
    seen.insert(phase_key(&Mat2::id()));
    while let Some(u) = queue.pop() {
        group.push(u);
        for g in [&gen_h, &gen_s] {
            let next = canonical_phase(&u.mul(g));
            if seen.insert(phase_key(&next)) {
                queue.push(next);
            }
        }
    }
    assert_eq!(group.len(), 24, "single-qubit Clifford group has order 24");
    group
}

fn kron2(a: &Mat2, b: &Mat2) -> [[C64; 4]; 4] {
    let mut out = [[czero(); 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[i * 2 + k][j * 2 + l] = a.entry(i, j) * b.entry(k, l);
                }
            }
        }
    }
    out
}

fn mat4_mul(a: &[[C64; 4]; 4], b: &[[C64; 4]; 4]) -> [[C64; 4]; 4] {
    let mut out = [[czero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = czero();
            for k in 0..4 {
                acc += a[i][k] * b[k][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

/// Average a channel over the 24 single-qubit Cliffords and return the
/// depolarising parameter `eta` of the result (`eta = 0` for the identity,
/// `4/3` for the completely anti-aligning extreme).
///
/// Rejects Kraus sets that are not trace preserving within 1e-9
/// ([`Error::NotCptp`]). The twirled Choi matrix is asserted to be
/// diagonal in the maximally entangled basis with equal X/Y/Z weights, as
/// the group average guarantees.
pub fn clifford_twirl(ops: &[Mat2]) -> Result<f64, Error> {
    let mut comp = Mat2::zero();
    for k in ops {
        comp = comp.add(&k.dagger().mul(k));
    }
    let resid = comp.sub(&Mat2::id()).frobenius_norm();
    if resid > 1e-9 {
        return Err(Error::NotCptp(resid));
    }
    let j = choi_of_kraus(ops);
    let group = single_qubit_cliffords();
    let mut avg = [[czero(); 4]; 4];
    for u in &group {
        let left = kron2(&u.dagger(), &u.transpose());
        let right = kron2(u, &u.conj_entries());
        let t = mat4_mul(&mat4_mul(&left, &j), &right);
        for r in 0..4 {
            for s in 0..4 {
                avg[r][s] += t[r][s] / c(24.0, 0.0);
            }
        }
    }
    let bell = product_to_bell(&avg);
    let mut off: f64 = 0.0;
    for i in 0..4 {
        for jx in 0..4 {
            if i != jx {
                off = off.max(bell[i][jx].norm());
            }
        }
    }
    assert!(off < 1e-10, "twirled state must be Bell-diagonal, got {off:e}");
    let w: [f64; 4] = std::array::from_fn(|i| bell[i][i].re);
    assert!(
        (w[1] - w[2]).abs() < 1e-10 && (w[2] - w[3]).abs() < 1e-10,
        "twirled state must weight X, Y, Z equally"
    );
    Ok((w[1] + w[2] + w[3]) * 4.0 / 3.0)
}

/// Random Kraus decomposition of a Haar-ish random CPTP qubit channel:
/// Gaussian operator entries, then a closed-form inverse square root of the
/// completeness sum restores trace preservation exactly.
pub fn random_cptp_kraus<R: Rng + ?Sized>(rng: &mut R, n_ops: usize) -> Vec<Mat2> {
    assert!(n_ops >= 1);
    fn gauss<R: Rng + ?Sized>(rng: &mut R) -> f64 {
        let u: f64 = 1.0 - rng.random::<f64>();
        let v: f64 = rng.random();
        (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    }
    let mut ops = Vec::with_capacity(n_ops);
    for _ in 0..n_ops {
        let mut entries = [czero(); 4];
        for e in &mut entries {
            *e = c(gauss(rng), gauss(rng));
        }
        ops.push(Mat2(entries));
    }
    let mut m = Mat2::zero();
    for k in &ops {
        m = m.add(&k.dagger().mul(k));
    }
    let inv_sqrt = hermitian_inverse_sqrt(&m);
    ops.iter().map(|k| k.mul(&inv_sqrt)).collect()
}

/// Closed-form `M^(-1/2)` for a positive-definite Hermitian 2x2 matrix.
fn hermitian_inverse_sqrt(m: &Mat2) -> Mat2 {
    let a = m.entry(0, 0).re;
    let d = m.entry(1, 1).re;
    let b = m.entry(0, 1);
    let mid = (a + d) / 2.0;
    let rad = (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
    let (lo, hi) = (mid - rad, mid + rad);
    assert!(lo > 1e-12, "matrix must be positive definite");
    if rad < 1e-15 {
        return Mat2::id().scale(c(mid.sqrt().recip(), 0.0));
    }
    let project = |lambda: f64| -> Mat2 {
        // Rank-one projector onto the eigenvector [b, lambda - a].
        let v0 = b;
        let v1 = c(lambda - a, 0.0);
        let n2 = v0.norm_sqr() + v1.norm_sqr();
        if n2 < 1e-30 {
            // b == 0 and lambda == d: the eigenvector is e2 or e1.
            return if (lambda - d).abs() < (lambda - a).abs() {
                Mat2([czero(), czero(), czero(), c(1.0, 0.0)])
            } else {
                Mat2([c(1.0, 0.0), czero(), czero(), czero()])
            };
        }
        let f = c(1.0 / n2, 0.0);
        Mat2([
            v0 * v0.conj() * f,
            v0 * v1.conj() * f,
            v1 * v0.conj() * f,
            v1 * v1.conj() * f,
        ])
    };
    let p_hi = project(hi);
    let p_lo = Mat2::id().sub(&p_hi);
    p_hi.scale(c(hi.sqrt().recip(), 0.0))
        .add(&p_lo.scale(c(lo.sqrt().recip(), 0.0)))
}

// ---------------------------------------------------------------------------
// Exact symbolic-label engine: Pauli words with tracked magnitude and phase.
// ---------------------------------------------------------------------------

/// A scaled Pauli word `i^phase * sqrt(mag2) * sigma_index`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledPauli {
    /// Power of `i` in the prefactor (mod 4).
    pub phase: u8,
    /// Squared magnitude of the prefactor (exact).
    pub mag2: Exact,
    /// Pauli label 0..4.
    pub index: u8,
}

/// Single-qubit label product `sigma_a sigma_b = i^k sigma_c`, derived from
/// the dense matrices at first use (immune to hand-transcription slips).
fn label_product(a: u8, b: u8) -> (u8, u8) {
    static TABLE: std::sync::OnceLock<[[(u8, u8); 4]; 4]> = std::sync::OnceLock::new();
    let t = TABLE.get_or_init(|| {
        let mut t = [[(0u8, 0u8); 4]; 4];
        for x in 0..4usize {
            for y in 0..4usize {
                let prod = Mat2::pauli(x).mul(&Mat2::pauli(y));
                let mut found = None;
                for cidx in 0..4usize {
                    let overlap = Mat2::pauli(cidx).dagger().mul(&prod).trace() / c(2.0, 0.0);
                    if overlap.norm() > 0.5 {
                        let phase = [c(1.0, 0.0), C64::i(), c(-1.0, 0.0), -C64::i()]
                            .iter()
                            .position(|p| (overlap - p).norm() < 1e-12)
                            .expect("Pauli products have unit i-power phases");
                        found = Some((phase as u8, cidx as u8));
                    }
                }
                t[x][y] = found.expect("product of Paulis is a Pauli");
            }
        }
        t
    });
    t[a as usize][b as usize]
}

/// Whether two Pauli labels commute, derived from the dense matrices.
fn labels_commute(a: u8, b: u8) -> bool {
    static TABLE: std::sync::OnceLock<[[bool; 4]; 4]> = std::sync::OnceLock::new();
    let t = TABLE.get_or_init(|| {
        let mut t = [[false; 4]; 4];
        for x in 0..4usize {
            for y in 0..4usize {
                let xy = Mat2::pauli(x).mul(&Mat2::pauli(y));
                let yx = Mat2::pauli(y).mul(&Mat2::pauli(x));
                t[x][y] = xy.sub(&yx).frobenius_norm() < 1e-12;
            }
        }
        t
    });
    t[a as usize][b as usize]
}

impl ScaledPauli {
    pub fn new(phase: u8, mag2: Exact, index: u8) -> Self {
        assert!(index < 4);
        Self {
            phase: phase % 4,
            mag2,
            index,
        }
    }

    /// Plain operator product (no bracket factor of 2).
    pub fn product(&self, other: &Self) -> Self {
        let (k, idx) = label_product(self.index, other.index);
        Self {
            phase: (self.phase + other.phase + k) % 4,
            mag2: self.mag2.clone() * other.mag2.clone(),
            index: idx,
        }
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        labels_commute(self.index, other.index)
    }

    /// Full commutator `[A, B]`; `None` when the labels commute. The
    /// magnitude carries the bracket's factor 2 (so `mag2` gains a 4):
    /// `[X, Y] = 2i Z`.
    pub fn commutator(&self, other: &Self) -> Option<Self> {
        if self.commutes_with(other) {
            return None;
        }
        let mut p = self.product(other);
        p.mag2 *= Exact::from_int(4);
        Some(p)
    }

    /// Full anticommutator `{A, B}`; `None` when the labels anticommute.
    pub fn anticommutator(&self, other: &Self) -> Option<Self> {
        if !self.commutes_with(other) {
            return None;
        }
        let mut p = self.product(other);
        p.mag2 *= Exact::from_int(4);
        Some(p)
    }
}

/// Maximum order of the symbolic-label superswitch engine.
pub const MAX_BRACKET_ORDER: i64 = 4;

// Per outcome string: the scaled Pauli words of every surviving Kraus-index
// tuple (one word per tuple — each tuple survives at exactly one record).
type FullTable = Vec<Vec<ScaledPauli>>;
// Per outcome string: total squared magnitude per Pauli label. Lossless for
// probabilities because distinct tuples contribute incoherently.
type AggTable = Vec<[Exact; 4]>;

fn combine_full(table: &FullTable, sub_len: usize) -> FullTable {
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
    let mut out: FullTable = vec![Vec::new(); 1 << (2 * sub_len + 1)];
    for (ia, list_a) in table.iter().enumerate() {
        let base_a = scatter(ia, &scatter_a);
        for (ib, list_b) in table.iter().enumerate() {
            let bits = base_a | scatter(ib, &scatter_b);
            for wa in list_a {
                for wb in list_b {
                    // The root control keeps the anticommutator half-bracket
                    // when the words commute ("+", root bit 0) and the
                    // commutator when they anticommute ("−", root bit 1);
                    // either way the surviving half is the plain product:
                    // the bracket's 2 cancels the control normalisation.
                    let target = if wa.commutes_with(wb) {
                        bits
                    } else {
                        bits | 1 << root
                    };
                    out[target].push(wa.product(wb));
                }
            }
        }
    }
    out
}

fn aggregate(table: &FullTable) -> AggTable {
    table
        .iter()
        .map(|list| {
            let mut acc = [Exact::zero(), Exact::zero(), Exact::zero(), Exact::zero()];
            for w in list {
                acc[w.index as usize] = acc[w.index as usize].clone() + w.mag2.clone();
            }
            acc
        })
        .collect()
}

fn combine_agg(table: &AggTable, sub_len: usize) -> AggTable {
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
    let zero = || [Exact::zero(), Exact::zero(), Exact::zero(), Exact::zero()];
    let mut out: AggTable = vec![zero(); 1 << (2 * sub_len + 1)];
    for (ia, wa) in table.iter().enumerate() {
        let base_a = scatter(ia, &scatter_a);
        for (ib, wb) in table.iter().enumerate() {
            let bits = base_a | scatter(ib, &scatter_b);
            for la in 0..4u8 {
                if wa[la as usize].is_zero() {
                    continue;
                }
                for lb in 0..4u8 {
                    if wb[lb as usize].is_zero() {
                        continue;
                    }
                    let (_, idx) = label_product(la, lb);
                    let target = if labels_commute(la, lb) {
                        bits
                    } else {
                        bits | 1 << root
                    };
                    out[target][idx as usize] = out[target][idx as usize].clone()
                        + wa[la as usize].clone() * wb[lb as usize].clone();
                }
            }
        }
    }
    out
}

fn agg_to_ensemble(table: AggTable, order: u32) -> OutcomeEnsemble<Exact> {
    let len = table.len().trailing_zeros() as u8;
    let entries = table
        .into_iter()
        .enumerate()
        .map(|(bits, acc)| {
            let prob: Exact =
                acc[0].clone() + acc[1].clone() + acc[2].clone() + acc[3].clone();
            let placeholder = prob.is_zero();
            let channel = if placeholder {
                PauliVec4::identity()
            } else {
                PauliVec4::new_unchecked(std::array::from_fn(|i| {
                    acc[i].clone() / prob.clone()
                }))
            };
            EnsembleEntry {
                outcome: OutcomeString::from_bits(bits as u32, len),
                prob,
                channel,
                placeholder,
            }
        })
        .collect();
    OutcomeEnsemble { order, entries }
}

/// Exact outcome ensemble of the order-`n` superswitch computed purely with
/// Pauli-word algebra: every Kraus-index tuple reduces to a single scaled
/// Pauli word that survives at exactly one outcome record, because at each
/// control the words either commute (the `+` half-bracket survives) or
/// anticommute (the `−` half survives), and the surviving half is the plain
/// word product.
///
/// Orders up to 3 keep the full per-record word lists; order 4 aggregates
/// squared magnitudes per label first (lossless for the ensemble), keeping
/// the table quadratic instead of `4^16` entries.
pub fn nested_bracket_ensemble(
    ch: &PauliVec4<Exact>,
    order: i64,
) -> Result<OutcomeEnsemble<Exact>, Error> {
    if order < 0 {
        return Err(Error::OrderNegative);
    }
    if order > MAX_BRACKET_ORDER {
        return Err(Error::OrderTooLarge {
            got: order,
            max: MAX_BRACKET_ORDER,
        });
    }
    let base: FullTable = vec![(0..4u8)
        .filter(|&i| !ch.p(i as usize).is_zero())
        .map(|i| ScaledPauli::new(0, ch.p(i as usize).clone(), i))
        .collect()];
    let full_orders = order.min(3);
    let mut table = base;
    let mut len = 0usize;
    for _ in 0..full_orders {
        table = combine_full(&table, len);
        len = 2 * len + 1;
    }
    let mut agg = aggregate(&table);
    for _ in full_orders..order {
        agg = combine_agg(&agg, len);
        len = 2 * len + 1;
    }
    Ok(agg_to_ensemble(agg, order as u32))
}
