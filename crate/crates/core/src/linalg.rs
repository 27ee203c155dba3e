// Copyright 2026 The ftgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra for small qubit registers.
//!
//! Operators are `nalgebra` column-major matrices of `Complex64`. Qubits are
//! numbered from 1, with qubit 1 the leftmost tensor factor (the most
//! significant bit of a computational-basis index), and `|0>` the `+1`
//! eigenstate of `sigma_z`.
//!
//! Step propagators `exp(-i dt H)` are formed from a Hermitian
//! eigendecomposition. For long runs of tiny steps with a sparse generator,
//! [`expm_action_taylor`] applies the exponential directly with a truncation
//! error below double-precision round-off.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use num_complex::Complex64 as C64;

pub type ComplexMatrix = DMatrix<C64>;
pub type StateVector = DVector<C64>;

/// Largest tolerated `max |H - H^dag|` for a generator.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Number of qubits for a register of dimension `dim`, if `dim` is a power of two.
pub fn qubit_count(dim: usize) -> Option<usize> {
    if dim.is_power_of_two() {
        Some(dim.trailing_zeros() as usize)
    } else {
        None
    }
}

/// `max_{ij} |H_ij - conj(H_ji)|`.
pub fn hermiticity_defect(h: &ComplexMatrix) -> f64 {
    if !h.is_square() {
        return f64::INFINITY;
    }
    let n = h.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `max_{ij} |(U^dag U - I)_ij|`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    let g = u.adjoint() * u;
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

/// Largest elementwise modulus of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Kronecker product `a (x) b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list of operators, leftmost factor first.
pub fn kron_all(ops: &[ComplexMatrix]) -> ComplexMatrix {
    ops.iter()
        .fold(ComplexMatrix::identity(1, 1), |acc, op| acc.kronecker(op))
}

/// `I (x) ... (x) op (x) ... (x) I` with `op` in the 1-based slot `position`.
pub fn kron_embed(op: &ComplexMatrix, position: usize, num_qubits: usize) -> Result<ComplexMatrix> {
    if op.shape() != (2, 2) {
        return Err(invalid(format!("embedded operator must be 2x2, got {:?}", op.shape())));
    }
    if position == 0 || position > num_qubits {
        return Err(invalid(format!(
            "qubit position {position} outside 1..={num_qubits}"
        )));
    }
    let left = identity(1 << (position - 1));
    let right = identity(1 << (num_qubits - position));
    Ok(left.kronecker(op).kronecker(&right))
}

/// `out = a * b` for square matrices, without allocating.
///
/// Column-major inner loop; measurably faster than the generic complex gemm
/// for the 8x8 and 32x32 operators used here.
pub fn mul_into(a: &ComplexMatrix, b: &ComplexMatrix, out: &mut ComplexMatrix) {
    let n = a.nrows();
    let k_dim = a.ncols();
    let m = b.ncols();
    debug_assert_eq!(k_dim, b.nrows());
    debug_assert_eq!(out.shape(), (n, m));
    let a_s = a.as_slice();
    let b_s = b.as_slice();
    let o_s = out.as_mut_slice();
    for j in 0..m {
        let o_col = &mut o_s[j * n..(j + 1) * n];
        o_col.fill(ZERO);
        for k in 0..k_dim {
            let bkj = b_s[j * k_dim + k];
            if bkj == ZERO {
                continue;
            }
            let a_col = &a_s[k * n..(k + 1) * n];
            for (o, &a_ik) in o_col.iter_mut().zip(a_col) {
                *o += a_ik * bkj;
            }
        }
    }
}

/// `a * b` using [`mul_into`].
pub fn mul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.nrows(), b.ncols());
    mul_into(a, b, &mut out);
    out
}

/// `Tr[a b]` in `O(n^2)`.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.nrows();
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(b.ncols(), n);
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// `Tr[w^dag u] = sum_ij conj(w_ij) u_ij`.
pub fn trace_adjoint_product(w: &ComplexMatrix, u: &ComplexMatrix) -> C64 {
    debug_assert_eq!(w.shape(), u.shape());
    w.iter().zip(u.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Eigenvalues (ascending is not guaranteed) and orthonormal eigenvectors
/// (columns) of a Hermitian matrix.
pub fn hermitian_eigen(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let eig = h.clone().symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// `exp(-i dt H)` for Hermitian `H`.
///
/// Fails with [`Error::NotHermitian`] when `max |H - H^dag|` exceeds
/// [`HERMITIAN_TOL`]; such a generator always means a model-construction bug.
pub fn expm_hermitian_prop(h: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix> {
    if !h.is_square() {
        return Err(invalid("generator must be square"));
    }
    if !dt.is_finite() {
        return Err(invalid("time step must be finite"));
    }
    let defect = hermiticity_defect(h);
    if !(defect <= HERMITIAN_TOL) {
        return Err(Error::NotHermitian(defect));
    }
    let n = h.nrows();
    if dt == 0.0 {
        return Ok(identity(n));
    }
    let (values, vectors) = hermitian_eigen(h);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite eigenvalue".into()));
    }
    Ok(spectral_exp(&values, &vectors, dt))
}

/// `V diag(exp(-i dt lambda)) V^dag`.
fn spectral_exp(values: &[f64], vectors: &ComplexMatrix, dt: f64) -> ComplexMatrix {
    let n = vectors.nrows();
    let mut scaled = vectors.clone();
    for (k, &lambda) in values.iter().enumerate() {
        let phase = C64::from_polar(1.0, -lambda * dt);
        for i in 0..n {
            scaled[(i, k)] *= phase;
        }
    }
    let mut out = ComplexMatrix::zeros(n, n);
    let vh = vectors.adjoint();
    mul_into(&scaled, &vh, &mut out);
    out
}

/// Overwrite `x` with `exp(-i dt H) x` via a truncated Taylor series.
///
/// `apply_h(src, dst)` must write `H src` into `dst`, and `norm_bound` must
/// bound the induced norm of `H`. The step is subdivided so each substep has
/// `norm_bound * dt <= 0.5`, and the series is summed until the next term
/// falls below `1e-18` relative to `x`, so the truncation error sits under
/// round-off.
pub fn expm_action_taylor<F>(mut apply_h: F, norm_bound: f64, dt: f64, x: &mut ComplexMatrix)
where
    F: FnMut(&ComplexMatrix, &mut ComplexMatrix),
{
    let substeps = ((norm_bound * dt.abs()) / 0.5).ceil().max(1.0) as usize;
    let h = dt / substeps as f64;
    let (r, c) = x.shape();
    let mut term = ComplexMatrix::zeros(r, c);
    let mut next = ComplexMatrix::zeros(r, c);
    for _ in 0..substeps {
        term.copy_from(x);
        let scale_sq = x
            .iter()
            .map(|z| z.norm_sqr())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        for order in 1..=60 {
            apply_h(&term, &mut next);
            // term = (-i h / order) * H term
            let factor = C64::new(0.0, -h / order as f64);
            let mut largest_sq: f64 = 0.0;
            for ((t, v), xv) in term
                .as_mut_slice()
                .iter_mut()
                .zip(next.as_slice())
                .zip(x.as_mut_slice().iter_mut())
            {
                *t = v * factor;
                *xv += *t;
                largest_sq = largest_sq.max(t.norm_sqr());
            }
            if largest_sq <= 1e-36 * scale_sq {
                break;
            }
        }
    }
}

/// Row-compressed operator for repeated products with dense blocks.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    dim: usize,
    rows: Vec<Vec<(usize, C64)>>,
}

impl SparseOperator {
    pub fn from_dense(m: &ComplexMatrix) -> Self {
        let dim = m.nrows();
        let rows = (0..dim)
            .map(|i| {
                (0..m.ncols())
                    .filter(|&j| m[(i, j)] != ZERO)
                    .map(|j| (j, m[(i, j)]))
                    .collect()
            })
            .collect();
        Self { dim, rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Max absolute row sum, an upper bound on the spectral norm of a
    /// Hermitian operator.
    pub fn norm_bound(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.iter().map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `dst += alpha * self * src`.
    pub fn apply_add(&self, alpha: f64, src: &ComplexMatrix, dst: &mut ComplexMatrix) {
        let n = self.dim;
        let s = src.as_slice();
        let d = dst.as_mut_slice();
        for j in 0..src.ncols() {
            let s_col = &s[j * n..(j + 1) * n];
            let d_col = &mut d[j * n..(j + 1) * n];
            for (i, row) in self.rows.iter().enumerate() {
                let mut acc = ZERO;
                for &(k, v) in row {
                    acc += v * s_col[k];
                }
                d_col[i] += acc * alpha;
            }
        }
    }
}

/// Bloch vector `(x, y, z)` of qubit `qubit` (1-based) from the reduced
/// density operator of a pure register state.
pub fn single_qubit_bloch(state: &StateVector, qubit: usize) -> Result<[f64; 3]> {
    let dim = state.len();
    let num_qubits = qubit_count(dim)
        .ok_or_else(|| invalid(format!("state dimension {dim} is not a power of two")))?;
    if qubit == 0 || qubit > num_qubits {
        return Err(invalid(format!("qubit {qubit} outside 1..={num_qubits}")));
    }
    let mask = 1usize << (num_qubits - qubit);
    let mut rho00 = 0.0;
    let mut rho11 = 0.0;
    let mut rho01 = ZERO;
    for b in 0..dim {
        if b & mask == 0 {
            let a0 = state[b];
            let a1 = state[b | mask];
            rho00 += a0.norm_sqr();
            rho11 += a1.norm_sqr();
            rho01 += a0 * a1.conj();
        }
    }
    // `+ 0.0` folds negative zero for clean output.
    Ok([2.0 * rho01.re + 0.0, -2.0 * rho01.im + 0.0, rho00 - rho11 + 0.0])
}

/// Distances between a target `W` and an implemented `U`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateErrorMetrics {
    /// Largest singular value of `W - U`.
    pub op_norm: f64,
    /// `sqrt(Tr[(W-U)^dag (W-U)])`.
    pub hs_norm: f64,
    /// `max_{mn} |W_mn - U_mn|`.
    pub max_elem: f64,
}

pub fn gate_error_metrics(w: &ComplexMatrix, u: &ComplexMatrix) -> Result<GateErrorMetrics> {
    if w.shape() != u.shape() {
        return Err(Error::DimensionMismatch {
            expected: w.nrows(),
            found: u.nrows(),
        });
    }
    let d = w - u;
    let gram = d.adjoint() * &d;
    let (values, _) = hermitian_eigen(&gram);
    let largest = values.iter().copied().fold(0.0, f64::max);
    let hs_sq: f64 = d.iter().map(|z| z.norm_sqr()).sum();
    Ok(GateErrorMetrics {
        op_norm: largest.max(0.0).sqrt(),
        hs_norm: hs_sq.sqrt(),
        max_elem: d.iter().map(|z| z.norm()).fold(0.0, f64::max),
    })
}


#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        max_abs_diff(a, b) < tol
    }

    #[test]
    fn expm_at_zero_time_is_identity() {
        let h = random_hermitian(4, 1.0, &mut rng(1));
        assert!(close(&expm_hermitian_prop(&h, 0.0).unwrap(), &identity(4), 1e-15));
    }

    #[test]
    fn expm_of_sigma_z_is_diagonal_phase() {
        let u = expm_hermitian_prop(&sigma_z(), PI / 2.0).unwrap();
        let expected = ComplexMatrix::from_row_slice(
            2,
            2,
            &[C64::from_polar(1.0, -PI / 2.0), ZERO, ZERO, C64::from_polar(1.0, PI / 2.0)],
        );
        assert!(close(&u, &expected, 1e-14));
    }

    #[test]
    fn expm_matches_series_oracle_on_random_hermitian() {
        let h = random_hermitian(8, 1.0, &mut rng(7));
        let u = expm_hermitian_prop(&h, 0.7).unwrap();
        assert!(unitarity_defect(&u) < 1e-10);
        let back = expm_series(&h, -0.7);
        assert!(close(&(&u * &back), &identity(8), 1e-10));
        assert!(close(&u, &expm_series(&h, 0.7), 1e-10));
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let mut h = sigma_x();
        h[(0, 1)] = C64::new(1.0, 1e-6);
        assert!(matches!(expm_hermitian_prop(&h, 1.0), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn expm_composition_and_inverse() {
        let mut r = rng(3);
        for n in [2, 8, 32] {
            let h = random_hermitian(n, 1.0, &mut r);
            let a = expm_hermitian_prop(&h, 0.3).unwrap();
            let b = expm_hermitian_prop(&h, 1.1).unwrap();
            let ab = expm_hermitian_prop(&h, 1.4).unwrap();
            assert!(close(&(&a * &b), &ab, 1e-10));
            let inv = expm_hermitian_prop(&h, -0.3).unwrap();
            assert!(close(&(&a * &inv), &identity(n), 1e-10));
        }
    }

    #[test]
    fn taylor_action_matches_eigen_route() {
        let mut r = rng(11);
        let h = random_hermitian(32, 1.0, &mut r);
        let sparse = SparseOperator::from_dense(&h);
        let x0 = random_unitary(32, &mut r);
        for dt in [1e-3, 0.05, 0.9] {
            let mut x = x0.clone();
            expm_action_taylor(
                |s, d| {
                    d.fill(ZERO);
                    sparse.apply_add(1.0, s, d)
                },
                sparse.norm_bound(),
                dt,
                &mut x,
            );
            let expected = expm_hermitian_prop(&h, dt).unwrap() * &x0;
            assert!(close(&x, &expected, 1e-12), "dt={dt}");
        }
    }

    #[test]
    fn mul_into_matches_nalgebra() {
        let mut r = rng(5);
        let a = random_unitary(8, &mut r);
        let b = random_hermitian(8, 1.0, &mut r);
        assert!(close(&mul(&a, &b), &(&a * &b), 1e-13));
        assert!((trace_of_product(&a, &b) - (&a * &b).trace()).norm() < 1e-12);
        assert!((trace_adjoint_product(&a, &b) - (a.adjoint() * &b).trace()).norm() < 1e-12);
    }

    #[test]
    fn kron_embed_places_operator() {
        let z2 = kron_embed(&sigma_z(), 2, 5).unwrap();
        let i2 = identity(2);
        let expected = kron_all(&[i2.clone(), sigma_z(), i2.clone(), i2.clone(), i2]);
        assert_eq!(z2, expected);

        assert_eq!(kron_embed(&sigma_x(), 1, 1).unwrap(), sigma_x());

        let x3 = kron_embed(&sigma_x(), 3, 3).unwrap();
        assert_eq!(x3.trace(), ZERO);
        assert!(hermiticity_defect(&x3) == 0.0);
        assert_eq!(&x3 * &x3, identity(8));
    }

    #[test]
    fn kron_embed_rejects_bad_position() {
        assert!(kron_embed(&sigma_x(), 0, 3).is_err());
        assert!(kron_embed(&sigma_x(), 4, 3).is_err());
    }

    #[test]
    fn bloch_of_basis_and_bell_states() {
        let mut s = StateVector::zeros(32);
        s[0] = ONE;
        assert_eq!(single_qubit_bloch(&s, 3).unwrap(), [0.0, 0.0, 1.0]);

        // Oracle by hand: rho_1 = Tr_2 |Phi+><Phi+| = I/2.
        let mut bell = StateVector::zeros(4);
        bell[0] = C64::new(FRAC_1_SQRT_2, 0.0);
        bell[3] = C64::new(FRAC_1_SQRT_2, 0.0);
        let b = single_qubit_bloch(&bell, 1).unwrap();
        assert!(b.iter().all(|c| c.abs() < 1e-15));

        // |1> on qubit 2 of 2: z = -1.
        let mut one = StateVector::zeros(4);
        one[1] = ONE;
        assert_eq!(single_qubit_bloch(&one, 2).unwrap(), [0.0, 0.0, -1.0]);
        assert_eq!(single_qubit_bloch(&one, 1).unwrap(), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn bloch_of_product_state_has_unit_norm() {
        let alpha = C64::new(0.6, 0.0);
        let beta = C64::new(0.0, 0.8);
        let single = StateVector::from_vec(vec![alpha, beta]);
        let mut state = StateVector::from_vec(vec![ONE]);
        for _ in 0..5 {
            state = state.kronecker(&single);
        }
        for n in 1..=5 {
            let b = single_qubit_bloch(&state, n).unwrap();
            let norm = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
            assert!((norm - 1.0).abs() < 1e-10);
            // <sigma_y> = 2 Im(conj(alpha) beta) = 0.96
            assert!((b[1] - 0.96).abs() < 1e-12);
        }
    }

    #[test]
    fn metrics_of_identical_gates_vanish() {
        let u = random_unitary(8, &mut rng(2));
        let m = gate_error_metrics(&u, &u).unwrap();
        assert_eq!(m.hs_norm, 0.0);
        assert_eq!(m.max_elem, 0.0);
        assert!(m.op_norm < 1e-7);
    }

    #[test]
    fn metrics_of_identity_versus_x() {
        let m = gate_error_metrics(&identity(2), &sigma_x()).unwrap();
        assert!((m.hs_norm - 2.0).abs() < 1e-14);
        assert!((m.op_norm - 2.0).abs() < 1e-12);
        assert!((m.max_elem - 1.0).abs() < 1e-14);
    }

    #[test]
    fn hs_norm_matches_fidelity_identity() {
        let mut r = rng(9);
        for n in [2usize, 8, 32] {
            for _ in 0..10 {
                let w = random_unitary(n, &mut r);
                let u = random_unitary(n, &mut r);
                let f = trace_adjoint_product(&w, &u).re / n as f64;
                let m = gate_error_metrics(&w, &u).unwrap();
                let lhs = m.hs_norm * m.hs_norm;
                assert!((lhs - 2.0 * n as f64 * (1.0 - f)).abs() < 1e-9);
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn bloch_norm_bounded_for_normalized_states(
            re in proptest::collection::vec(-1.0f64..1.0, 16),
            im in proptest::collection::vec(-1.0f64..1.0, 16),
            qubit in 1usize..=4,
        ) {
            let mut s = StateVector::from_iterator(16, re.iter().zip(&im).map(|(a, b)| C64::new(*a, *b)));
            let norm = s.norm();
            proptest::prop_assume!(norm > 1e-3);
            s /= C64::new(norm, 0.0);
            let b = single_qubit_bloch(&s, qubit).unwrap();
            let len = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
            proptest::prop_assert!(len <= 1.0 + 1e-10);
        }
    }
}
