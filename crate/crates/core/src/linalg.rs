//! Dense complex linear algebra shared by every other module.
//!
//! Matrices are `nalgebra` dense matrices over [`C64`]. All comparisons go
//! through a single [`Tolerance`] so that a configured tolerance applies
//! uniformly, from eigen-solvers up to the top-level deciders.
//!
//! Tensor products follow the Kronecker convention
//! `(A⊗B)[i·rows_B + k, j·cols_B + l] = A[i,j]·B[k,l]`, so the basis vector
//! `|i⟩|j⟩` of `C^a ⊗ C^b` sits at index `i·b + j`.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::error::{Error, Result};

pub use num_complex::Complex64 as C64;

pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Absolute-plus-relative comparison rule:
/// `x ≈ y` iff `|x − y| ≤ absolute + relative·max(‖x‖, ‖y‖)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub absolute: f64,
    pub relative: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { absolute: 1e-10, relative: 1e-9 }
    }
}

impl Tolerance {
    pub const fn new(absolute: f64, relative: f64) -> Self {
        Self { absolute, relative }
    }

    /// Largest residual accepted against a quantity of magnitude `scale`.
    pub fn bound(&self, scale: f64) -> f64 {
        self.absolute + self.relative * scale.abs()
    }

    pub fn accepts(&self, residual: f64, scale: f64) -> bool {
        residual <= self.bound(scale)
    }

    pub fn scalars_close(&self, x: C64, y: C64) -> bool {
        self.accepts((x - y).norm(), x.norm().max(y.norm()))
    }

    /// Frobenius-norm comparison.
    pub fn matrices_close(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> bool {
        a.shape() == b.shape() && self.accepts((a - b).norm(), a.norm().max(b.norm()))
    }
}

/// Builds a matrix from row-major entries, rejecting bad lengths and
/// non-finite values.
pub fn matrix_from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<ComplexMatrix> {
    if rows == 0 || cols == 0 || entries.len() != rows * cols {
        return Err(Error::BadShape { rows, cols, found: entries.len() });
    }
    for (idx, z) in entries.iter().enumerate() {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite { row: idx / cols, col: idx % cols });
        }
    }
    Ok(ComplexMatrix::from_row_slice(rows, cols, entries))
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)))
}

pub fn basis_vector(dim: usize, index: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(dim);
    v[index] = C64::new(1.0, 0.0);
    v
}

/// `|u⟩⟨v|`
pub fn outer(u: &ComplexVector, v: &ComplexVector) -> ComplexMatrix {
    u * v.adjoint()
}

/// Orthogonal projector onto the span of the (orthonormal) columns.
pub fn projector(columns: &ComplexMatrix) -> ComplexMatrix {
    columns * columns.adjoint()
}

pub fn columns_matrix(vectors: &[ComplexVector]) -> ComplexMatrix {
    assert!(!vectors.is_empty(), "at least one column required");
    ComplexMatrix::from_columns(vectors)
}

pub fn columns_of(m: &ComplexMatrix) -> Vec<ComplexVector> {
    m.column_iter().map(|c| c.into_owned()).collect()
}

/// Kronecker product `A ⊗ B`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn tensor_vec(a: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    a.kronecker(b)
}

/// Weyl operator `X^i Z^j` on `C^d`, where `X|k⟩ = |k+1⟩` and
/// `Z|k⟩ = ω^k|k⟩` with `ω = e^{2πi/d}`.
pub fn weyl(d: usize, i: usize, j: usize) -> ComplexMatrix {
    let omega = std::f64::consts::TAU / d as f64;
    ComplexMatrix::from_fn(d, d, |r, k| {
        if r == (k + i) % d {
            C64::from_polar(1.0, omega * ((j * k) % d) as f64)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Hilbert–Schmidt inner product `Tr(A†B)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Column-major vectorization.
pub fn vectorize(a: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_column_slice(a.as_slice())
}

pub fn unvectorize(v: &ComplexVector, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(rows, cols, v.as_slice())
}

pub fn hermitian_residual(a: &ComplexMatrix) -> f64 {
    (a - a.adjoint()).norm()
}

pub fn normality_residual(a: &ComplexMatrix) -> f64 {
    (a * a.adjoint() - a.adjoint() * a).norm()
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// `‖V†V − I‖_F` for a matrix of column vectors.
pub fn orthonormality_deviation(columns: &ComplexMatrix) -> f64 {
    let n = columns.ncols();
    (columns.adjoint() * columns - ComplexMatrix::identity(n, n)).norm()
}

/// Rotates `v` so that its first non-negligible entry is real and positive.
pub fn fix_phase(v: &ComplexVector) -> ComplexVector {
    let cutoff = 1e-8 * v.norm();
    match v.iter().find(|z| z.norm() > cutoff) {
        Some(z) => v * (z.conj() / z.norm()),
        None => v.clone(),
    }
}

fn lexicographic(a: &ComplexVector, b: &ComplexVector) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let ord = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Descending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&x| C64::new(x, 0.0)),
        ));
        &self.vectors * d * self.vectors.adjoint()
    }
}

/// Spectral decomposition of a Hermitian matrix.
///
/// Eigenvalues come back in descending order. Eigenvectors are phase-fixed
/// (first non-negligible entry real positive) and ties in the eigenvalue are
/// broken by the lexicographic order of the phase-fixed vectors, so the
/// output is deterministic.
pub fn eig_hermitian(a: &ComplexMatrix, tol: Tolerance) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eig_hermitian needs a square matrix, got {}×{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let residual = hermitian_residual(a);
    if !tol.accepts(residual, a.norm()) {
        return Err(Error::NotHermitian { residual });
    }
    let sym = (a + a.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut pairs: Vec<(f64, ComplexVector)> = eig
        .eigenvalues
        .iter()
        .zip(eig.eigenvectors.column_iter())
        .map(|(&l, v)| (l, fix_phase(&v.into_owned())))
        .collect();
    let scale = pairs.iter().fold(0.0_f64, |m, (l, _)| m.max(l.abs()));
    let tie = tol.bound(scale);
    pairs.sort_by(|(la, _), (lb, _)| lb.total_cmp(la));
    // Tie groups are runs of consecutive values within `tie`; each run is
    // reordered by eigenvector.
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && pairs[end - 1].0 - pairs[end].0 <= tie {
            end += 1;
        }
        pairs[start..end].sort_by(|(_, va), (_, vb)| lexicographic(va, vb));
        start = end;
    }
    let values = pairs.iter().map(|(l, _)| *l).collect();
    let vectors = ComplexMatrix::from_columns(&pairs.into_iter().map(|(_, v)| v).collect::<Vec<_>>());
    Ok(HermitianEigen { values, vectors })
}

/// Thin singular value decomposition `A = U Σ V†`, singular values descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

pub fn svd(a: &ComplexMatrix) -> Svd {
    let dec = SVD::new(a.clone(), true, true);
    Svd {
        u: dec.u.expect("requested U"),
        singular_values: dec.singular_values.iter().copied().collect(),
        v: dec.v_t.expect("requested V").adjoint(),
    }
}

/// Number of singular values above `tol.bound(σ_max)`.
pub fn rank(a: &ComplexMatrix, tol: Tolerance) -> usize {
    if a.is_empty() {
        return 0;
    }
    let s = svd(a).singular_values;
    let cutoff = tol.bound(s[0]);
    s.iter().filter(|&&x| x > cutoff).count()
}

/// Orthonormal basis (as columns) of `{x : ‖Lx‖ ≤ tol·‖L‖}`.
pub fn null_space(l: &ComplexMatrix, tol: Tolerance) -> ComplexMatrix {
    let n = l.ncols();
    if l.nrows() == 0 {
        return ComplexMatrix::identity(n, n);
    }
    // Pad to at least square so the SVD yields a full right factor.
    let padded = if l.nrows() < n {
        let mut p = ComplexMatrix::zeros(n, n);
        p.rows_mut(0, l.nrows()).copy_from(l);
        p
    } else {
        l.clone()
    };
    let dec = svd(&padded);
    let smax = dec.singular_values.first().copied().unwrap_or(0.0);
    let cutoff = tol.bound(smax);
    let kernel: Vec<ComplexVector> = dec
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .map(|(k, _)| dec.v.column(k).into_owned())
        .collect();
    if kernel.is_empty() {
        ComplexMatrix::zeros(n, 0)
    } else {
        ComplexMatrix::from_columns(&kernel)
    }
}

/// Modified Gram–Schmidt with one re-orthogonalization pass. Vectors whose
/// residual falls below `tol.bound(‖v‖)` are dropped.
pub fn gram_schmidt(vectors: &[ComplexVector], tol: Tolerance) -> Vec<ComplexVector> {
    let mut basis: Vec<ComplexVector> = Vec::new();
    for v in vectors {
        if let Some(u) = orthogonal_residual(&basis, v, tol) {
            basis.push(u);
        }
    }
    basis
}

/// Normalized component of `v` orthogonal to an orthonormal `basis`, or
/// `None` when `v` lies in its span within tolerance.
pub(crate) fn orthogonal_residual(
    basis: &[ComplexVector],
    v: &ComplexVector,
    tol: Tolerance,
) -> Option<ComplexVector> {
    let norm = v.norm();
    if norm == 0.0 {
        return None;
    }
    let mut w = v.clone();
    for _ in 0..2 {
        for b in basis {
            let coeff = b.dotc(&w);
            w.axpy(-coeff, b, C64::new(1.0, 0.0));
        }
    }
    let r = w.norm();
    if tol.accepts(r, norm) {
        None
    } else {
        Some(w.unscale(r))
    }
}

/// Hilbert–Schmidt orthonormal basis of `{X : XA = AX for all A in ops}`,
/// computed as the kernel of the stacked maps `X ↦ XA − AX`.
pub fn commutant(ops: &[ComplexMatrix], tol: Tolerance) -> Vec<ComplexMatrix> {
    let Some(first) = ops.first() else {
        return Vec::new();
    };
    let n = first.nrows();
    let id = ComplexMatrix::identity(n, n);
    let mut stacked = ComplexMatrix::zeros(ops.len() * n * n, n * n);
    for (k, a) in ops.iter().enumerate() {
        // vec(XA) = (Aᵀ ⊗ I) vec X and vec(AX) = (I ⊗ A) vec X for column-major vec.
        let block = a.transpose().kronecker(&id) - id.kronecker(a);
        stacked.view_mut((k * n * n, 0), (n * n, n * n)).copy_from(&block);
    }
    let kernel = null_space(&stacked, tol);
    kernel
        .column_iter()
        .map(|col| unvectorize(&col.into_owned(), n, n))
        .collect()
}

/// Nearest unitary (or co-isometry / isometry for rectangular input) in
/// Frobenius norm: `U V†` from `A = U Σ V†`.
pub fn polar_unitary(a: &ComplexMatrix) -> ComplexMatrix {
    let dec = svd(a);
    &dec.u * dec.v.adjoint()
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Uniformly random unit vector.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexVector {
    let v = ComplexVector::from_fn(dim, |_, _| gaussian(rng));
    let n = v.norm();
    v.unscale(n)
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase correction
/// on the diagonal of R.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = ginibre(rng, dim, dim);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = ginibre(rng, dim, dim);
    (&g + g.adjoint()).scale(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> ComplexMatrix {
        real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }
    fn pauli_z() -> ComplexMatrix {
        real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    #[test]
    fn tensor_examples() {
        let i2 = ComplexMatrix::identity(2, 2);
        assert_eq!(tensor(&i2, &i2), ComplexMatrix::identity(4, 4));
        let p0 = real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let expected = real_matrix(
            4,
            4,
            &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
        );
        assert_eq!(tensor(&p0, &i2), expected);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = ComplexVector::from_vec(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]);
        let xx = tensor(&pauli_x(), &pauli_x());
        assert!((&xx * &bell - &bell).norm() < 1e-15);
    }

    #[test]
    fn tensor_index_convention() {
        let mut rng = seeded_rng(1);
        let a = ginibre(&mut rng, 2, 3);
        let b = ginibre(&mut rng, 3, 2);
        let t = tensor(&a, &b);
        for i in 0..2 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..2 {
                        assert_eq!(t[(i * 3 + k, j * 2 + l)], a[(i, j)] * b[(k, l)]);
                    }
                }
            }
        }
    }

    #[test]
    fn eig_diagonal_and_pauli_x() {
        let tol = Tolerance::default();
        let e = eig_hermitian(&pauli_z(), tol).unwrap();
        assert_eq!(e.values, vec![1.0, -1.0]);
        assert!((e.vectors.column(0) - basis_vector(2, 0)).norm() < 1e-14);
        assert!((e.vectors.column(1) - basis_vector(2, 1)).norm() < 1e-14);

        let e = eig_hermitian(&pauli_x(), tol).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] + 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = ComplexVector::from_vec(vec![c(s, 0.0), c(s, 0.0)]);
        let minus = ComplexVector::from_vec(vec![c(s, 0.0), c(-s, 0.0)]);
        assert!((e.vectors.column(0) - plus).norm() < 1e-12);
        assert!((e.vectors.column(1) - minus).norm() < 1e-12);
    }

    #[test]
    fn eig_of_qutrit_kernel_element() {
        let m = real_matrix(3, 3, &[0., 0., 1., 0., 0., 0., 1., 0., 0.]);
        let e = eig_hermitian(&m, Tolerance::default()).unwrap();
        for (got, want) in e.values.iter().zip([1.0, 0.0, -1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let a = real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            eig_hermitian(&a, Tolerance::default()),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn eig_degenerate_order_is_deterministic() {
        let id = ComplexMatrix::identity(3, 3);
        let e = eig_hermitian(&id, Tolerance::default()).unwrap();
        assert!((e.reconstruct() - &id).norm() < 1e-12);
        assert!(orthonormality_deviation(&e.vectors) < 1e-12);
        let again = eig_hermitian(&id, Tolerance::default()).unwrap();
        assert_eq!(e.vectors, again.vectors);
    }

    #[test]
    fn svd_examples() {
        assert_eq!(svd(&ComplexMatrix::identity(2, 2)).singular_values, vec![1.0, 1.0]);
        let d = real_matrix(2, 2, &[3.0, 0.0, 0.0, 0.0]);
        assert_eq!(svd(&d).singular_values, vec![3.0, 0.0]);
        let ones = real_matrix(2, 2, &[1.0; 4]);
        let s = svd(&ones).singular_values;
        // Brute force: ones = 2·|+⟩⟨+|, so σ = (2, 0).
        assert!((s[0] - 2.0).abs() < 1e-14 && s[1].abs() < 1e-14);
    }

    #[test]
    fn svd_reconstructs() {
        let mut rng = seeded_rng(7);
        for (r, cc) in [(3, 5), (5, 3), (4, 4)] {
            let a = ginibre(&mut rng, r, cc);
            let d = svd(&a);
            let sigma = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
                d.singular_values.len(),
                d.singular_values.iter().map(|&x| c(x, 0.0)),
            ));
            assert!((&d.u * sigma * d.v.adjoint() - &a).norm() < 1e-12);
            assert!(d.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn null_space_examples() {
        let tol = Tolerance::default();
        assert_eq!(null_space(&ComplexMatrix::identity(3, 3), tol).ncols(), 0);
        let d = real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let k = null_space(&d, tol);
        assert_eq!(k.ncols(), 1);
        assert!((k[(1, 0)].norm() - 1.0).abs() < 1e-14);
        // Wide system: a single row in C^3 leaves a 2-dim kernel.
        let row = real_matrix(1, 3, &[1.0, 1.0, 1.0]);
        let k = null_space(&row, tol);
        assert_eq!(k.ncols(), 2);
        assert!((&row * &k).norm() < 1e-12);
    }

    #[test]
    fn commutant_examples() {
        let tol = Tolerance::default();
        assert_eq!(commutant(&[ComplexMatrix::identity(2, 2)], tol).len(), 4);
        // Brute force: XA = AX and ZA = AZ over the 4 unknown entries force A ∝ I.
        let comm = commutant(&[pauli_x(), pauli_z()], tol);
        assert_eq!(comm.len(), 1);
        let a = &comm[0];
        assert!((a[(0, 1)]).norm() < 1e-12 && (a[(0, 0)] - a[(1, 1)]).norm() < 1e-12);
    }

    #[test]
    fn rank_of_projector() {
        let phi = ComplexVector::from_element(3, c(1.0 / 3f64.sqrt(), 0.0));
        assert_eq!(rank(&outer(&phi, &phi), Tolerance::default()), 1);
    }

    #[test]
    fn gram_schmidt_drops_dependent_vectors() {
        let v = vec![
            ComplexVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]),
            ComplexVector::from_vec(vec![c(2.0, 0.0), c(2.0, 0.0)]),
            ComplexVector::from_vec(vec![c(0.0, 1.0), c(0.0, 0.0)]),
        ];
        let b = gram_schmidt(&v, Tolerance::default());
        assert_eq!(b.len(), 2);
        assert!(orthonormality_deviation(&columns_matrix(&b)) < 1e-14);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = seeded_rng(3);
        let u = haar_unitary(&mut rng, 5);
        assert!(orthonormality_deviation(&u) < 1e-12);
    }

    #[test]
    fn row_major_construction_checks() {
        assert!(matches!(
            matrix_from_row_major(2, 2, &[c(1.0, 0.0); 3]),
            Err(Error::BadShape { .. })
        ));
        let mut e = vec![c(0.0, 0.0); 4];
        e[3] = c(f64::NAN, 0.0);
        assert_eq!(matrix_from_row_major(2, 2, &e), Err(Error::NonFinite { row: 1, col: 1 }));
        let m = matrix_from_row_major(1, 2, &[c(1.0, 0.0), c(0.0, 2.0)]).unwrap();
        assert_eq!(m[(0, 1)], c(0.0, 2.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn hermitian_reconstruction(seed in any::<u64>(), n in 1usize..7) {
                let mut rng = seeded_rng(seed);
                let a = random_hermitian(&mut rng, n);
                let tol = Tolerance::default();
                let e = eig_hermitian(&a, tol).unwrap();
                prop_assert!((e.reconstruct() - &a).norm() <= 10.0 * tol.bound(a.norm()) );
                prop_assert!(orthonormality_deviation(&e.vectors) < 1e-10);
                prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
            }

            #[test]
            fn rank_nullity(seed in any::<u64>(), r in 1usize..6, cc in 1usize..6, k in 0usize..6) {
                let mut rng = seeded_rng(seed);
                let k = k.min(r).min(cc);
                // Rank-k product of Gaussian factors.
                let a = if k == 0 {
                    ComplexMatrix::zeros(r, cc)
                } else {
                    ginibre(&mut rng, r, k) * ginibre(&mut rng, k, cc)
                };
                let tol = Tolerance::default();
                let ns = null_space(&a, tol);
                prop_assert_eq!(rank(&a, tol) + ns.ncols(), cc);
                for col in ns.column_iter() {
                    prop_assert!((&a * col).norm() <= tol.bound(a.norm()).max(1e-12));
                }
            }

            #[test]
            fn kronecker_mixed_product(seed in any::<u64>()) {
                let mut rng = seeded_rng(seed);
                let a = ginibre(&mut rng, 2, 3);
                let b = ginibre(&mut rng, 3, 2);
                let cm = ginibre(&mut rng, 3, 2);
                let d = ginibre(&mut rng, 2, 2);
                let lhs = tensor(&a, &b) * tensor(&cm, &d);
                let rhs = tensor(&(&a * &cm), &(&b * &d));
                prop_assert!(Tolerance::default().matrices_close(&lhs, &rhs));
                let e = ginibre(&mut rng, 2, 2);
                let left = tensor(&tensor(&a, &b), &e);
                let right = tensor(&a, &tensor(&b, &e));
                prop_assert!((left - right).camax() <= 1e-15 * a.camax() * b.camax() * e.camax() * 4.0);
            }
        }
    }
}
