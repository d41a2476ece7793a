//! Bipartite pure states and their operator form.
//!
//! A state `|φ⟩ ∈ C^a ⊗ C^b` is stored together with the `b×a` operator `B`
//! satisfying `|φ⟩ = (I ⊗ B)|Φ⟩`, where `|Φ⟩ = a^{-1/2} Σ_i |ii⟩` is the
//! canonical maximally entangled state on `C^a ⊗ C^a`. Entrywise,
//! `φ[i·b + j] = B[j, i] / √a`.

use crate::error::{Error, Result};
use crate::linalg::{
    self, columns_matrix, orthonormality_deviation, ComplexMatrix, ComplexVector, Tolerance, C64,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState {
    dim_a: usize,
    dim_b: usize,
    vector: ComplexVector,
    op_form: ComplexMatrix,
}

impl BipartiteState {
    /// `a^{-1/2} Σ_i |ii⟩`, whose operator form is `I_a`.
    pub fn max_entangled(a: usize) -> Self {
        assert!(a >= 1, "dimension must be positive");
        Self::from_operator_unchecked(ComplexMatrix::identity(a, a), a, a)
    }

    /// State `(I ⊗ B)|Φ⟩` for a `b×a` operator with `Tr(B†B) = a`.
    pub fn from_operator(op: &ComplexMatrix, dim_a: usize, dim_b: usize, tol: Tolerance) -> Result<Self> {
        if op.nrows() != dim_b || op.ncols() != dim_a {
            return Err(Error::DimensionMismatch(format!(
                "operator form must be {dim_b}×{dim_a}, got {}×{}",
                op.nrows(),
                op.ncols()
            )));
        }
        let trace = op.norm_squared();
        if !tol.accepts((trace - dim_a as f64).abs(), dim_a as f64) {
            return Err(Error::NotNormalized { trace, expected: dim_a as f64 });
        }
        Ok(Self::from_operator_unchecked(op.clone(), dim_a, dim_b))
    }

    fn from_operator_unchecked(op: ComplexMatrix, dim_a: usize, dim_b: usize) -> Self {
        let scale = 1.0 / (dim_a as f64).sqrt();
        let vector = ComplexVector::from_fn(dim_a * dim_b, |idx, _| {
            op[(idx % dim_b, idx / dim_b)] * scale
        });
        Self { dim_a, dim_b, vector, op_form: op }
    }

    /// Unit vector in `C^a ⊗ C^b`.
    pub fn from_vector(vector: &ComplexVector, dim_a: usize, dim_b: usize, tol: Tolerance) -> Result<Self> {
        if vector.len() != dim_a * dim_b {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} does not live in C^{dim_a} ⊗ C^{dim_b}",
                vector.len()
            )));
        }
        let norm2 = vector.norm_squared();
        if !tol.accepts((norm2 - 1.0).abs(), 1.0) {
            return Err(Error::NotNormalized { trace: norm2 * dim_a as f64, expected: dim_a as f64 });
        }
        let scale = (dim_a as f64).sqrt();
        let op_form = ComplexMatrix::from_fn(dim_b, dim_a, |j, i| vector[i * dim_b + j] * scale);
        Ok(Self { dim_a, dim_b, vector: vector.clone(), op_form })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn vector(&self) -> &ComplexVector {
        &self.vector
    }

    pub fn to_operator(&self) -> &ComplexMatrix {
        &self.op_form
    }

    pub fn density(&self) -> ComplexMatrix {
        linalg::outer(&self.vector, &self.vector)
    }

    /// `B†B = I_a`, equivalently the reduced state on A is `I/a`.
    pub fn is_maximally_entangled(&self, tol: Tolerance) -> bool {
        let id = ComplexMatrix::identity(self.dim_a, self.dim_a);
        tol.matrices_close(&(self.op_form.adjoint() * &self.op_form), &id)
    }

    pub fn schmidt(&self) -> Schmidt {
        let scaled = self.op_form.unscale((self.dim_a as f64).sqrt());
        let dec = linalg::svd(&scaled);
        let k = dec.singular_values.len();
        Schmidt {
            coefficients: dec.singular_values,
            a_vectors: (0..k).map(|c| dec.v.column(c).map(|z| z.conj())).collect(),
            b_vectors: (0..k).map(|c| dec.u.column(c).into_owned()).collect(),
        }
    }

    pub fn schmidt_rank(&self, tol: Tolerance) -> usize {
        let s = self.schmidt();
        s.coefficients.iter().filter(|&&x| x > tol.bound(1.0)).count()
    }
}

/// `|φ⟩ = Σ_k c_k |u_k⟩|v_k⟩` with `c_k` descending.
#[derive(Clone, Debug)]
pub struct Schmidt {
    pub coefficients: Vec<f64>,
    pub a_vectors: Vec<ComplexVector>,
    pub b_vectors: Vec<ComplexVector>,
}

impl Schmidt {
    pub fn recompose(&self) -> ComplexVector {
        self.coefficients
            .iter()
            .zip(self.a_vectors.iter().zip(&self.b_vectors))
            .map(|(&c, (u, v))| linalg::tensor_vec(u, v) * C64::new(c, 0.0))
            .fold(
                ComplexVector::zeros(self.a_vectors[0].len() * self.b_vectors[0].len()),
                |acc, x| acc + x,
            )
    }
}

fn check_square(rho: &ComplexMatrix, (a, b): (usize, usize)) -> Result<()> {
    if rho.nrows() != a * b || rho.ncols() != a * b {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}×{}, dims ({a}, {b}) need {}×{}",
            rho.nrows(),
            rho.ncols(),
            a * b,
            a * b
        )));
    }
    Ok(())
}

/// Traces out `traced`, returning the operator on the other factor.
pub fn partial_trace(rho: &ComplexMatrix, dims: (usize, usize), traced: Subsystem) -> Result<ComplexMatrix> {
    check_square(rho, dims)?;
    let (a, b) = dims;
    Ok(match traced {
        Subsystem::B => ComplexMatrix::from_fn(a, a, |i, k| (0..b).map(|j| rho[(i * b + j, k * b + j)]).sum()),
        Subsystem::A => ComplexMatrix::from_fn(b, b, |j, l| (0..a).map(|i| rho[(i * b + j, i * b + l)]).sum()),
    })
}

/// Transposes the indices of `which` factor.
pub fn partial_transpose(rho: &ComplexMatrix, dims: (usize, usize), which: Subsystem) -> Result<ComplexMatrix> {
    check_square(rho, dims)?;
    let (_, b) = dims;
    Ok(ComplexMatrix::from_fn(rho.nrows(), rho.ncols(), |r, c| {
        let (i, j) = (r / b, r % b);
        let (k, l) = (c / b, c % b);
        match which {
            Subsystem::B => rho[(i * b + l, k * b + j)],
            Subsystem::A => rho[(k * b + j, i * b + l)],
        }
    }))
}

/// Nonempty family of states on a common `C^a ⊗ C^b`.
#[derive(Clone, Debug)]
pub struct StateSet {
    states: Vec<BipartiteState>,
    orthonormal: bool,
}

impl StateSet {
    pub fn new(states: Vec<BipartiteState>, tol: Tolerance) -> Result<Self> {
        let Some(first) = states.first() else {
            return Err(Error::InvalidParams("state set must be nonempty".into()));
        };
        let dims = (first.dim_a, first.dim_b);
        if let Some(bad) = states.iter().find(|s| (s.dim_a, s.dim_b) != dims) {
            return Err(Error::DimensionMismatch(format!(
                "state on ({}, {}) in a set on {dims:?}",
                bad.dim_a, bad.dim_b
            )));
        }
        let gram = Self::gram_of(&states);
        let deviation = (gram - ComplexMatrix::identity(states.len(), states.len())).norm();
        let orthonormal = tol.accepts(deviation, states.len() as f64);
        Ok(Self { states, orthonormal })
    }

    /// States `(I ⊗ B_i)|Φ⟩` for each operator.
    pub fn from_operators(ops: &[ComplexMatrix], tol: Tolerance) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::InvalidParams("no operators".into()))?;
        let (b, a) = first.shape();
        let states = ops
            .iter()
            .map(|op| BipartiteState::from_operator(op, a, b, tol))
            .collect::<Result<Vec<_>>>()?;
        Self::new(states, tol)
    }

    fn gram_of(states: &[BipartiteState]) -> ComplexMatrix {
        let n = states.len();
        ComplexMatrix::from_fn(n, n, |i, j| states[i].vector.dotc(&states[j].vector))
    }

    pub fn gram(&self) -> ComplexMatrix {
        Self::gram_of(&self.states)
    }

    pub fn states(&self) -> &[BipartiteState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn is_orthonormal(&self) -> bool {
        self.orthonormal
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.states[0].dim_a, self.states[0].dim_b)
    }

    pub fn operators(&self) -> Vec<ComplexMatrix> {
        self.states.iter().map(|s| s.op_form.clone()).collect()
    }

    pub fn vectors(&self) -> Vec<ComplexVector> {
        self.states.iter().map(|s| s.vector.clone()).collect()
    }

    /// Columns are the state vectors.
    pub fn basis_matrix(&self) -> ComplexMatrix {
        columns_matrix(&self.vectors())
    }
}

/// `B_k = U D_k V` for every member of a family.
#[derive(Clone, Debug)]
pub struct SimultaneousSchmidt {
    pub u: ComplexMatrix,
    pub v: ComplexMatrix,
    pub diagonals: Vec<ComplexVector>,
}

impl SimultaneousSchmidt {
    pub fn reconstruct(&self, k: usize) -> ComplexMatrix {
        &self.u * ComplexMatrix::from_diagonal(&self.diagonals[k]) * &self.v
    }
}

/// Looks for unitaries `U`, `V` and diagonals `D_k` with `B_k = U D_k V`.
///
/// Such a pair forces `{B_i†B_j}` to be a commuting normal family
/// `V†{D_i* D_j}V`, so `V†` is read off a common eigenbasis of that family and
/// `U` column by column from `B_k V†`. Returns `None` when the family does
/// not commute or any reconstruction residual exceeds `tol`.
pub fn simultaneous_schmidt_test(ops: &[ComplexMatrix], tol: Tolerance) -> Option<SimultaneousSchmidt> {
    let first = ops.first()?;
    let n = first.nrows();
    if !first.is_square() || ops.iter().any(|b| b.shape() != (n, n)) {
        return None;
    }
    let mut family = Vec::with_capacity(ops.len() * ops.len());
    for bi in ops {
        for bj in ops {
            family.push(bi.adjoint() * bj);
        }
    }
    let w = crate::qec::simultaneous_eigenbasis(&family, tol).ok()?;
    let images: Vec<ComplexMatrix> = ops.iter().map(|b| b * &w).collect();
    let scale = ops.iter().map(|b| b.norm()).fold(0.0, f64::max);

    let mut u_cols: Vec<Option<ComplexVector>> = Vec::with_capacity(n);
    for c in 0..n {
        // Scan all members for a usable column; zero columns are filled later.
        let best = images
            .iter()
            .map(|img| img.column(c).into_owned())
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
            .expect("nonempty family");
        let norm = best.norm();
        u_cols.push((norm > tol.bound(scale)).then(|| best.unscale(norm)));
    }
    let mut chosen: Vec<ComplexVector> = u_cols.iter().flatten().cloned().collect();
    let mut next_standard = 0;
    let mut columns = Vec::with_capacity(n);
    for col in u_cols {
        let col = match col {
            Some(v) => v,
            None => loop {
                // Extend by the first standard vector outside the current span.
                if next_standard == n {
                    return None;
                }
                let e = linalg::basis_vector(n, next_standard);
                next_standard += 1;
                if let Some(r) = linalg::orthogonal_residual(&chosen, &e, Tolerance::new(1e-6, 0.0)) {
                    chosen.push(r.clone());
                    break r;
                }
            },
        };
        columns.push(col);
    }
    let u = columns_matrix(&columns);
    if !tol.accepts(orthonormality_deviation(&u), n as f64) {
        return None;
    }
    let v = w.adjoint();
    let diagonals: Vec<ComplexVector> = images
        .iter()
        .map(|img| ComplexVector::from_fn(n, |c, _| u.column(c).dotc(&img.column(c))))
        .collect();
    let result = SimultaneousSchmidt { u, v, diagonals };
    for (k, b) in ops.iter().enumerate() {
        if !tol.accepts((b - result.reconstruct(k)).norm(), b.norm()) {
            return None;
        }
    }
    Some(result)
}
