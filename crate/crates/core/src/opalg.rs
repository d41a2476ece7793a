//! Operator systems and finite-dimensional *-algebras.
//!
//! Spans are stored with a Hilbert–Schmidt orthonormal basis. Every
//! *-algebra `A ⊆ M_N` is unitarily equivalent to `⊕_k M_{m_k} ⊗ I_{n_k}`
//! (plus a zero block off its support); [`wedderburn_decomposition`]
//! recovers the block parameters together with an explicit unitary, and
//! the separating-vector machinery works in those canonical coordinates.
//!
//! In canonical coordinates block `k` occupies `m_k·n_k` consecutive basis
//! vectors, ordered so that index `i·n_k + s` carries `|i⟩ ⊗ |s⟩`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector, Tolerance, C64};

/// Complex subspace of `M_N` with a Hilbert–Schmidt orthonormal basis.
#[derive(Clone, Debug)]
pub struct OperatorSpan {
    ambient_dim: usize,
    basis: Vec<ComplexMatrix>,
    /// `vec(E_p)` as columns; orthonormal because the basis is.
    vecs: ComplexMatrix,
    contains_identity: bool,
    star_closed: bool,
}

/// Incremental Gram–Schmidt over `vec(X)`.
pub(crate) struct SpanBuilder {
    n: usize,
    vecs: Vec<ComplexVector>,
    tol: Tolerance,
}

impl SpanBuilder {
    pub(crate) fn new(n: usize, tol: Tolerance) -> Self {
        Self { n, vecs: Vec::new(), tol }
    }

    /// Adds `x` if it leaves the current span; returns whether it did.
    pub(crate) fn push(&mut self, x: &ComplexMatrix) -> Result<bool> {
        if x.shape() != (self.n, self.n) {
            return Err(Error::DimensionMismatch(format!(
                "{}×{} operator in a span of {}×{} matrices",
                x.nrows(),
                x.ncols(),
                self.n,
                self.n
            )));
        }
        if self.is_full() {
            return Ok(false);
        }
        match linalg::orthogonal_residual(&self.vecs, &linalg::vectorize(x), self.tol) {
            Some(v) => {
                self.vecs.push(v);
                Ok(true)
            }
            None => Ok(false),
        }
    }

    pub(crate) fn is_full(&self) -> bool {
        self.vecs.len() == self.n * self.n
    }

    pub(crate) fn finish(self) -> OperatorSpan {
        let n = self.n;
        let vecs = if self.vecs.is_empty() {
            ComplexMatrix::zeros(n * n, 0)
        } else {
            linalg::columns_matrix(&self.vecs)
        };
        let basis = self.vecs.iter().map(|v| linalg::unvectorize(v, n, n)).collect();
        let mut span = OperatorSpan { ambient_dim: n, basis, vecs, contains_identity: false, star_closed: false };
        let id = ComplexMatrix::identity(n, n);
        span.contains_identity = self.tol.accepts(span.residual(&id), (n as f64).sqrt());
        span.star_closed = span.basis.iter().all(|e| self.tol.accepts(span.residual(&e.adjoint()), 1.0));
        span
    }
}

impl OperatorSpan {
    /// Span of `ops`, all `n×n`.
    pub fn from_generators(n: usize, ops: &[ComplexMatrix], tol: Tolerance) -> Result<Self> {
        let mut b = SpanBuilder::new(n, tol);
        for op in ops {
            b.push(op)?;
        }
        Ok(b.finish())
    }

    /// Span of operators that are already Hermitian and HS-orthonormal.
    pub(crate) fn from_orthonormal_hermitian(n: usize, basis: Vec<ComplexMatrix>, tol: Tolerance) -> Self {
        let cols: Vec<ComplexVector> = basis.iter().map(linalg::vectorize).collect();
        let vecs = if cols.is_empty() { ComplexMatrix::zeros(n * n, 0) } else { linalg::columns_matrix(&cols) };
        let mut span = OperatorSpan { ambient_dim: n, basis, vecs, contains_identity: false, star_closed: true };
        let id = ComplexMatrix::identity(n, n);
        span.contains_identity = tol.accepts(span.residual(&id), (n as f64).sqrt());
        span
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn contains_identity(&self) -> bool {
        self.contains_identity
    }

    pub fn is_star_closed(&self) -> bool {
        self.star_closed
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim * self.ambient_dim
    }

    /// Frobenius distance from `x` to the span.
    pub fn residual(&self, x: &ComplexMatrix) -> f64 {
        let v = linalg::vectorize(x);
        if self.dim() == 0 {
            return v.norm();
        }
        let coeffs = self.vecs.adjoint() * &v;
        (v - &self.vecs * coeffs).norm()
    }

    pub fn contains(&self, x: &ComplexMatrix, tol: Tolerance) -> bool {
        self.residual(x) <= tol.bound(x.norm())
    }

    /// `Σ_p c_p E_p`.
    pub fn element(&self, coeffs: &ComplexVector) -> ComplexMatrix {
        linalg::unvectorize(&(&self.vecs * coeffs), self.ambient_dim, self.ambient_dim)
    }

    fn random_element(&self, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let coeffs = ComplexVector::from_fn(self.dim(), |_, _| linalg::gaussian(rng));
        self.element(&coeffs)
    }
}

/// `span{B_i†B_j : i ≠ j} + C·I`.
pub fn operator_system_s0(ops: &[ComplexMatrix], tol: Tolerance) -> Result<OperatorSpan> {
    let n = common_input_dim(ops)?;
    let mut b = SpanBuilder::new(n, tol);
    b.push(&ComplexMatrix::identity(n, n))?;
    'outer: for (i, bi) in ops.iter().enumerate() {
        let bi_adj = bi.adjoint();
        for (j, bj) in ops.iter().enumerate() {
            if b.is_full() {
                break 'outer;
            }
            if i != j {
                b.push(&(&bi_adj * bj))?;
            }
        }
    }
    Ok(b.finish())
}

/// `span{B_i†B_j}` over all pairs, diagonal included.
pub fn x_subspace(ops: &[ComplexMatrix], tol: Tolerance) -> Result<OperatorSpan> {
    let n = common_input_dim(ops)?;
    let mut b = SpanBuilder::new(n, tol);
    'outer: for bi in ops {
        let bi_adj = bi.adjoint();
        for bj in ops {
            if b.is_full() {
                break 'outer;
            }
            b.push(&(&bi_adj * bj))?;
        }
    }
    Ok(b.finish())
}

fn common_input_dim(ops: &[ComplexMatrix]) -> Result<usize> {
    let first = ops.first().ok_or_else(|| Error::InvalidParams("no operators".into()))?;
    if let Some(bad) = ops.iter().find(|b| b.shape() != first.shape()) {
        return Err(Error::DimensionMismatch(format!(
            "operators of shapes {}×{} and {}×{}",
            first.nrows(),
            first.ncols(),
            bad.nrows(),
            bad.ncols()
        )));
    }
    Ok(first.ncols())
}

/// Largest distance from a product of two unit-norm span elements to the
/// span.
///
/// Spans of dimension up to 32 are checked on every pair of basis elements.
/// Larger ones use
/// sixteen pairs of random elements: the residual of `xy` is a polynomial in
/// the coefficients of `x` and `y`, so it vanishes at random points only if
/// it vanishes identically.
pub fn closure_residual(s: &OperatorSpan) -> f64 {
    if s.is_full() || s.dim() == 0 {
        return 0.0;
    }
    if s.dim() <= 32 {
        // All products E_p E_q for a fixed p, projected in one multiplication.
        let n = s.ambient_dim();
        let mut worst: f64 = 0.0;
        for p in s.basis() {
            let mut prods = ComplexMatrix::zeros(n * n, s.dim());
            for (col, q) in s.basis().iter().enumerate() {
                prods.set_column(col, &linalg::vectorize(&(p * q)));
            }
            let coeffs = s.vecs.adjoint() * &prods;
            let rest = prods - &s.vecs * coeffs;
            worst = rest.column_iter().map(|c| c.norm()).fold(worst, f64::max);
        }
        return worst;
    }
    let mut rng = linalg::seeded_rng(0xc105_ed);
    let mut worst: f64 = 0.0;
    for _ in 0..16 {
        let x = s.random_element(&mut rng);
        let y = s.random_element(&mut rng);
        let prod = (&x * &y).unscale(x.norm() * y.norm());
        worst = worst.max(s.residual(&prod));
    }
    worst
}

pub fn is_multiplicatively_closed(s: &OperatorSpan, tol: Tolerance) -> bool {
    tol.accepts(closure_residual(s), 1.0)
}

/// Smallest *-algebra containing `s`, by repeated multiplication.
pub fn generated_algebra(s: &OperatorSpan, max_rounds: usize, tol: Tolerance) -> Result<OperatorSpan> {
    let n = s.ambient_dim();
    let mut b = SpanBuilder::new(n, tol);
    for e in s.basis() {
        b.push(e)?;
        b.push(&e.adjoint())?;
    }
    for _ in 0..max_rounds {
        let current: Vec<ComplexMatrix> = b.vecs.iter().map(|v| linalg::unvectorize(v, n, n)).collect();
        let mut grew = false;
        for p in &current {
            for q in &current {
                grew |= b.push(&(p * q))?;
            }
        }
        if !grew || b.is_full() {
            return Ok(b.finish());
        }
    }
    Err(Error::NoConvergence(format!("algebra still growing after {max_rounds} rounds")))
}

/// Block parameters `(m_k, n_k)` of `⊕ M_{m_k} ⊗ I_{n_k}`, sorted descending.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgebraStructure {
    blocks: Vec<(usize, usize)>,
}

impl AlgebraStructure {
    pub fn new(mut blocks: Vec<(usize, usize)>) -> Result<Self> {
        if blocks.is_empty() || blocks.iter().any(|&(m, n)| m == 0 || n == 0) {
            return Err(Error::InvalidParams("blocks must be a nonempty list of positive pairs".into()));
        }
        blocks.sort_unstable_by(|x, y| y.cmp(x));
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    /// `Σ m_k²`.
    pub fn algebra_dim(&self) -> usize {
        self.blocks.iter().map(|&(m, _)| m * m).sum()
    }

    /// `Σ m_k·n_k`.
    pub fn support_dim(&self) -> usize {
        self.blocks.iter().map(|&(m, n)| m * n).sum()
    }

    fn offsets(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .scan(0, |acc, &(m, n)| {
                let start = *acc;
                *acc += m * n;
                Some(start)
            })
            .collect()
    }
}

impl std::fmt::Display for AlgebraStructure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|(m, n)| format!("({m},{n})")).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Structure plus a unitary `W` with `W† A W = ⊕ (a_k ⊗ I_{n_k}) ⊕ 0` for
/// every `A` in the algebra.
#[derive(Clone, Debug)]
pub struct WedderburnDecomposition {
    pub structure: AlgebraStructure,
    pub unitary: ComplexMatrix,
    /// Largest deviation of a basis element from canonical form after conjugation.
    pub residual: f64,
}

pub fn wedderburn_structure(alg: &OperatorSpan, tol: Tolerance) -> Result<AlgebraStructure> {
    Ok(wedderburn_decomposition(alg, tol)?.structure)
}

/// Numerical Wedderburn decomposition of a *-algebra.
///
/// The center is the part of the algebra commuting with two random elements
/// (extended until it commutes with the whole basis). A generic Hermitian
/// central element has one eigenvalue per minimal central projection `P_k`,
/// and `P_k A P_k ≅ M_{m_k} ⊗ I_{n_k}` fixes `m_k` by its dimension. Matrix
/// units inside each block come from the eigenspaces of a generic Hermitian
/// element and the partial isometries between them.
pub fn wedderburn_decomposition(alg: &OperatorSpan, tol: Tolerance) -> Result<WedderburnDecomposition> {
    if !alg.is_star_closed() {
        let residual = alg.basis().iter().map(|e| alg.residual(&e.adjoint())).fold(0.0, f64::max);
        return Err(Error::NotClosed { residual });
    }
    let residual = closure_residual(alg);
    if !tol.accepts(residual, 1.0) {
        return Err(Error::NotClosed { residual });
    }
    decompose_closed(alg, tol)
}

/// Decomposition of a span already known to be a *-algebra.
pub(crate) fn decompose_closed(alg: &OperatorSpan, tol: Tolerance) -> Result<WedderburnDecomposition> {
    let n = alg.ambient_dim();
    if alg.dim() == 0 {
        return Err(Error::InvalidParams("the zero algebra has no blocks".into()));
    }
    if alg.is_full() {
        return Ok(WedderburnDecomposition {
            structure: AlgebraStructure::new(vec![(n, 1)])?,
            unitary: ComplexMatrix::identity(n, n),
            residual: 0.0,
        });
    }
    let mut rng = linalg::seeded_rng(0x3edd_e7b0);
    let support = support_basis(alg, tol)?;
    let center = center_basis(alg, &mut rng, tol)?;

    for _ in 0..8 {
        let Some(projections) = central_projections(&center, &support, &mut rng, tol)? else {
            continue;
        };
        let mut blocks = Vec::with_capacity(projections.len());
        for q in &projections {
            let compressed: Vec<ComplexMatrix> = alg.basis().iter().map(|e| q.adjoint() * e * q).collect();
            let dim = OperatorSpan::from_generators(q.ncols(), &compressed, tol)?.dim();
            let m = integer_root(dim as f64)?;
            if m == 0 || q.ncols() % m != 0 {
                return Err(Error::NonIntegerStructure { value: q.ncols() as f64 / m.max(1) as f64 });
            }
            blocks.push((m, q.ncols() / m, q.clone(), compressed));
        }
        blocks.sort_by(|x, y| (y.0, y.1).cmp(&(x.0, x.1)));
        let structure = AlgebraStructure::new(blocks.iter().map(|b| (b.0, b.1)).collect())?;

        let mut columns: Vec<ComplexVector> = Vec::with_capacity(n);
        let mut ok = true;
        for (m, mult, q, compressed) in &blocks {
            match block_matrix_units(*m, *mult, compressed, &mut rng, tol) {
                Some(local) => columns.extend(linalg::columns_of(&(q * local))),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let complement = orthogonal_complement(&columns, n);
        columns.extend(complement);
        let unitary = linalg::columns_matrix(&columns);
        let residual = canonical_residual(alg, &structure, &unitary);
        let loose = Tolerance::new(tol.absolute * 100.0, tol.relative * 100.0);
        if loose.accepts(residual, 1.0) {
            return Ok(WedderburnDecomposition { structure, unitary, residual });
        }
    }
    Err(Error::NoConvergence("Wedderburn decomposition did not verify".into()))
}

fn integer_root(dim: f64) -> Result<usize> {
    let m = dim.sqrt();
    let rounded = m.round();
    if (m - rounded).abs() > 1e-6 {
        return Err(Error::NonIntegerStructure { value: m });
    }
    Ok(rounded as usize)
}

/// Orthonormal basis of the common range of the algebra, the range of
/// `Σ_p E_p E_p†`.
fn support_basis(alg: &OperatorSpan, tol: Tolerance) -> Result<ComplexMatrix> {
    let n = alg.ambient_dim();
    let gram = alg.basis().iter().fold(ComplexMatrix::zeros(n, n), |acc, e| acc + e * e.adjoint());
    let gram = (&gram + gram.adjoint()).scale(0.5);
    let eig = linalg::eig_hermitian(&gram, tol)?;
    let cutoff = 1e-8 * eig.values[0].max(0.0) + tol.absolute;
    let r = eig.values.iter().filter(|&&l| l > cutoff).count();
    Ok(eig.vectors.columns(0, r).into_owned())
}

/// HS-orthonormal basis of the center `A ∩ A'`.
fn center_basis(alg: &OperatorSpan, rng: &mut ChaCha8Rng, tol: Tolerance) -> Result<Vec<ComplexMatrix>> {
    let dim = alg.dim();
    let n = alg.ambient_dim();
    let mut probes: Vec<ComplexMatrix> = vec![alg.random_element(rng), alg.random_element(rng)];
    for _ in 0..6 {
        // Coefficient vectors c with [Σ c_p E_p, X] = 0 for every probe X.
        let mut stacked = ComplexMatrix::zeros(probes.len() * n * n, dim);
        for (r, x) in probes.iter().enumerate() {
            for (p, e) in alg.basis().iter().enumerate() {
                let v = linalg::vectorize(&linalg::commutator(e, x).unscale(x.norm()));
                stacked.view_mut((r * n * n, p), (n * n, 1)).copy_from(&v);
            }
        }
        let kernel = linalg::null_space(&stacked, tol);
        let center: Vec<ComplexMatrix> = linalg::columns_of(&kernel).iter().map(|c| alg.element(c)).collect();
        let commutes = center.iter().all(|z| {
            alg.basis()
                .iter()
                .all(|e| tol.accepts(linalg::commutator(z, e).norm(), z.norm() * e.norm()))
        });
        if commutes && !center.is_empty() {
            return Ok(center);
        }
        probes.push(alg.random_element(rng));
    }
    Err(Error::NoConvergence("center of the algebra did not stabilize".into()))
}

/// Eigenspaces (inside the support) of a generic Hermitian central element.
/// Returns `None` when the eigenvalue clusters do not match the center's
/// dimension, so the caller can redraw.
fn central_projections(
    center: &[ComplexMatrix],
    support: &ComplexMatrix,
    rng: &mut ChaCha8Rng,
    tol: Tolerance,
) -> Result<Option<Vec<ComplexMatrix>>> {
    let r = support.ncols();
    let mut h = ComplexMatrix::zeros(r, r);
    for z in center {
        let herm = (z + z.adjoint()).scale(0.5);
        let anti = (z - z.adjoint()) * C64::new(0.0, -0.5);
        h += support.adjoint() * (herm.scale(rng.random_range(-1.0..1.0)) + anti.scale(rng.random_range(-1.0..1.0))) * support;
    }
    let h = (&h + h.adjoint()).scale(0.5);
    let eig = linalg::eig_hermitian(&h, tol)?;
    let gap = 1e-6 * h.norm().max(1e-300);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in eig.values.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if eig.values[*g.last().unwrap()] - v <= gap => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    if groups.len() != center.len() {
        return Ok(None);
    }
    Ok(Some(
        groups
            .into_iter()
            .map(|g| {
                let cols: Vec<ComplexVector> = g.iter().map(|&i| support * eig.vectors.column(i)).collect();
                linalg::columns_matrix(&cols)
            })
            .collect(),
    ))
}

/// Basis of `C^{m·n}` in which the compressed block algebra reads `a ⊗ I_n`.
fn block_matrix_units(
    m: usize,
    mult: usize,
    compressed: &[ComplexMatrix],
    rng: &mut ChaCha8Rng,
    tol: Tolerance,
) -> Option<ComplexMatrix> {
    let r = m * mult;
    if m == 1 {
        return Some(ComplexMatrix::identity(r, r));
    }
    let random_element = |rng: &mut ChaCha8Rng| {
        compressed
            .iter()
            .fold(ComplexMatrix::zeros(r, r), |acc, c| acc + c * linalg::gaussian(rng))
    };
    for _ in 0..8 {
        let g = random_element(rng);
        let g = (&g + g.adjoint()).scale(0.5);
        let eig = linalg::eig_hermitian(&g, tol).ok()?;
        let gap = 1e-6 * g.norm();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (i, &v) in eig.values.iter().enumerate() {
            match groups.last_mut() {
                Some(grp) if eig.values[*grp.last().unwrap()] - v <= gap => grp.push(i),
                _ => groups.push(vec![i]),
            }
        }
        if groups.len() != m || groups.iter().any(|grp| grp.len() != mult) {
            continue;
        }
        let spaces: Vec<ComplexMatrix> = groups
            .iter()
            .map(|grp| {
                let cols: Vec<ComplexVector> = grp.iter().map(|&i| eig.vectors.column(i).into_owned()).collect();
                linalg::columns_matrix(&cols)
            })
            .collect();
        let x = random_element(rng);
        let mut columns: Vec<ComplexVector> = linalg::columns_of(&spaces[0]);
        let mut ok = true;
        for y in &spaces[1..] {
            // Y_1† X Y_j is x_{1j} times a unitary; align Y_j with Y_1 through it.
            let link = spaces[0].adjoint() * &x * y;
            let scale = link.norm() / (mult as f64).sqrt();
            let u = linalg::polar_unitary(&link);
            if scale < 1e-6 * x.norm() || (&link - u.scale(scale)).norm() > 1e-6 * link.norm() {
                ok = false;
                break;
            }
            columns.extend(linalg::columns_of(&(y * u.adjoint())));
        }
        if ok {
            return Some(linalg::columns_matrix(&columns));
        }
    }
    None
}

fn orthogonal_complement(columns: &[ComplexVector], n: usize) -> Vec<ComplexVector> {
    let mut basis = columns.to_vec();
    let mut extra = Vec::new();
    for i in 0..n {
        if basis.len() == n {
            break;
        }
        if let Some(v) = linalg::orthogonal_residual(&basis, &linalg::basis_vector(n, i), Tolerance::new(1e-6, 0.0)) {
            basis.push(v.clone());
            extra.push(v);
        }
    }
    extra
}

/// Largest deviation of `W†E_pW` from `⊕ (a_k ⊗ I_{n_k}) ⊕ 0` over the basis.
fn canonical_residual(alg: &OperatorSpan, st: &AlgebraStructure, w: &ComplexMatrix) -> f64 {
    alg.basis()
        .iter()
        .map(|e| {
            let t = w.adjoint() * e * w;
            let canon = canonical_projection(&t, st);
            (t - canon).norm()
        })
        .fold(0.0, f64::max)
}

/// Closest element of the canonical algebra to `t` (block-wise partial
/// trace followed by re-embedding).
fn canonical_projection(t: &ComplexMatrix, st: &AlgebraStructure) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(t.nrows(), t.ncols());
    for (&(m, n), off) in st.blocks().iter().zip(st.offsets()) {
        for i in 0..m {
            for j in 0..m {
                let avg: C64 = (0..n).map(|s| t[(off + i * n + s, off + j * n + s)]).sum::<C64>() / n as f64;
                for s in 0..n {
                    out[(off + i * n + s, off + j * n + s)] = avg;
                }
            }
        }
    }
    out
}

/// HS-orthonormal basis `{e_ij ⊗ I_{n_k} / √n_k}` of `⊕ M_{m_k} ⊗ I_{n_k}`.
pub fn canonical_algebra(st: &AlgebraStructure, tol: Tolerance) -> OperatorSpan {
    let dim = st.support_dim();
    let mut b = SpanBuilder::new(dim, tol);
    for (&(m, n), off) in st.blocks().iter().zip(st.offsets()) {
        for i in 0..m {
            for j in 0..m {
                let mut e = ComplexMatrix::zeros(dim, dim);
                for s in 0..n {
                    e[(off + i * n + s, off + j * n + s)] = C64::new(1.0, 0.0);
                }
                b.push(&e).expect("shapes agree by construction");
            }
        }
    }
    b.finish()
}

/// `n_k ≥ m_k` for every block.
pub fn has_separating_vector(st: &AlgebraStructure) -> bool {
    st.blocks().iter().all(|&(m, n)| n >= m)
}

/// Random search for `ψ` with `A ↦ Aψ` injective on the algebra, verified by
/// the rank of `[E_1ψ, …, E_Dψ]`.
pub fn find_separating_vector(alg: &OperatorSpan, attempts: usize, seed: u64, tol: Tolerance) -> Option<ComplexVector> {
    let n = alg.ambient_dim();
    if alg.dim() > n || alg.dim() == 0 {
        return None;
    }
    let mut rng = linalg::seeded_rng(seed);
    for _ in 0..attempts {
        let psi = linalg::random_state(&mut rng, n);
        if is_separating(alg, &psi, tol) {
            return Some(psi);
        }
    }
    None
}

pub fn is_separating(alg: &OperatorSpan, psi: &ComplexVector, tol: Tolerance) -> bool {
    let cols: Vec<ComplexVector> = alg.basis().iter().map(|e| e * psi).collect();
    let images = linalg::columns_matrix(&cols);
    linalg::rank(&images, tol) == alg.dim()
}

/// Unitary `U` such that `U A U†` has constant diagonal `Tr(A)/D` for every
/// `A` in the canonical algebra of a square-block structure.
pub fn constant_diagonal_unitary(st: &AlgebraStructure, tol: Tolerance) -> Result<ComplexMatrix> {
    if st.blocks().iter().any(|&(m, n)| m != n) {
        return Err(Error::NotSquareBlocks);
    }
    Ok(constant_diagonal_basis(st, 0, tol)?.adjoint())
}

/// Orthonormal basis `{w_x}` of `C^D` with `⟨w_x|A|w_x⟩ = Tr(A)/D` for every
/// `A` in the canonical algebra, returned as the columns of a unitary.
///
/// Blocks with `m_k > n_k` admit no such basis. All-commutative structures
/// use the Fourier basis; structures whose blocks share `m_k·n_k` combine
/// shifted-phase maximally entangled vectors across blocks with a discrete
/// Fourier transform; anything else falls back to alternating projections
/// from seeded random starts.
pub(crate) fn constant_diagonal_basis(st: &AlgebraStructure, seed: u64, tol: Tolerance) -> Result<ComplexMatrix> {
    if !has_separating_vector(st) {
        return Err(Error::NoSeparatingVector);
    }
    let d = st.support_dim();
    let sizes: Vec<usize> = st.blocks().iter().map(|&(m, n)| m * n).collect();
    let basis = if st.blocks().iter().all(|&(m, _)| m == 1) {
        fourier(d)
    } else if sizes.iter().all(|&s| s == sizes[0]) {
        let k = sizes.len();
        let dk = sizes[0];
        let f = fourier(k);
        let mut cols = Vec::with_capacity(d);
        for j in 0..k {
            for s in 0..dk {
                let mut v = ComplexVector::zeros(d);
                for (blk, (&(m, n), off)) in st.blocks().iter().zip(st.offsets()).enumerate() {
                    let u = shifted_phase_vector(m, n, s);
                    v.rows_mut(off, dk).axpy(f[(blk, j)], &u, C64::new(1.0, 0.0));
                }
                cols.push(v);
            }
        }
        linalg::columns_matrix(&cols)
    } else {
        alternating_constant_diagonal(st, seed)?
    };
    let residual = constant_diagonal_residual(st, &basis);
    let loose = Tolerance::new(tol.absolute * 100.0, tol.relative * 100.0);
    if !loose.accepts(residual, 1.0) || !loose.accepts(linalg::orthonormality_deviation(&basis), d as f64) {
        return Err(Error::NoConvergence(format!("constant-diagonal basis residual {residual:.3e}")));
    }
    Ok(basis)
}

/// Columns `ω^{jk}/√d`.
fn fourier(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |j, k| {
        C64::from_polar(1.0 / (d as f64).sqrt(), 2.0 * std::f64::consts::PI * (j * k % d) as f64 / d as f64)
    })
}

/// `u_{t,b} = m^{-1/2} Σ_i ω_m^{ti} |i⟩|i + b mod n⟩` with `s = t·n + b`.
/// For `m ≤ n` these form an orthonormal basis of `C^m ⊗ C^n` whose
/// reshapings `X` satisfy `XX† = I_m / m`.
fn shifted_phase_vector(m: usize, n: usize, s: usize) -> ComplexVector {
    let (t, b) = (s / n, s % n);
    let mut v = ComplexVector::zeros(m * n);
    for i in 0..m {
        let phase = 2.0 * std::f64::consts::PI * (t * i % m) as f64 / m as f64;
        v[i * n + (i + b) % n] = C64::from_polar(1.0 / (m as f64).sqrt(), phase);
    }
    v
}

/// Block-`k` slice of `v` reshaped to `m_k × n_k`.
fn block_slice(v: &ComplexVector, off: usize, m: usize, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(m, n, |i, s| v[off + i * n + s])
}

/// Largest `‖X_k X_k† − (n_k/D) I‖_F` over columns and blocks.
fn constant_diagonal_residual(st: &AlgebraStructure, basis: &ComplexMatrix) -> f64 {
    let d = st.support_dim() as f64;
    let mut worst: f64 = 0.0;
    for col in basis.column_iter() {
        let col = col.into_owned();
        for (&(m, n), off) in st.blocks().iter().zip(st.offsets()) {
            let x = block_slice(&col, off, m, n);
            let target = ComplexMatrix::identity(m, m).scale(n as f64 / d);
            worst = worst.max((&x * x.adjoint() - target).norm());
        }
    }
    worst
}

fn alternating_constant_diagonal(st: &AlgebraStructure, seed: u64) -> Result<ComplexMatrix> {
    let d = st.support_dim();
    let offsets = st.offsets();
    let mut rng = linalg::seeded_rng(seed ^ 0xa17e_c0de);
    for _ in 0..40 {
        let mut u = linalg::haar_unitary(&mut rng, d);
        for _ in 0..4000 {
            for mut col in u.column_iter_mut() {
                for (&(m, n), &off) in st.blocks().iter().zip(&offsets) {
                    let x = ComplexMatrix::from_fn(m, n, |i, s| col[off + i * n + s]);
                    let dec = linalg::svd(&x);
                    let target = (&dec.u * dec.v.adjoint()).scale((n as f64 / d as f64).sqrt());
                    for i in 0..m {
                        for s in 0..n {
                            col[off + i * n + s] = target[(i, s)];
                        }
                    }
                }
            }
            u = linalg::polar_unitary(&u);
            if constant_diagonal_residual(st, &u) < 1e-13 {
                return Ok(u);
            }
        }
    }
    Err(Error::NoConvergence("alternating projections for a constant-diagonal basis".into()))
}
