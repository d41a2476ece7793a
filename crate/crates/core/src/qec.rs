//! Error-correction conditions: Knill–Laflamme for subspaces, individual
//! correctability of state sets, commuting compressions and block structure.

use rand::Rng;

use crate::bipartite::StateSet;
use crate::channels::{self, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector, Tolerance, C64};

/// Subspace with an orthonormal basis and its projector `P_C`.
#[derive(Clone, Debug)]
pub struct CodeSpace {
    basis: Vec<ComplexVector>,
    basis_matrix: ComplexMatrix,
    projector: ComplexMatrix,
}

impl CodeSpace {
    /// The vectors must already be orthonormal.
    pub fn new(basis: Vec<ComplexVector>, tol: Tolerance) -> Result<Self> {
        let n = basis.first().map(|v| v.len()).ok_or_else(|| Error::InvalidParams("empty code".into()))?;
        if basis.iter().any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch("code vectors have different lengths".into()));
        }
        let basis_matrix = linalg::columns_matrix(&basis);
        let deviation = linalg::orthonormality_deviation(&basis_matrix);
        if !tol.accepts(deviation, basis.len() as f64) {
            return Err(Error::NotOrthonormal { deviation });
        }
        let projector = linalg::projector(&basis_matrix);
        Ok(Self { basis, basis_matrix, projector })
    }

    /// Orthonormalizes a spanning set first.
    pub fn span(vectors: &[ComplexVector], tol: Tolerance) -> Result<Self> {
        Self::new(linalg::gram_schmidt(vectors, tol), tol)
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis_matrix.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexVector] {
        &self.basis
    }

    /// Isometry whose columns are the basis vectors.
    pub fn basis_matrix(&self) -> &ComplexMatrix {
        &self.basis_matrix
    }

    pub fn projector(&self) -> &ComplexMatrix {
        &self.projector
    }

    /// `C†XC`, the compression of `X` written in the code basis.
    pub fn compress(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.basis_matrix.adjoint() * x * &self.basis_matrix
    }
}

fn check_noise(code: &CodeSpace, noise: &KrausChannel) -> Result<()> {
    if noise.dim_in() != code.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "noise acts on C^{}, code lives in C^{}",
            noise.dim_in(),
            code.ambient_dim()
        )));
    }
    Ok(())
}

/// Compressions `Q_ij = C†A_i†A_jC` indexed `[i][j]`.
fn compressions(code: &CodeSpace, noise: &KrausChannel) -> Vec<Vec<ComplexMatrix>> {
    let images: Vec<ComplexMatrix> = noise.kraus().iter().map(|a| a * code.basis_matrix()).collect();
    images
        .iter()
        .map(|ai| images.iter().map(|aj| ai.adjoint() * aj).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct KlReport {
    pub correctable: bool,
    /// `λ_ij = Tr(P A_i†A_j P) / Tr P`.
    pub lambda: ComplexMatrix,
    /// `max_ij ‖P A_i†A_j P − λ_ij P‖_F`.
    pub residual: f64,
}

pub fn kl_check(code: &CodeSpace, noise: &KrausChannel, tol: Tolerance) -> Result<KlReport> {
    check_noise(code, noise)?;
    let q = compressions(code, noise);
    let d = code.dim();
    let k = q.len();
    let id = ComplexMatrix::identity(d, d);
    let mut lambda = ComplexMatrix::zeros(k, k);
    let mut residual: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            let l = q[i][j].trace() / C64::new(d as f64, 0.0);
            lambda[(i, j)] = l;
            residual = residual.max((&q[i][j] - &id * l).norm());
            scale = scale.max(q[i][j].norm());
        }
    }
    Ok(KlReport { correctable: tol.accepts(residual, scale), lambda, residual })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairReport {
    pub passed: bool,
    /// Largest offending value and the pair where it occurs.
    pub worst: f64,
    pub worst_pair: Option<(usize, usize)>,
}

/// Pairwise output overlaps `Tr(E(ρ_k)E(ρ_l))` for `k ≠ l`; the set is
/// individually correctable iff all vanish.
pub fn correctable_set_check(states: &[ComplexMatrix], noise: &KrausChannel, tol: Tolerance) -> Result<PairReport> {
    let outputs = states.iter().map(|rho| noise.apply(rho)).collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0;
    let mut worst_pair = None;
    for k in 0..outputs.len() {
        for l in k + 1..outputs.len() {
            let overlap = linalg::hs_inner(&outputs[k], &outputs[l]).norm();
            if worst_pair.is_none() || overlap > worst {
                worst = overlap;
                worst_pair = Some((k, l));
            }
        }
    }
    Ok(PairReport { passed: tol.accepts(worst, 1.0), worst, worst_pair })
}

/// Whether the compressions `P A_j†A_i P` commute pairwise.
pub fn commuting_family_check(code: &CodeSpace, noise: &KrausChannel, tol: Tolerance) -> Result<PairReport> {
    check_noise(code, noise)?;
    let family: Vec<ComplexMatrix> = compressions(code, noise).into_iter().flatten().collect();
    Ok(commutation_report(&family, tol))
}

pub(crate) fn commutation_report(family: &[ComplexMatrix], tol: Tolerance) -> PairReport {
    let mut worst = 0.0;
    let mut worst_pair = None;
    let mut passed = true;
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            let r = linalg::commutator(&family[i], &family[j]).norm();
            if !tol.accepts(r, family[i].norm() * family[j].norm()) {
                passed = false;
            }
            if r > worst {
                worst = r;
                worst_pair = Some((i, j));
            }
        }
    }
    PairReport { passed, worst, worst_pair }
}

/// Basis of the code in which every compression `P A_j†A_i P` is diagonal,
/// making the basis individually correctable. Requires the compressions to
/// be normal and commuting.
pub fn correctable_basis(code: &CodeSpace, noise: &KrausChannel, tol: Tolerance) -> Result<Vec<ComplexVector>> {
    check_noise(code, noise)?;
    let family: Vec<ComplexMatrix> = compressions(code, noise).into_iter().flatten().collect();
    let w = simultaneous_eigenbasis(&family, tol)?;
    Ok(linalg::columns_of(&(code.basis_matrix() * w)))
}

/// Whether every `P A_k†A_l P` is block diagonal for `C = ⊕ C_i`.
///
/// Each block is given as an isometry whose columns span `C_i`.
pub fn block_structure_check(blocks: &[ComplexMatrix], noise: &KrausChannel, tol: Tolerance) -> Result<PairReport> {
    let n = noise.dim_in();
    if let Some(b) = blocks.iter().find(|b| b.nrows() != n) {
        return Err(Error::DimensionMismatch(format!("block in C^{} for noise on C^{n}", b.nrows())));
    }
    for i in 0..blocks.len() {
        for j in i..blocks.len() {
            let g = blocks[i].adjoint() * &blocks[j];
            let target = if i == j { ComplexMatrix::identity(g.nrows(), g.ncols()) } else { ComplexMatrix::zeros(g.nrows(), g.ncols()) };
            let deviation = (g - target).norm();
            if !tol.accepts(deviation, 1.0) {
                return Err(Error::NotOrthonormal { deviation });
            }
        }
    }
    let images: Vec<Vec<ComplexMatrix>> =
        blocks.iter().map(|c| noise.kraus().iter().map(|a| a * c).collect()).collect();
    let mut worst = 0.0;
    let mut worst_pair = None;
    let mut passed = true;
    for i in 0..blocks.len() {
        for j in 0..blocks.len() {
            if i == j {
                continue;
            }
            for ak in &images[i] {
                for al in &images[j] {
                    let cross = ak.adjoint() * al;
                    let r = cross.norm();
                    if !tol.accepts(r, ak.norm() * al.norm()) {
                        passed = false;
                    }
                    if r > worst {
                        worst = r;
                        worst_pair = Some((i, j));
                    }
                }
            }
        }
    }
    Ok(PairReport { passed, worst, worst_pair })
}

/// Orthonormal basis diagonalizing every member of a commuting family of
/// normal matrices.
///
/// A random real combination of the Hermitian parts splits the common
/// eigenspaces with probability one; eigenvalue clusters that stay merged
/// are refined member by member. The result is checked before returning and
/// the combination is redrawn (up to eight times) if the check fails.
pub fn simultaneous_eigenbasis(family: &[ComplexMatrix], tol: Tolerance) -> Result<ComplexMatrix> {
    let n = family
        .first()
        .ok_or_else(|| Error::InvalidParams("empty family".into()))?
        .nrows();
    if family.iter().any(|a| a.shape() != (n, n)) {
        return Err(Error::DimensionMismatch("family members must share a square shape".into()));
    }
    for (index, a) in family.iter().enumerate() {
        let residual = linalg::normality_residual(a);
        if !tol.accepts(residual, a.norm_squared()) {
            return Err(Error::NotNormal { index, residual });
        }
    }
    let report = commutation_report(family, tol);
    if !report.passed {
        return Err(Error::NotCommuting { residual: report.worst });
    }

    let i_unit = C64::new(0.0, 1.0);
    let mut parts: Vec<ComplexMatrix> = Vec::with_capacity(2 * family.len());
    for a in family {
        let herm = (a + a.adjoint()).scale(0.5);
        let anti = (a - a.adjoint()) * (-i_unit * 0.5);
        for p in [herm, anti] {
            let norm = p.norm();
            if norm > tol.bound(a.norm()) {
                parts.push(p.unscale(norm));
            }
        }
    }
    if parts.is_empty() {
        return Ok(ComplexMatrix::identity(n, n));
    }

    let mut rng = linalg::seeded_rng(0x6a01_d1a6);
    for _ in 0..8 {
        let h = parts
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, p| acc + p.scale(rng.random_range(-1.0..1.0)));
        let w = refine(&parts, &h, tol)?;
        let ok = family.iter().all(|a| {
            let mut d = w.adjoint() * a * &w;
            d.fill_diagonal(C64::new(0.0, 0.0));
            tol.accepts(d.norm(), a.norm())
        });
        if ok {
            return Ok(w);
        }
    }
    Err(Error::NoConvergence("joint diagonalization did not verify after 8 random combinations".into()))
}

/// Splits `C^n` by the eigenvalue clusters of `h`, then refines clusters of
/// dimension above one by each Hermitian part.
fn refine(parts: &[ComplexMatrix], h: &ComplexMatrix, tol: Tolerance) -> Result<ComplexMatrix> {
    let n = h.nrows();
    let mut done = Vec::new();
    for piece in split(&ComplexMatrix::identity(n, n), h, tol)? {
        refine_into(piece, parts, tol, &mut done)?;
    }
    let cols: Vec<ComplexVector> = done
        .iter()
        .flat_map(linalg::columns_of)
        .map(|v| linalg::fix_phase(&v))
        .collect();
    Ok(linalg::columns_matrix(&cols))
}

fn refine_into(sub: ComplexMatrix, parts: &[ComplexMatrix], tol: Tolerance, done: &mut Vec<ComplexMatrix>) -> Result<()> {
    if sub.ncols() > 1 {
        for p in parts {
            let pieces = split(&sub, p, tol)?;
            if pieces.len() > 1 {
                for piece in pieces {
                    refine_into(piece, parts, tol, done)?;
                }
                return Ok(());
            }
        }
    }
    done.push(sub);
    Ok(())
}

/// Eigenvectors of `h` compressed to `span(sub)`, grouped into clusters of
/// nearly equal eigenvalue. Each returned matrix has orthonormal columns in
/// the ambient space.
fn split(sub: &ComplexMatrix, h: &ComplexMatrix, tol: Tolerance) -> Result<Vec<ComplexMatrix>> {
    let compressed = sub.adjoint() * h * sub;
    let compressed = (&compressed + compressed.adjoint()).scale(0.5);
    let eig = linalg::eig_hermitian(&compressed, tol)?;
    let gap = (1e-7 * h.norm()).max(10.0 * tol.bound(h.norm()));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (idx, &value) in eig.values.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if eig.values[*g.last().unwrap()] - value <= gap => g.push(idx),
            _ => groups.push(vec![idx]),
        }
    }
    Ok(groups
        .into_iter()
        .map(|g| {
            let cols: Vec<ComplexVector> = g.iter().map(|&i| sub * eig.vectors.column(i)).collect();
            linalg::columns_matrix(&cols)
        })
        .collect())
}

/// Code, noise and recovery obtained from a one-way protocol.
#[derive(Clone, Debug)]
pub struct LoccCode {
    pub code: CodeSpace,
    /// Alice's measurement channel extended by the identity on Bob.
    pub noise: KrausChannel,
    pub recovery: KrausChannel,
    pub report: KlReport,
}

/// Turns an Alice basis that distinguishes `s` into a correctable code: the
/// span of `s` under Alice's measurement noise, with its recovery channel and
/// Knill–Laflamme data.
pub fn code_from_locc(s: &StateSet, alice_basis: &[ComplexVector], tol: Tolerance) -> Result<LoccCode> {
    let recovery = channels::build_recovery(s, alice_basis, tol)?;
    let (_, b) = s.dims();
    let noise = channels::alice_measurement_channel(alice_basis, b, tol)?;
    let code = CodeSpace::new(s.vectors(), tol)?;
    let report = kl_check(&code, &noise, tol)?;
    Ok(LoccCode { code, noise, recovery, report })
}
