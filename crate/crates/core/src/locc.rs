//! One-way LOCC deciders, protocol construction and verification.
//!
//! Throughout, Alice's measurement is an orthonormal basis `{η_x}` of `C^a`
//! and she projects onto `η_x`. Given outcome `x`, Bob holds the
//! unnormalized state `B_i η̄_x / √a` (entrywise conjugate in the standard
//! basis). A protocol lists, for each outcome, one vector per state that Bob
//! uses to identify it; a zero vector means that state cannot produce the
//! outcome.

use rand::Rng;

use crate::bipartite::{BipartiteState, StateSet};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector, Tolerance, C64};
use crate::opalg::{self, AlgebraStructure, OperatorSpan};
use crate::qec::{self, CodeSpace, PairReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Distinguishable,
    NotDistinguishable,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Distinguishable => "distinguishable",
            Status::NotDistinguishable => "not_distinguishable",
            Status::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Protocol {
    pub alice_basis: Vec<ComplexVector>,
    /// `bob_vectors[x][i]`: unit vector flagging state `i` after outcome `x`, or zero.
    pub bob_vectors: Vec<Vec<ComplexVector>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    Protocol { protocol: Protocol, structure: Option<AlgebraStructure> },
    /// Structure of a closed operator system with some `m_k > n_k`.
    Structure(AlgebraStructure),
    SchmidtRank(usize),
    ClosureResidual(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<Witness>,
    pub diagnostics: Vec<String>,
}

impl Verdict {
    fn inconclusive(diagnostics: Vec<String>, witness: Option<Witness>) -> Self {
        Self { status: Status::Inconclusive, witness, diagnostics }
    }

    pub fn protocol(&self) -> Option<&Protocol> {
        match &self.witness {
            Some(Witness::Protocol { protocol, .. }) => Some(protocol),
            _ => None,
        }
    }

    pub fn structure(&self) -> Option<&AlgebraStructure> {
        match &self.witness {
            Some(Witness::Protocol { structure, .. }) => structure.as_ref(),
            Some(Witness::Structure(st)) => Some(st),
            _ => None,
        }
    }
}

/// Bob's unnormalized conditional states `B_i η̄ / √a`.
fn conditional_states(ops: &[ComplexMatrix], eta: &ComplexVector) -> Vec<ComplexVector> {
    let a = eta.len() as f64;
    crate::channels::bob_conditional_states(ops, eta)
        .into_iter()
        .map(|v| v.unscale(a.sqrt()))
        .collect()
}

/// Protocol in which Bob looks for the normalized conditional state of each
/// member. It is valid exactly when those states are orthogonal.
pub fn protocol_for_alice_basis(s: &StateSet, alice_basis: &[ComplexVector]) -> Protocol {
    let ops = s.operators();
    let bob_vectors = alice_basis
        .iter()
        .map(|eta| {
            conditional_states(&ops, eta)
                .into_iter()
                .map(|v| {
                    let n = v.norm();
                    if n > 1e-12 {
                        v.unscale(n)
                    } else {
                        ComplexVector::zeros(v.len())
                    }
                })
                .collect()
        })
        .collect();
    Protocol { alice_basis: alice_basis.to_vec(), bob_vectors }
}

/// Largest failure of the protocol: conditional overlaps between distinct
/// members, Bob's misidentification weight, and the deviation of Alice's and
/// Bob's vectors from orthonormality. Zero for a perfect protocol.
pub fn verify_protocol(s: &StateSet, alice_basis: &[ComplexVector], bob_vectors: &[Vec<ComplexVector>]) -> Result<f64> {
    let (a, b) = s.dims();
    if alice_basis.len() != a || alice_basis.iter().any(|v| v.len() != a) {
        return Err(Error::DimensionMismatch(format!("Alice needs {a} vectors in C^{a}")));
    }
    if bob_vectors.len() != a || bob_vectors.iter().any(|row| row.len() != s.len() || row.iter().any(|v| v.len() != b)) {
        return Err(Error::DimensionMismatch(format!(
            "Bob needs {} vectors in C^{b} for each of {a} outcomes",
            s.len()
        )));
    }
    let ops = s.operators();
    let mut worst = linalg::orthonormality_deviation(&linalg::columns_matrix(alice_basis));
    for (eta, bob) in alice_basis.iter().zip(bob_vectors) {
        let cond = conditional_states(&ops, eta);
        for i in 0..cond.len() {
            for k in i + 1..cond.len() {
                worst = worst.max(cond[i].dotc(&cond[k]).norm());
            }
        }
        let active: Vec<&ComplexVector> = bob.iter().filter(|v| v.norm() > 0.5).collect();
        for (i, u) in active.iter().enumerate() {
            for (k, v) in active.iter().enumerate() {
                let want = if i == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                worst = worst.max((u.dotc(v) - want).norm());
            }
        }
        for (state, flag) in cond.iter().zip(bob) {
            let miss = if flag.norm() > 0.5 { state - flag * flag.dotc(state) } else { state.clone() };
            worst = worst.max(miss.norm());
        }
    }
    Ok(worst)
}

pub fn verify(s: &StateSet, p: &Protocol) -> Result<f64> {
    verify_protocol(s, &p.alice_basis, &p.bob_vectors)
}

/// Decides one-way distinguishability when `S0 = span{B_i†B_j (i≠j), I}` is
/// an algebra: distinguishable iff it has a separating vector.
pub fn oneway_algebra_test(s: &StateSet, tol: Tolerance) -> Verdict {
    match opalg::operator_system_s0(&s.operators(), tol) {
        Ok(s0) => decide_with_operator_system(s, &s0, tol),
        Err(e) => Verdict::inconclusive(vec![format!("could not form S0: {e}")], None),
    }
}

pub(crate) fn decide_with_operator_system(s: &StateSet, s0: &OperatorSpan, tol: Tolerance) -> Verdict {
    let mut log = vec![format!("S0 has dimension {} in M_{}", s0.dim(), s0.ambient_dim())];
    if !s.is_orthonormal() {
        log.push("states are not orthonormal".into());
        return Verdict::inconclusive(log, None);
    }
    let residual = opalg::closure_residual(s0);
    log.push(format!("closure residual {residual:.3e}"));
    if !tol.accepts(residual, 1.0) {
        log.push("S0 is not multiplicatively closed; the separating-vector criterion does not apply".into());
        return Verdict::inconclusive(log, Some(Witness::ClosureResidual(residual)));
    }
    let dec = match wedderburn_of_closed(s0, tol) {
        Ok(d) => d,
        Err(e) => {
            log.push(format!("structure computation failed: {e}"));
            return Verdict::inconclusive(log, None);
        }
    };
    let st = dec.structure.clone();
    log.push(format!("algebra structure {st}"));
    if !opalg::has_separating_vector(&st) {
        log.push("some block has m_k > n_k, so S0 has no separating vector".into());
        return Verdict { status: Status::NotDistinguishable, witness: Some(Witness::Structure(st)), diagnostics: log };
    }
    let basis = match opalg::constant_diagonal_basis(&st, 0, tol) {
        Ok(b) => b,
        Err(e) => {
            log.push(format!("separating vector exists but no constant-diagonal basis was built: {e}"));
            return Verdict::inconclusive(log, Some(Witness::Structure(st)));
        }
    };
    // Canonical vector w_x ↦ η_x = conj(W w_x).
    let alice: Vec<ComplexVector> = linalg::columns_of(&(&dec.unitary * basis)).iter().map(|v| v.map(|z| z.conj())).collect();
    let protocol = protocol_for_alice_basis(s, &alice);
    let overlap = match verify(s, &protocol) {
        Ok(o) => o,
        Err(e) => {
            log.push(format!("protocol check failed: {e}"));
            return Verdict::inconclusive(log, Some(Witness::Structure(st)));
        }
    };
    log.push(format!("protocol verified with max overlap {overlap:.3e}"));
    if !tol.accepts(overlap, 1.0) {
        log.push("constructed protocol did not verify".into());
        return Verdict::inconclusive(log, Some(Witness::Structure(st)));
    }
    Verdict {
        status: Status::Distinguishable,
        witness: Some(Witness::Protocol { protocol, structure: Some(st) }),
        diagnostics: log,
    }
}

fn wedderburn_of_closed(s0: &OperatorSpan, tol: Tolerance) -> Result<opalg::WedderburnDecomposition> {
    if !s0.is_star_closed() {
        return opalg::wedderburn_decomposition(s0, tol);
    }
    opalg::decompose_closed(s0, tol)
}

/// Protocol for the basis `Φ'_k = Σ_i U_ik Φ_i` of the same span, using the
/// Alice basis that already distinguishes `S`. Works when every member leaves
/// Bob the same conditional weight, as maximally entangled members do.
pub fn distinguish_any_basis(
    s: &StateSet,
    alice_basis: &[ComplexVector],
    coefficients: &ComplexMatrix,
    tol: Tolerance,
) -> Result<(StateSet, Protocol)> {
    let d = s.len();
    if coefficients.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!("coefficient matrix must be {d}×{d}")));
    }
    let deviation = linalg::orthonormality_deviation(coefficients);
    if !tol.accepts(deviation, d as f64) {
        return Err(Error::NotOrthonormal { deviation });
    }
    let ops = s.operators();
    let new_ops: Vec<ComplexMatrix> = (0..d)
        .map(|k| ops.iter().enumerate().fold(ComplexMatrix::zeros(ops[0].nrows(), ops[0].ncols()), |acc, (i, b)| acc + b * coefficients[(i, k)]))
        .collect();
    let rotated = StateSet::from_operators(&new_ops, tol)?;
    let ops = rotated.operators();
    for (x, eta) in alice_basis.iter().enumerate() {
        let cond = conditional_states(&ops, eta);
        for i in 0..d {
            for k in i + 1..d {
                let overlap = cond[i].dotc(&cond[k]).norm();
                if !tol.accepts(overlap, 1.0) {
                    return Err(Error::NotDistinguishable { outcome: x, first: i, second: k, overlap });
                }
            }
        }
    }
    let protocol = protocol_for_alice_basis(&rotated, alice_basis);
    Ok((rotated, protocol))
}

/// Linear map `Ψ(τ)_ij = Tr(τᵀ B_i†B_j) / a` on `M_a`, stored as a
/// `d²×a²` matrix acting on column-major `vec(τ)`.
#[derive(Clone, Debug)]
pub struct PsiMap {
    dim_code: usize,
    dim_alice: usize,
    matrix: ComplexMatrix,
    unital_residual: f64,
}

impl PsiMap {
    pub fn dim_code(&self) -> usize {
        self.dim_code
    }

    pub fn dim_alice(&self) -> usize {
        self.dim_alice
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `‖Ψ(I) − I‖_F`.
    pub fn unital_residual(&self) -> f64 {
        self.unital_residual
    }

    pub fn is_unital(&self, tol: Tolerance) -> bool {
        tol.accepts(self.unital_residual, (self.dim_code as f64).sqrt())
    }

    pub fn apply(&self, tau: &ComplexMatrix) -> Result<ComplexMatrix> {
        let a = self.dim_alice;
        if tau.shape() != (a, a) {
            return Err(Error::DimensionMismatch(format!("Ψ acts on {a}×{a} matrices")));
        }
        let out = &self.matrix * linalg::vectorize(tau);
        Ok(linalg::unvectorize(&out, self.dim_code, self.dim_code))
    }
}

pub fn build_psi_map(ops: &[ComplexMatrix]) -> Result<PsiMap> {
    let first = ops.first().ok_or_else(|| Error::InvalidParams("no operators".into()))?;
    if ops.iter().any(|b| b.shape() != first.shape()) {
        return Err(Error::DimensionMismatch("operators have different shapes".into()));
    }
    let a = first.ncols();
    let d = ops.len();
    let mut matrix = ComplexMatrix::zeros(d * d, a * a);
    for i in 0..d {
        for j in 0..d {
            let g = ops[i].adjoint() * &ops[j];
            for p in 0..a {
                for q in 0..a {
                    matrix[(i + j * d, p + q * a)] = g[(p, q)] / a as f64;
                }
            }
        }
    }
    let mut map = PsiMap { dim_code: d, dim_alice: a, matrix, unital_residual: 0.0 };
    let id_a = ComplexMatrix::identity(a, a);
    map.unital_residual = (map.apply(&id_a)? - ComplexMatrix::identity(d, d)).norm();
    Ok(map)
}

/// Output of the kernel-based basis search for three states on `C³ ⊗ C^n`.
#[derive(Clone, Debug)]
pub struct BasisFinding {
    /// `{ϕ_0, ϕ_1, ϕ_2}` ordered by the eigenvalues of the kernel element.
    pub alice_basis: Vec<ComplexVector>,
    /// `c^(k)` with `Φ'_k = Σ_i c^(k)_i Φ_i`.
    pub code_coefficients: Vec<ComplexVector>,
    pub kernel_element: ComplexMatrix,
    pub eigenvalues: [f64; 3],
    pub x_dim: usize,
    pub commutator: f64,
    pub states: StateSet,
    pub protocol: Protocol,
    pub overlap: f64,
}

/// Kernel `{M : Tr(MᵀY) = 0 for all Y in X}` as column-major vectors.
fn x_annihilator(x: &OperatorSpan, tol: Tolerance) -> ComplexMatrix {
    let a = x.ambient_dim();
    let mut rows = ComplexMatrix::zeros(x.dim().max(1), a * a);
    for (r, y) in x.basis().iter().enumerate() {
        rows.row_mut(r).copy_from(&linalg::vectorize(y).transpose());
    }
    linalg::null_space(&rows, tol)
}

/// Hermitian `±H` with ascending eigenvalues `λ_0 < 0 ≤ λ_1 ≤ λ_2`, scored
/// by `−λ_0 / max|λ|`.
fn split_candidate(h: &ComplexMatrix, tol: Tolerance) -> Option<(f64, ComplexMatrix)> {
    let scale = h.norm();
    if scale < 1e-8 {
        return None;
    }
    let h = (h + h.adjoint()).scale(0.5 / scale);
    let mut best: Option<(f64, ComplexMatrix)> = None;
    for sign in [1.0, -1.0] {
        let cand = h.scale(sign);
        let eig = linalg::eig_hermitian(&cand, tol).ok()?;
        let mut vals = eig.values.clone();
        vals.reverse();
        let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if vals[0] < -1e-6 * top && vals[1] >= -1e-12 * top {
            let score = -vals[0] / top;
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, cand));
            }
        }
    }
    best
}

fn choose_kernel_element(kernel: &ComplexMatrix, tol: Tolerance) -> Option<ComplexMatrix> {
    let a = 3;
    let mut best: Option<(f64, ComplexMatrix)> = None;
    let consider = |m: ComplexMatrix, best: &mut Option<(f64, ComplexMatrix)>| {
        if let Some((score, h)) = split_candidate(&m, tol) {
            if best.as_ref().is_none_or(|(s, _)| score > *s + 1e-9) {
                *best = Some((score, h));
            }
        }
    };
    let projector = kernel * kernel.adjoint();
    for p in 0..a {
        for q in 0..a {
            let e = linalg::vectorize(&linalg::outer(&linalg::basis_vector(a, p), &linalg::basis_vector(a, q)));
            consider(linalg::unvectorize(&(&projector * e), a, a), &mut best);
        }
    }
    if best.is_some() {
        return best.map(|(_, h)| h);
    }
    let hermitian_basis: Vec<ComplexMatrix> = linalg::columns_of(kernel)
        .iter()
        .flat_map(|k| {
            let m = linalg::unvectorize(k, a, a);
            [(&m + m.adjoint()).scale(0.5), (&m - m.adjoint()) * C64::new(0.0, -0.5)]
        })
        .collect();
    for h in &hermitian_basis {
        consider(h.clone(), &mut best);
    }
    let mut rng = linalg::seeded_rng(0x9e3d);
    for _ in 0..64 {
        if best.is_some() {
            break;
        }
        let m = hermitian_basis
            .iter()
            .fold(ComplexMatrix::zeros(a, a), |acc, h| acc + h.scale(rng.random_range(-1.0..1.0)));
        consider(m, &mut best);
    }
    best.map(|(_, h)| h)
}

/// Constructive search for a one-way distinguishable basis of the span of
/// three orthonormal states on `C³ ⊗ C^n`, available whenever
/// `X = span{B_i†B_j}` is a strict subspace of `M_3`.
pub fn find_distinguishable_basis_3d(ops: &[ComplexMatrix], tol: Tolerance) -> Result<BasisFinding> {
    if ops.len() != 3 {
        return Err(Error::InvalidParams(format!("expected three operators, got {}", ops.len())));
    }
    if ops[0].ncols() != 3 {
        return Err(Error::DimensionMismatch(format!("Alice's system must be C^3, got C^{}", ops[0].ncols())));
    }
    let s = StateSet::from_operators(ops, tol)?;
    if !s.is_orthonormal() {
        let deviation = (s.gram() - ComplexMatrix::identity(3, 3)).norm();
        return Err(Error::NotOrthonormal { deviation });
    }
    let x = opalg::x_subspace(ops, tol)?;
    if x.is_full() {
        return Err(Error::StrictSubspaceRequired);
    }
    let kernel = x_annihilator(&x, tol);
    let m = choose_kernel_element(&kernel, tol)
        .ok_or_else(|| Error::NoConvergence("no kernel element with eigenvalues of both signs".into()))?;
    let eig = linalg::eig_hermitian(&m, tol)?;
    // eig_hermitian sorts descending; the protocol wants λ_0 < 0 ≤ λ_1 ≤ λ_2.
    let order = [2usize, 1, 0];
    let alice: Vec<ComplexVector> = order.iter().map(|&k| eig.vectors.column(k).into_owned()).collect();
    let eigenvalues = [eig.values[2], eig.values[1], eig.values[0]];

    let psi = build_psi_map(ops)?;
    let images = alice
        .iter()
        .map(|phi| psi.apply(&linalg::outer(phi, phi)))
        .collect::<Result<Vec<_>>>()?;
    let commutator = linalg::commutator(&images[1], &images[2]).norm();
    if !tol.accepts(commutator, images[1].norm() * images[2].norm()) {
        return Err(Error::CommutationFailure { residual: commutator });
    }
    let w = qec::simultaneous_eigenbasis(&images, tol)?;
    let (states, protocol) = distinguish_any_basis(&s, &alice, &w, tol)?;
    let overlap = verify(&states, &protocol)?;
    if !tol.accepts(overlap, 1.0) {
        return Err(Error::InconsistentVerdict(format!("constructed protocol has overlap {overlap:.3e}")));
    }
    Ok(BasisFinding {
        alice_basis: alice,
        code_coefficients: linalg::columns_of(&w),
        kernel_element: m,
        eigenvalues,
        x_dim: x.dim(),
        commutator,
        states,
        protocol,
        overlap,
    })
}

/// No basis of the complement of `φ` is one-way distinguishable once the
/// Schmidt rank of `φ` exceeds two.
pub fn schmidt_rank_obstruction(phi: &BipartiteState, tol: Tolerance) -> Verdict {
    let rank = phi.schmidt_rank(tol);
    let log = vec![format!("Schmidt rank {rank}")];
    if rank > 2 {
        Verdict { status: Status::NotDistinguishable, witness: Some(Witness::SchmidtRank(rank)), diagnostics: log }
    } else {
        Verdict::inconclusive(log, Some(Witness::SchmidtRank(rank)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObstructionCertificate {
    /// Every cross-block norm exceeds the tolerance.
    pub holds: bool,
    pub min_cross_norm: f64,
}

/// Cross-block norms `‖Π_s(σ⊗I)Π_a + Π_a(σ⊗I)Π_s‖_F` between the symmetric
/// and antisymmetric subspaces of `C^d ⊗ C^d`.
pub fn sym_antisym_obstruction(d: usize, sigmas: &[ComplexMatrix], tol: Tolerance) -> Result<ObstructionCertificate> {
    let (sym, anti) = sym_antisym_projectors(d);
    let id = ComplexMatrix::identity(d, d);
    let mut min = f64::INFINITY;
    for (index, sigma) in sigmas.iter().enumerate() {
        if sigma.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!("σ_{index} is not {d}×{d}")));
        }
        if linalg::rank(sigma, tol) != 1 {
            return Err(Error::RankOneRequired { index });
        }
        let big = linalg::tensor(sigma, &id);
        let cross = &sym * &big * &anti + &anti * &big * &sym;
        min = min.min(cross.norm());
    }
    Ok(ObstructionCertificate { holds: min > tol.bound(1.0), min_cross_norm: min })
}

/// `(Π_s, Π_a) = ((I + F)/2, (I − F)/2)` with `F` the swap.
pub fn sym_antisym_projectors(d: usize) -> (ComplexMatrix, ComplexMatrix) {
    let n = d * d;
    let swap = ComplexMatrix::from_fn(n, n, |r, c| {
        let (i, j) = (c / d, c % d);
        C64::new(if r == j * d + i { 1.0 } else { 0.0 }, 0.0)
    });
    let id = ComplexMatrix::identity(n, n);
    ((&id + &swap).scale(0.5), (&id - &swap).scale(0.5))
}

/// Whether the compressions `P(|η_j⟩⟨η_j| ⊗ I)P` commute pairwise, a
/// necessary condition for Alice's basis to start a protocol on the code.
pub fn necessary_commute_test(code: &CodeSpace, alice_basis: &[ComplexVector], tol: Tolerance) -> Result<PairReport> {
    let a = alice_basis.first().map(|v| v.len()).ok_or_else(|| Error::InvalidParams("empty Alice basis".into()))?;
    if alice_basis.iter().any(|v| v.len() != a) || code.ambient_dim() % a != 0 {
        return Err(Error::DimensionMismatch(format!(
            "Alice vectors in C^{a} for a code in C^{}",
            code.ambient_dim()
        )));
    }
    let deviation = linalg::orthonormality_deviation(&linalg::columns_matrix(alice_basis));
    if !tol.accepts(deviation, a as f64) {
        return Err(Error::NotOrthonormal { deviation });
    }
    let b = code.ambient_dim() / a;
    let id = ComplexMatrix::identity(b, b);
    let family: Vec<ComplexMatrix> = alice_basis
        .iter()
        .map(|eta| code.compress(&linalg::tensor(&linalg::outer(eta, eta), &id)))
        .collect();
    Ok(qec::commutation_report(&family, tol))
}

#[derive(Clone, Debug)]
pub struct KingReport {
    /// Orthonormal `{ϕ_1, ϕ_2, ϕ_3}` whose compressions commute.
    pub witness: Option<Vec<ComplexVector>>,
    pub min_commutator: f64,
    pub seeded_from_kernel: bool,
}

fn king_objective(code: &CodeSpace, u: &ComplexMatrix, n: usize) -> f64 {
    let id = ComplexMatrix::identity(n, n);
    let q: Vec<ComplexMatrix> = (0..2)
        .map(|k| {
            let phi = u.column(k).into_owned();
            code.compress(&linalg::tensor(&linalg::outer(&phi, &phi), &id))
        })
        .collect();
    linalg::commutator(&q[0], &q[1]).norm()
}

/// Search for an orthonormal basis of `C³` whose compressions onto a
/// three-dimensional code in `C³ ⊗ C^n` commute. When `X` is a strict
/// subspace the kernel construction supplies one directly; otherwise random
/// starts are refined by an adaptive random walk on the unitary group.
pub fn king_search(code: &CodeSpace, attempts: usize, seed: u64, tol: Tolerance) -> Result<KingReport> {
    if code.dim() != 3 || code.ambient_dim() % 3 != 0 {
        return Err(Error::DimensionMismatch(format!(
            "need a 3-dimensional code in C^3 ⊗ C^n, got dimension {} in C^{}",
            code.dim(),
            code.ambient_dim()
        )));
    }
    let n = code.ambient_dim() / 3;
    let ops = code
        .basis()
        .iter()
        .map(|v| BipartiteState::from_vector(v, 3, n, tol).map(|s| s.to_operator().clone()))
        .collect::<Result<Vec<_>>>()?;
    let x = opalg::x_subspace(&ops, tol)?;
    if !x.is_full() {
        if let Ok(found) = find_distinguishable_basis_3d(&ops, tol) {
            let u = linalg::columns_matrix(&found.alice_basis);
            let value = king_objective(code, &u, n);
            return Ok(KingReport { witness: Some(found.alice_basis), min_commutator: value, seeded_from_kernel: true });
        }
    }
    let mut rng = linalg::seeded_rng(seed);
    let mut best_value = f64::INFINITY;
    let mut best_u = ComplexMatrix::identity(3, 3);
    let id3 = ComplexMatrix::identity(3, 3);
    for _ in 0..attempts {
        let mut u = linalg::haar_unitary(&mut rng, 3);
        let mut value = king_objective(code, &u, n);
        let mut step = 0.5;
        for _ in 0..600 {
            if value <= tol.bound(1.0) || step < 1e-12 {
                break;
            }
            let h = linalg::random_hermitian(&mut rng, 3);
            let h = h.unscale(h.norm());
            let trial = linalg::polar_unitary(&(&u * (&id3 + h * C64::new(0.0, step))));
            let tv = king_objective(code, &trial, n);
            if tv < value {
                u = trial;
                value = tv;
                step = (step * 1.5).min(1.0);
            } else {
                step *= 0.8;
            }
        }
        if value < best_value {
            best_value = value;
            best_u = u;
        }
        if best_value <= tol.bound(1.0) {
            break;
        }
    }
    let witness = (best_value <= tol.bound(1.0)).then(|| linalg::columns_of(&best_u));
    Ok(KingReport { witness, min_commutator: best_value, seeded_from_kernel: false })
}

/// Pairs each reference vector with a distinct found vector, greedily by
/// largest `|⟨r|f⟩|` after normalization. Returns the assignment
/// `reference index → found index` and the largest `1 − |⟨r|f⟩|`.
pub fn match_bases(found: &[ComplexVector], reference: &[ComplexVector]) -> (Vec<usize>, f64) {
    let norm = |v: &ComplexVector| {
        let n = v.norm();
        if n > 0.0 { v.unscale(n) } else { v.clone() }
    };
    let f: Vec<ComplexVector> = found.iter().map(norm).collect();
    let r: Vec<ComplexVector> = reference.iter().map(norm).collect();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, ri) in r.iter().enumerate() {
        for (j, fj) in f.iter().enumerate() {
            pairs.push((ri.dotc(fj).norm(), i, j));
        }
    }
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut assignment = vec![usize::MAX; r.len()];
    let mut used = vec![false; f.len()];
    let mut worst: f64 = 0.0;
    for (value, i, j) in pairs {
        if assignment[i] == usize::MAX && !used[j] {
            assignment[i] = j;
            used[j] = true;
            worst = worst.max(1.0 - value);
        }
    }
    if assignment.contains(&usize::MAX) {
        worst = 1.0;
    }
    (assignment, worst)
}
