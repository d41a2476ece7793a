//! Completely positive maps in Kraus form, the quantum-classical channel of a
//! local measurement, and the recovery channel that undoes one-way
//! measurement noise on a distinguishable code.
//!
//! Alice's measurement vectors are always given as the vectors she projects
//! onto: outcome `x` has Kraus operator `|x⟩⟨η_x|` on her factor, and the
//! state `(I ⊗ B_i)|Φ⟩` leaves Bob holding `B_i|η̄_x⟩/√a`, with the bar
//! meaning entrywise conjugation in the standard basis.

use crate::bipartite::StateSet;
use crate::error::{Error, Result};
use crate::linalg::{self, tensor, ComplexMatrix, ComplexVector, Tolerance, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    kraus: Vec<ComplexMatrix>,
    dim_in: usize,
    dim_out: usize,
}

impl KrausChannel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidParams("a channel needs at least one Kraus operator".into()))?;
        let (dim_out, dim_in) = first.shape();
        if let Some(k) = kraus.iter().find(|k| k.shape() != (dim_out, dim_in)) {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operators must all be {dim_out}×{dim_in}, found {}×{}",
                k.nrows(),
                k.ncols()
            )));
        }
        Ok(Self { kraus, dim_in, dim_out })
    }

    pub fn identity(dim: usize) -> Self {
        Self { kraus: vec![ComplexMatrix::identity(dim, dim)], dim_in: dim, dim_out: dim }
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn is_trace_preserving(&self, tol: Tolerance) -> bool {
        let sum = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.dim_in, self.dim_in), |acc, k| acc + k.adjoint() * k);
        tol.matrices_close(&sum, &ComplexMatrix::identity(self.dim_in, self.dim_in))
    }

    /// `Σ_j K_j ρ K_j†`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::DimensionMismatch(format!(
                "channel acts on {}×{} operators, got {}×{}",
                self.dim_in,
                self.dim_in,
                rho.nrows(),
                rho.ncols()
            )));
        }
        Ok(self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.dim_out, self.dim_out), |acc, k| acc + k * rho * k.adjoint()))
    }

    /// Kraus operators `K_j ⊗ I_b`.
    pub fn extend_with_identity(&self, dim_b: usize) -> Self {
        let id = ComplexMatrix::identity(dim_b, dim_b);
        Self {
            kraus: self.kraus.iter().map(|k| tensor(k, &id)).collect(),
            dim_in: self.dim_in * dim_b,
            dim_out: self.dim_out * dim_b,
        }
    }

    /// Images `K_j v` under every Kraus operator.
    fn images(&self, v: &ComplexVector) -> Vec<ComplexVector> {
        self.kraus.iter().map(|k| k * v).collect()
    }
}

/// `second ∘ first`, with Kraus operators `S_k F_j` ordered by `k` then `j`.
pub fn compose(second: &KrausChannel, first: &KrausChannel) -> Result<KrausChannel> {
    if second.dim_in != first.dim_out {
        return Err(Error::DimensionMismatch(format!(
            "cannot feed a {}-dimensional output into a {}-dimensional input",
            first.dim_out, second.dim_in
        )));
    }
    let kraus = second
        .kraus
        .iter()
        .flat_map(|s| first.kraus.iter().map(move |f| s * f))
        .collect();
    KrausChannel::new(kraus)
}

/// Measurement with PSD effects, optionally decomposed as `σ_j = m_j|ϕ_j⟩⟨ϕ_j|`.
#[derive(Clone, Debug)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
    rank_one: Option<Vec<(f64, ComplexVector)>>,
    complete: bool,
}

impl Povm {
    /// Effects must be PSD and sum to the identity.
    pub fn new(elements: Vec<ComplexMatrix>, tol: Tolerance) -> Result<Self> {
        let povm = Self::sub_normalized(elements, tol)?;
        if !povm.complete {
            return Err(Error::NotComplete { deviation: povm.completeness_deviation() });
        }
        Ok(povm)
    }

    /// Effects must be PSD; their sum may fall short of the identity.
    pub fn sub_normalized(elements: Vec<ComplexMatrix>, tol: Tolerance) -> Result<Self> {
        let dim = elements
            .first()
            .ok_or_else(|| Error::InvalidParams("empty POVM".into()))?
            .nrows();
        let mut rank_one = Some(Vec::with_capacity(elements.len()));
        for e in &elements {
            if e.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch("POVM effects must share a square shape".into()));
            }
            let eig = linalg::eig_hermitian(e, tol)?;
            let scale = e.norm();
            if eig.values.iter().any(|&l| l < -tol.bound(scale)) {
                return Err(Error::InvalidParams("POVM effect is not positive semidefinite".into()));
            }
            let significant = eig.values.iter().filter(|&&l| l > tol.bound(scale)).count();
            if significant > 1 {
                rank_one = None;
            } else if let Some(list) = rank_one.as_mut() {
                let v = linalg::fix_phase(&eig.vectors.column(0).into_owned());
                list.push((eig.values[0].max(0.0), v));
            }
        }
        let mut povm = Self { elements, rank_one, complete: false };
        povm.complete = tol.accepts(povm.completeness_deviation(), dim as f64);
        Ok(povm)
    }

    /// Projective measurement onto an orthonormal basis.
    pub fn projective(basis: &[ComplexVector], tol: Tolerance) -> Result<Self> {
        check_orthonormal_basis(basis, tol)?;
        Self::new(basis.iter().map(|v| linalg::outer(v, v)).collect(), tol)
    }

    fn completeness_deviation(&self) -> f64 {
        let dim = self.elements[0].nrows();
        let sum = self.elements.iter().fold(ComplexMatrix::zeros(dim, dim), |acc, e| acc + e);
        (sum - ComplexMatrix::identity(dim, dim)).norm()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn rank_one_decomposition(&self) -> Option<&[(f64, ComplexVector)]> {
        self.rank_one.as_deref()
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }
}

/// Kraus operators `V_j = √m_j |j⟩⟨ϕ_j|` recording outcome `j` classically.
pub fn qc_channel_from_povm(p: &Povm, tol: Tolerance) -> Result<KrausChannel> {
    let Some(pairs) = p.rank_one_decomposition() else {
        let (index, rank) = p
            .elements
            .iter()
            .enumerate()
            .map(|(i, e)| (i, linalg::rank(e, tol)))
            .find(|&(_, r)| r > 1)
            .expect("a POVM without a rank-one decomposition has a higher-rank effect");
        return Err(Error::NotRankOne { index, rank });
    };
    let r = pairs.len();
    let kraus = pairs
        .iter()
        .enumerate()
        .map(|(j, (m, phi))| {
            let row = phi.adjoint() * C64::new(m.sqrt(), 0.0);
            let mut v = ComplexMatrix::zeros(r, phi.len());
            v.row_mut(j).copy_from(&row);
            v
        })
        .collect();
    KrausChannel::new(kraus)
}

fn check_orthonormal_basis(basis: &[ComplexVector], tol: Tolerance) -> Result<usize> {
    let dim = basis.first().map(|v| v.len()).ok_or_else(|| Error::InvalidParams("empty basis".into()))?;
    if basis.len() != dim || basis.iter().any(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch(format!(
            "{} vectors do not form a basis of C^{dim}",
            basis.len()
        )));
    }
    let deviation = linalg::orthonormality_deviation(&linalg::columns_matrix(basis));
    if !tol.accepts(deviation, dim as f64) {
        return Err(Error::NotOrthonormal { deviation });
    }
    Ok(dim)
}

/// `Φ_QC ⊗ id_B` for Alice measuring the projectors `|η_x⟩⟨η_x|`.
pub fn alice_measurement_channel(alice_basis: &[ComplexVector], dim_b: usize, tol: Tolerance) -> Result<KrausChannel> {
    let povm = Povm::projective(alice_basis, tol)?;
    Ok(qc_channel_from_povm(&povm, tol)?.extend_with_identity(dim_b))
}

/// Bob's normalized conditional states `B_i|η̄_x⟩` for outcome `x`.
pub fn bob_conditional_states(ops: &[ComplexMatrix], eta: &ComplexVector) -> Vec<ComplexVector> {
    let eta_bar = eta.map(|z| z.conj());
    ops.iter().map(|b| b * &eta_bar).collect()
}

/// Recovery for the one-way measurement noise of `alice_basis` on the code
/// spanned by `s`.
///
/// Outcome `x` gets `R_x = Σ_i |φ_i⟩⟨B_i η̄_x|`, and the channel has Kraus
/// operators `⟨x| ⊗ R_x` from `C^r ⊗ C^b` to `C^a ⊗ C^b`. When the states
/// are maximally entangled `R_x R_x† = P_C` for every `x`.
pub fn build_recovery(s: &StateSet, alice_basis: &[ComplexVector], tol: Tolerance) -> Result<KrausChannel> {
    if !s.is_orthonormal() {
        let deviation = (s.gram() - ComplexMatrix::identity(s.len(), s.len())).norm();
        return Err(Error::NotOrthonormal { deviation });
    }
    let (a, b) = s.dims();
    let r = check_orthonormal_basis(alice_basis, tol)?;
    if r != a {
        return Err(Error::DimensionMismatch(format!("Alice basis lives in C^{r}, states in C^{a} ⊗ C^{b}")));
    }
    let ops = s.operators();
    let code = s.vectors();
    let mut kraus = Vec::with_capacity(r);
    for (x, eta) in alice_basis.iter().enumerate() {
        let bob = bob_conditional_states(&ops, eta);
        for i in 0..bob.len() {
            for k in i + 1..bob.len() {
                let overlap = bob[i].dotc(&bob[k]).norm();
                if !tol.accepts(overlap, bob[i].norm() * bob[k].norm()) {
                    return Err(Error::NotDistinguishable { outcome: x, first: i, second: k, overlap });
                }
            }
        }
        let r_x = code
            .iter()
            .zip(&bob)
            .fold(ComplexMatrix::zeros(a * b, b), |acc, (phi, beta)| acc + linalg::outer(phi, beta));
        kraus.push(tensor(&bra(r, x), &r_x));
    }
    KrausChannel::new(kraus)
}

/// Row vector `⟨x|` as a `1×r` matrix.
fn bra(r: usize, x: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(1, r, |_, j| C64::new(if j == x { 1.0 } else { 0.0 }, 0.0))
}

/// Largest `‖(R∘E)(X) − X‖_F` over the code matrix units `|φ_i⟩⟨φ_k|` and
/// over `trials` random pure code states drawn from a fixed seed.
pub fn verify_recovery(
    recovery: &KrausChannel,
    noise: &KrausChannel,
    code_basis: &[ComplexVector],
    trials: usize,
) -> Result<f64> {
    if recovery.dim_in != noise.dim_out || recovery.dim_out != noise.dim_in {
        return Err(Error::DimensionMismatch(format!(
            "noise {}→{} and recovery {}→{} do not form a round trip",
            noise.dim_in, noise.dim_out, recovery.dim_in, recovery.dim_out
        )));
    }
    if let Some(v) = code_basis.iter().find(|v| v.len() != noise.dim_in) {
        return Err(Error::DimensionMismatch(format!(
            "code vector of length {} for a channel on C^{}",
            v.len(),
            noise.dim_in
        )));
    }
    // (R∘E)(|u⟩⟨v|) = Σ_m w_m(u) w_m(v)† with w_m ranging over composed Kraus images.
    let images = |v: &ComplexVector| -> ComplexMatrix {
        let cols: Vec<ComplexVector> =
            noise.images(v).iter().flat_map(|e| recovery.images(e)).collect();
        linalg::columns_matrix(&cols)
    };
    let per_vector: Vec<ComplexMatrix> = code_basis.iter().map(images).collect();
    let mut worst: f64 = 0.0;
    for (i, wi) in per_vector.iter().enumerate() {
        for (k, wk) in per_vector.iter().enumerate() {
            let out = wi * wk.adjoint();
            let target = linalg::outer(&code_basis[i], &code_basis[k]);
            worst = worst.max((out - target).norm());
        }
    }
    let mut rng = linalg::seeded_rng(0x7e1e_9047);
    for _ in 0..trials {
        let mut psi = ComplexVector::zeros(noise.dim_in);
        for v in code_basis {
            psi.axpy(linalg::gaussian(&mut rng), v, C64::new(1.0, 0.0));
        }
        let n = psi.norm();
        if n == 0.0 {
            continue;
        }
        psi.unscale_mut(n);
        let w = images(&psi);
        worst = worst.max((&w * w.adjoint() - linalg::outer(&psi, &psi)).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bipartite::BipartiteState;
    use crate::linalg::{c, real_matrix, seeded_rng};
    use rand::Rng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn ket(dim: usize, i: usize) -> ComplexVector {
        linalg::basis_vector(dim, i)
    }

    fn pauli_x() -> ComplexMatrix {
        real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    fn bell_set() -> StateSet {
        StateSet::from_operators(&[ComplexMatrix::identity(2, 2), pauli_x()], tol()).unwrap()
    }

    fn computational(dim: usize) -> Vec<ComplexVector> {
        (0..dim).map(|i| ket(dim, i)).collect()
    }

    #[test]
    fn qc_channel_examples() {
        let p = Povm::projective(&computational(2), tol()).unwrap();
        let ch = qc_channel_from_povm(&p, tol()).unwrap();
        assert_eq!(ch.kraus()[0], real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(ch.kraus()[1], real_matrix(2, 2, &[0.0, 0.0, 0.0, 1.0]));

        let trivial = Povm::new(vec![ComplexMatrix::identity(1, 1)], tol()).unwrap();
        let ch = qc_channel_from_povm(&trivial, tol()).unwrap();
        assert_eq!(ch.kraus(), &[ComplexMatrix::identity(1, 1)]);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = ComplexVector::from_vec(vec![c(s, 0.0), c(s, 0.0)]);
        let minus = ComplexVector::from_vec(vec![c(s, 0.0), c(-s, 0.0)]);
        let p = Povm::new(vec![linalg::outer(&plus, &plus), linalg::outer(&minus, &minus)], tol()).unwrap();
        let ch = qc_channel_from_povm(&p, tol()).unwrap();
        assert!(ch.is_trace_preserving(tol()));
        assert!((ch.kraus()[0].clone() - linalg::outer(&ket(2, 0), &plus)).norm() < 1e-12);
        assert!((ch.kraus()[1].clone() - linalg::outer(&ket(2, 1), &minus)).norm() < 1e-12);
    }

    #[test]
    fn qc_channel_rejects_higher_rank() {
        let p = Povm::new(vec![ComplexMatrix::identity(2, 2)], tol()).unwrap();
        assert_eq!(qc_channel_from_povm(&p, tol()), Err(Error::NotRankOne { index: 0, rank: 2 }));
        assert!(matches!(
            Povm::new(vec![ComplexMatrix::identity(2, 2).scale(0.5)], tol()),
            Err(Error::NotComplete { .. })
        ));
    }

    #[test]
    fn trace_preservation_matches_completeness() {
        let mut rng = seeded_rng(3);
        for dim in 1..5 {
            let u = linalg::haar_unitary(&mut rng, dim);
            let basis = linalg::columns_of(&u);
            let full = Povm::projective(&basis, tol()).unwrap();
            assert!(qc_channel_from_povm(&full, tol()).unwrap().is_trace_preserving(tol()));
            let weights: Vec<f64> = (0..dim).map(|_| rng.random_range(0.1..0.9)).collect();
            let partial = Povm::sub_normalized(
                basis.iter().zip(&weights).map(|(v, w)| linalg::outer(v, v).scale(*w)).collect(),
                tol(),
            )
            .unwrap();
            assert!(!partial.is_complete());
            assert!(!qc_channel_from_povm(&partial, tol()).unwrap().is_trace_preserving(tol()));
        }
    }

    #[test]
    fn extension_examples() {
        let ch = qc_channel_from_povm(&Povm::projective(&computational(2), tol()).unwrap(), tol()).unwrap();
        let ext = ch.extend_with_identity(2);
        assert_eq!(ext.kraus()[0], ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])));
        assert_eq!((ext.dim_in(), ext.dim_out()), (4, 4));
        assert_eq!(KrausChannel::identity(3).extend_with_identity(2), KrausChannel::identity(6));
    }

    #[test]
    fn bell_measurement_output() {
        let ch = alice_measurement_channel(&computational(2), 2, tol()).unwrap();
        let phi1 = BipartiteState::max_entangled(2).density();
        let out = ch.apply(&phi1).unwrap();
        let mut want = ComplexMatrix::zeros(4, 4);
        want[(0, 0)] = c(0.5, 0.0);
        want[(3, 3)] = c(0.5, 0.0);
        assert!((out - want).norm() < 1e-15);
        assert!(matches!(ch.apply(&ComplexMatrix::identity(2, 2)), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn composition_examples() {
        let mut rng = seeded_rng(8);
        let g = linalg::ginibre(&mut rng, 6, 3);
        let u = linalg::polar_unitary(&g);
        let ch = KrausChannel::new(vec![u.rows(0, 3).into_owned(), u.rows(3, 3).into_owned()]).unwrap();
        let ident = compose(&KrausChannel::identity(3), &ch).unwrap();
        for _ in 0..20 {
            let psi = linalg::random_state(&mut rng, 3);
            let rho = linalg::outer(&psi, &psi);
            assert!((ident.apply(&rho).unwrap() - ch.apply(&rho).unwrap()).norm() < 1e-12);
        }
        let twice = compose(&ch, &ch).unwrap();
        assert_eq!(twice.kraus().len(), 4);
        assert!(matches!(compose(&ch, &KrausChannel::identity(2)), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn teleportation_identity() {
        // (|j⟩⟨η̄_j| ⊗ I)|Φ⟩ = |j⟩|η_j⟩/√a in any basis.
        let mut rng = seeded_rng(21);
        for a in 1..5 {
            let u = linalg::haar_unitary(&mut rng, a);
            let phi = BipartiteState::max_entangled(a);
            for (j, eta) in linalg::columns_of(&u).iter().enumerate() {
                let eta_bar = eta.map(|z| z.conj());
                let op = tensor(&linalg::outer(&ket(a, j), &eta_bar), &ComplexMatrix::identity(a, a));
                let lhs = op * phi.vector();
                let rhs = linalg::tensor_vec(&ket(a, j), eta).unscale((a as f64).sqrt());
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn bell_recovery() {
        let s = bell_set();
        let basis = computational(2);
        let rec = build_recovery(&s, &basis, tol()).unwrap();
        let noise = alice_measurement_channel(&basis, 2, tol()).unwrap();
        let p_c = linalg::projector(&s.basis_matrix());
        for x in 0..2 {
            // Kraus ⟨x| ⊗ R_x: columns x·2..x·2+2 carry R_x.
            let r_x = rec.kraus()[x].columns(2 * x, 2).into_owned();
            assert!((&r_x * r_x.adjoint() - &p_c).norm() < 1e-12);
        }
        assert!(verify_recovery(&rec, &noise, &s.vectors(), 5).unwrap() < 1e-10);

        // Swapping the outcome labels of the recovery breaks it.
        let swapped = KrausChannel::new(vec![rec.kraus()[1].clone(), rec.kraus()[0].clone()]).unwrap();
        let kraus: Vec<ComplexMatrix> = swapped
            .kraus()
            .iter()
            .enumerate()
            .map(|(x, k)| {
                let r = k.columns(2 * (1 - x), 2).into_owned();
                tensor(&bra(2, x), &r)
            })
            .collect();
        let wrong = KrausChannel::new(kraus).unwrap();
        assert!(verify_recovery(&wrong, &noise, &s.vectors(), 0).unwrap() > 0.1);
    }

    #[test]
    fn single_state_recovery() {
        let s = StateSet::new(vec![BipartiteState::max_entangled(2)], tol()).unwrap();
        let basis = computational(2);
        let rec = build_recovery(&s, &basis, tol()).unwrap();
        let phi = s.vectors()[0].clone();
        for x in 0..2 {
            let r_x = rec.kraus()[x].columns(2 * x, 2).into_owned();
            assert_eq!(linalg::rank(&r_x, tol()), 1);
            assert!((&r_x * r_x.adjoint() - linalg::outer(&phi, &phi)).norm() < 1e-12);
        }
    }

    #[test]
    fn recovery_rejects_indistinguishable_basis() {
        let s = bell_set();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let basis = vec![
            ComplexVector::from_vec(vec![c(h, 0.0), c(h, 0.0)]),
            ComplexVector::from_vec(vec![c(h, 0.0), c(-h, 0.0)]),
        ];
        assert!(matches!(
            build_recovery(&s, &basis, tol()),
            Err(Error::NotDistinguishable { outcome: 0, first: 0, second: 1, .. })
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn random_channel(seed: u64, dim_in: usize, dim_out: usize, count: usize) -> KrausChannel {
            let mut rng = seeded_rng(seed);
            let g = linalg::ginibre(&mut rng, dim_out * count, dim_in);
            let iso = linalg::polar_unitary(&g);
            KrausChannel::new((0..count).map(|j| iso.rows(j * dim_out, dim_out).into_owned()).collect()).unwrap()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(20))]

            #[test]
            fn extension_keeps_trace_preservation(seed in any::<u64>(), d in 1usize..4, e in 1usize..4, b in 1usize..3) {
                let ch = random_channel(seed, d, e, 3);
                prop_assert!(ch.is_trace_preserving(tol()));
                prop_assert!(ch.extend_with_identity(b).is_trace_preserving(tol()));
            }

            #[test]
            fn apply_keeps_positivity(seed in any::<u64>(), d in 1usize..4) {
                let ch = random_channel(seed, d, d + 1, 2);
                let mut rng = seeded_rng(seed ^ 1);
                let g = linalg::ginibre(&mut rng, d, d);
                let rho = &g * g.adjoint();
                let out = ch.apply(&rho).unwrap();
                let eig = linalg::eig_hermitian(&out, tol()).unwrap();
                prop_assert!(eig.values.iter().all(|&l| l > -1e-10 * rho.norm()));
                prop_assert!((out.trace() - rho.trace()).norm() < 1e-10 * rho.norm());
            }

            #[test]
            fn composition_matches_sequential_application(seed in any::<u64>()) {
                let first = random_channel(seed, 2, 3, 2);
                let second = random_channel(seed ^ 7, 3, 2, 3);
                let both = compose(&second, &first).unwrap();
                prop_assert_eq!(both.kraus().len(), 6);
                let mut rng = seeded_rng(seed ^ 9);
                let psi = linalg::random_state(&mut rng, 2);
                let rho = linalg::outer(&psi, &psi);
                let seq = second.apply(&first.apply(&rho).unwrap()).unwrap();
                prop_assert!((both.apply(&rho).unwrap() - seq).norm() < 1e-12);
            }
        }
    }
}
