//! n-qubit Pauli operators in symplectic form, the canonical stabilizer codes
//! `span{|i_1…i_k 0…0⟩}`, and the `k ≤ n/2` distinguishability criterion for
//! their logical Pauli sets.
//!
//! A Pauli operator is `i^p · X^{x_1}Z^{z_1} ⊗ … ⊗ X^{x_n}Z^{z_n}` with qubit 1
//! as the most significant tensor factor. In this encoding `Y = i·XZ`.

use std::collections::BTreeSet;
use std::fmt;

use crate::bipartite::StateSet;
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector, Tolerance, C64};
use crate::locc::{self, Status, Verdict};
use crate::opalg::{self, AlgebraStructure, OperatorSpan};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliOperator {
    n: usize,
    phase_exp: u8,
    x_bits: Vec<bool>,
    z_bits: Vec<bool>,
}

impl PauliOperator {
    pub fn new(phase_exp: u8, x_bits: Vec<bool>, z_bits: Vec<bool>) -> Result<Self> {
        if x_bits.len() != z_bits.len() {
            return Err(Error::QubitCountMismatch { left: x_bits.len(), right: z_bits.len() });
        }
        Ok(Self { n: x_bits.len(), phase_exp: phase_exp % 4, x_bits, z_bits })
    }

    pub fn identity(n: usize) -> Self {
        Self { n, phase_exp: 0, x_bits: vec![false; n], z_bits: vec![false; n] }
    }

    /// `X` on qubit `j` (zero-based).
    pub fn x(n: usize, j: usize) -> Self {
        let mut p = Self::identity(n);
        p.x_bits[j] = true;
        p
    }

    pub fn z(n: usize, j: usize) -> Self {
        let mut p = Self::identity(n);
        p.z_bits[j] = true;
        p
    }

    pub fn y(n: usize, j: usize) -> Self {
        let mut p = Self::identity(n);
        p.x_bits[j] = true;
        p.z_bits[j] = true;
        p.phase_exp = 1;
        p
    }

    /// Parses labels such as `XIZ`, `-YY` or `iZ`.
    pub fn from_label(label: &str) -> Result<Self> {
        let (phase, body) = if let Some(rest) = label.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = label.strip_prefix('i') {
            (1, rest)
        } else if let Some(rest) = label.strip_prefix('-') {
            (2, rest)
        } else {
            (0, label.strip_prefix('+').unwrap_or(label))
        };
        let mut p = Self::identity(body.len());
        for (j, ch) in body.chars().enumerate() {
            let single = match ch {
                'I' => continue,
                'X' => Self::x(body.len(), j),
                'Y' => Self::y(body.len(), j),
                'Z' => Self::z(body.len(), j),
                other => return Err(Error::InvalidParams(format!("unknown Pauli letter {other:?}"))),
            };
            p = p.mul(&single)?;
        }
        p.phase_exp = (p.phase_exp + phase) % 4;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase_exp
    }

    pub fn x_bits(&self) -> &[bool] {
        &self.x_bits
    }

    pub fn z_bits(&self) -> &[bool] {
        &self.z_bits
    }

    fn y_count(&self) -> usize {
        self.x_bits.iter().zip(&self.z_bits).filter(|(x, z)| **x && **z).count()
    }

    fn check_same_n(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::QubitCountMismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    /// Moving `Z^{z_1}` past `X^{x_2}` costs `(−1)^{z_1·x_2}`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_n(other)?;
        let swaps = self.z_bits.iter().zip(&other.x_bits).filter(|(z, x)| **z && **x).count();
        let phase = (self.phase_exp as usize + other.phase_exp as usize + 2 * swaps) % 4;
        Ok(Self {
            n: self.n,
            phase_exp: phase as u8,
            x_bits: self.x_bits.iter().zip(&other.x_bits).map(|(a, b)| a ^ b).collect(),
            z_bits: self.z_bits.iter().zip(&other.z_bits).map(|(a, b)| a ^ b).collect(),
        })
    }

    /// Vanishing symplectic form.
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_same_n(other)?;
        let form = (0..self.n)
            .filter(|&j| (self.x_bits[j] && other.z_bits[j]) ^ (self.z_bits[j] && other.x_bits[j]))
            .count();
        Ok(form % 2 == 0)
    }

    pub fn adjoint(&self) -> Self {
        // (i^p M)† = i^{−p} (−1)^{#Y} M for M = ⊗ X^x Z^z.
        let phase = (4 - self.phase_exp as usize + 2 * self.y_count()) % 4;
        Self { phase_exp: phase as u8, ..self.clone() }
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase_exp as usize % 2 == self.y_count() % 2
    }

    /// Representative of `{±P, ±iP}` equal to a plain tensor product of
    /// `I, X, Y, Z`.
    pub fn hermitian_canonical(&self) -> Self {
        Self { phase_exp: (self.y_count() % 4) as u8, ..self.clone() }
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let mut out = ComplexMatrix::identity(1, 1);
        for j in 0..self.n {
            let factor = match (self.x_bits[j], self.z_bits[j]) {
                (false, false) => ComplexMatrix::identity(2, 2),
                (true, false) => ComplexMatrix::from_row_slice(2, 2, &[zero, one, one, zero]),
                (false, true) => ComplexMatrix::from_row_slice(2, 2, &[one, zero, zero, -one]),
                (true, true) => ComplexMatrix::from_row_slice(2, 2, &[zero, -one, one, zero]),
            };
            out = linalg::tensor(&out, &factor);
        }
        out * C64::i().powu(self.phase_exp as u32)
    }

    /// Label in the letters `I, X, Y, Z` with a phase prefix.
    pub fn label(&self) -> String {
        let canon = self.hermitian_canonical();
        let rel = (4 + self.phase_exp as usize - canon.phase_exp as usize) % 4;
        let prefix = ["", "i", "-", "-i"][rel];
        let letters: String = (0..self.n)
            .map(|j| match (self.x_bits[j], self.z_bits[j]) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            })
            .collect();
        format!("{prefix}{letters}")
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

pub fn pauli_mul(p: &PauliOperator, q: &PauliOperator) -> Result<PauliOperator> {
    p.mul(q)
}

pub fn pauli_commutes(p: &PauliOperator, q: &PauliOperator) -> Result<bool> {
    p.commutes(q)
}

pub fn to_matrix(p: &PauliOperator) -> ComplexMatrix {
    p.to_matrix()
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilizerCode {
    pub n: usize,
    pub k: usize,
    pub stabilizer_gens: Vec<PauliOperator>,
    /// `X̄_1, Z̄_1, …, X̄_k, Z̄_k`.
    pub logical_gens: Vec<PauliOperator>,
}

impl StabilizerCode {
    /// Checks commutation relations among generators.
    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.stabilizer_gens.iter().enumerate() {
            for t in &self.stabilizer_gens[i + 1..] {
                if !s.commutes(t)? {
                    return Err(Error::InvalidParams(format!("stabilizers {s} and {t} anticommute")));
                }
            }
            for l in &self.logical_gens {
                if !s.commutes(l)? {
                    return Err(Error::InvalidParams(format!("logical {l} anticommutes with stabilizer {s}")));
                }
            }
        }
        for (a, p) in self.logical_gens.iter().enumerate() {
            for (b, q) in self.logical_gens.iter().enumerate() {
                let should_anticommute = a != b && a / 2 == b / 2;
                if p.commutes(q)? == should_anticommute {
                    return Err(Error::InvalidParams(format!("logicals {p} and {q} have the wrong commutation")));
                }
            }
        }
        Ok(())
    }

    /// `|i_1…i_k 0…0⟩` in increasing order of `i_1…i_k`.
    pub fn code_basis(&self) -> Vec<ComplexVector> {
        let dim = 1usize << self.n;
        (0..1usize << self.k).map(|m| linalg::basis_vector(dim, m << (self.n - self.k))).collect()
    }
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if n == 0 || k > n {
        return Err(Error::InvalidParams(format!("need 0 ≤ k ≤ n with n ≥ 1, got n={n}, k={k}")));
    }
    Ok(())
}

/// Stabilizers `Z_{k+1}, …, Z_n`; logicals `X_j, Z_j` for `j ≤ k`.
pub fn canonical_code(n: usize, k: usize) -> Result<StabilizerCode> {
    check_nk(n, k)?;
    Ok(StabilizerCode {
        n,
        k,
        stabilizer_gens: (k..n).map(|j| PauliOperator::z(n, j)).collect(),
        logical_gens: (0..k).flat_map(|j| [PauliOperator::x(n, j), PauliOperator::z(n, j)]).collect(),
    })
}

/// All `4^k` products of `X_j, Z_j` (`j ≤ k`) modulo phase, each in
/// Hermitian canonical form. Per qubit the letters run `I, X, Z, Y`, qubit 1
/// most significant.
pub fn logical_pauli_set(n: usize, k: usize) -> Result<Vec<PauliOperator>> {
    check_nk(n, k)?;
    Ok((0..1usize << (2 * k))
        .map(|index| {
            let mut p = PauliOperator::identity(n);
            for j in 0..k {
                let digit = (index >> (2 * (k - 1 - j))) & 3;
                p.x_bits[j] = digit & 1 == 1;
                p.z_bits[j] = digit & 2 == 2;
            }
            p.hermitian_canonical()
        })
        .collect())
}

/// States `(I ⊗ P_i)|Φ⟩` on `C^{2^n} ⊗ C^{2^n}`.
pub fn states_from_paulis(paulis: &[PauliOperator], tol: Tolerance) -> Result<StateSet> {
    let n = paulis.first().map(|p| p.n).ok_or_else(|| Error::InvalidParams("no Paulis".into()))?;
    if let Some(bad) = paulis.iter().find(|p| p.n != n) {
        return Err(Error::QubitCountMismatch { left: n, right: bad.n });
    }
    let ops: Vec<ComplexMatrix> = paulis.iter().map(|p| p.to_matrix()).collect();
    StateSet::from_operators(&ops, tol)
}

/// `S0` for a Pauli family, assembled from symplectic products. Distinct
/// products are taken once.
pub fn pauli_operator_system(paulis: &[PauliOperator], tol: Tolerance) -> Result<OperatorSpan> {
    let n = paulis.first().map(|p| p.n).ok_or_else(|| Error::InvalidParams("no Paulis".into()))?;
    let mut distinct: BTreeSet<(Vec<bool>, Vec<bool>)> = BTreeSet::new();
    distinct.insert((vec![false; n], vec![false; n]));
    for (i, p) in paulis.iter().enumerate() {
        let pa = p.adjoint();
        for (j, q) in paulis.iter().enumerate() {
            if i != j {
                let prod = pa.mul(q)?;
                distinct.insert((prod.x_bits, prod.z_bits));
            }
        }
    }
    // Distinct Hermitian Paulis are HS-orthogonal with norm 2^{n/2}.
    let scale = ((1usize << n) as f64).sqrt();
    let mats: Vec<ComplexMatrix> = distinct
        .into_iter()
        .map(|(x, z)| PauliOperator::new(0, x, z).map(|p| p.hermitian_canonical().to_matrix().unscale(scale)))
        .collect::<Result<_>>()?;
    Ok(OperatorSpan::from_orthonormal_hermitian(1 << n, mats, tol))
}

#[derive(Clone, Debug)]
pub struct StabilizerReport {
    pub n: usize,
    pub k: usize,
    /// `Distinguishable` iff `2k ≤ n`.
    pub analytic: Status,
    pub verdict: Verdict,
    pub s0_dim: usize,
    pub structure: AlgebraStructure,
}

/// Decides distinguishability of the logical Pauli states of the canonical
/// `[[n, k]]` code twice: by `k ≤ n/2`, and through the operator-algebra
/// pipeline. The two must agree, `S0` must have dimension `4^k` and
/// structure `{(2^k, 2^{n−k})}`.
pub fn stabform_distinguishability(n: usize, k: usize, tol: Tolerance) -> Result<StabilizerReport> {
    if !(1 <= k && k <= n && n <= 5) {
        return Err(Error::InvalidParams(format!("need 1 ≤ k ≤ n ≤ 5, got n={n}, k={k}")));
    }
    let paulis = logical_pauli_set(n, k)?;
    let states = states_from_paulis(&paulis, tol)?;
    let s0 = pauli_operator_system(&paulis, tol)?;
    let verdict = locc::decide_with_operator_system(&states, &s0, tol);
    let structure = match verdict.structure() {
        Some(st) => st.clone(),
        None => opalg::wedderburn_structure(&s0, tol)?,
    };
    let analytic = if 2 * k <= n { Status::Distinguishable } else { Status::NotDistinguishable };
    let expected = AlgebraStructure::new(vec![(1 << k, 1 << (n - k))])?;
    if verdict.status != analytic {
        return Err(Error::InconsistentVerdict(format!(
            "(n, k) = ({n}, {k}): criterion says {}, pipeline says {}",
            analytic.as_str(),
            verdict.status.as_str()
        )));
    }
    if structure != expected || s0.dim() != 1 << (2 * k) {
        return Err(Error::InconsistentVerdict(format!(
            "(n, k) = ({n}, {k}): structure {structure} with dim S0 = {}, expected {expected} with {}",
            s0.dim(),
            1usize << (2 * k)
        )));
    }
    Ok(StabilizerReport { n, k, analytic, verdict, s0_dim: s0.dim(), structure })
}
