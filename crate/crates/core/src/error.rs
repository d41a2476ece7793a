use thiserror::Error;

/// Errors raised by the numerical routines and deciders.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (‖A − A†‖_F = {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix has {found} entries, expected {rows}×{cols}")]
    BadShape { rows: usize, cols: usize, found: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("state is not normalized (Tr B†B = {trace:.6}, expected {expected})")]
    NotNormalized { trace: f64, expected: f64 },

    #[error("vectors are not orthonormal (max Gram deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("POVM element {index} has rank {rank}, expected 1")]
    NotRankOne { index: usize, rank: usize },

    #[error("POVM elements do not sum to the identity (deviation {deviation:.3e})")]
    NotComplete { deviation: f64 },

    #[error(
        "conditional states are not orthogonal: outcome {outcome}, states {first} and {second} overlap {overlap:.3e}"
    )]
    NotDistinguishable { outcome: usize, first: usize, second: usize, overlap: f64 },

    #[error("family does not commute (worst commutator {residual:.3e})")]
    NotCommuting { residual: f64 },

    #[error("family member {index} is not normal (‖AA† − A†A‖_F = {residual:.3e})")]
    NotNormal { index: usize, residual: f64 },

    #[error("span is not a *-algebra (closure residual {residual:.3e})")]
    NotClosed { residual: f64 },

    #[error("block parameter {value:.6} is not an integer")]
    NonIntegerStructure { value: f64 },

    #[error("structure has rectangular blocks; only m_k = n_k is supported")]
    NotSquareBlocks,

    #[error("structure has a block with m_k > n_k; no separating vector exists")]
    NoSeparatingVector,

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("span of B_i†B_j is all of M_3; the kernel construction needs a strict subspace")]
    StrictSubspaceRequired,

    #[error("compressed measurement operators fail to commute (residual {residual:.3e})")]
    CommutationFailure { residual: f64 },

    #[error("state {index} is not rank one")]
    RankOneRequired { index: usize },

    #[error("qubit count mismatch: {left} vs {right}")]
    QubitCountMismatch { left: usize, right: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("internal consistency check failed: {0}")]
    InconsistentVerdict(String),
}

pub type Result<T> = std::result::Result<T, Error>;
