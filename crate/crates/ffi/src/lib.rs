//! C ABI over `locc_qec`.
//!
//! Complex data crosses the boundary as interleaved `double` pairs
//! `(re, im)`; matrices are row-major. Objects are opaque heap handles
//! released with the matching `*_free` function. Every fallible call
//! returns an `LqError`; on failure a message is kept per thread and can be
//! read with `lq_last_error_message`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use locc_qec::bipartite::StateSet;
use locc_qec::channels::KrausChannel;
use locc_qec::cli;
use locc_qec::error::Error;
use locc_qec::linalg::{ComplexMatrix, ComplexVector, Tolerance, C64};
use locc_qec::locc::{self, Status, Verdict};
use locc_qec::qec::{self, CodeSpace};
use locc_qec::stabilizer;

pub const LQ_DEFAULT_TOL_ABS: f64 = 1e-10;
pub const LQ_DEFAULT_TOL_REL: f64 = 1e-9;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LqError {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotNormalized = 4,
    NotOrthonormal = 5,
    NotDistinguishable = 6,
    Numerical = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LqStatus {
    Distinguishable = 0,
    NotDistinguishable = 1,
    Inconclusive = 2,
}

impl From<Status> for LqStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Distinguishable => LqStatus::Distinguishable,
            Status::NotDistinguishable => LqStatus::NotDistinguishable,
            Status::Inconclusive => LqStatus::Inconclusive,
        }
    }
}

/// Opaque set of bipartite pure states.
pub struct LqStateSet {
    inner: StateSet,
}

/// Opaque result of `lq_analyze`.
pub struct LqVerdict {
    inner: Verdict,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_last_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut buf = e.borrow_mut();
        buf.clear();
        buf.extend(msg.bytes().filter(|&b| b != 0));
    });
}

fn fail(code: LqError, msg: impl AsRef<str>) -> LqError {
    set_last_error(msg.as_ref());
    code
}

fn from_core(e: Error) -> LqError {
    let code = match &e {
        Error::DimensionMismatch(_) | Error::BadShape { .. } | Error::QubitCountMismatch { .. } => {
            LqError::DimensionMismatch
        }
        Error::NotNormalized { .. } => LqError::NotNormalized,
        Error::NotOrthonormal { .. } => LqError::NotOrthonormal,
        Error::NotDistinguishable { .. } => LqError::NotDistinguishable,
        Error::InvalidParams(_) | Error::NonFinite { .. } => LqError::InvalidArgument,
        _ => LqError::Numerical,
    };
    fail(code, e.to_string())
}

/// Runs `f`, turning panics into `LqError::Panic` and clearing the
/// last-error message on success.
fn guard(f: impl FnOnce() -> Result<(), LqError>) -> LqError {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            LqError::Ok
        }
        Ok(Err(code)) => code,
        Err(_) => fail(LqError::Panic, "internal panic"),
    }
}

fn tolerance(abs: f64, rel: f64) -> Result<Tolerance, LqError> {
    if abs.is_finite() && rel.is_finite() && abs >= 0.0 && rel >= 0.0 {
        Ok(Tolerance::new(abs, rel))
    } else {
        Err(fail(LqError::InvalidArgument, format!("invalid tolerance ({abs}, {rel})")))
    }
}

fn nonnull<T>(p: *const T, what: &str) -> Result<(), LqError> {
    if p.is_null() {
        Err(fail(LqError::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Reads `count` complex numbers from interleaved doubles.
///
/// # Safety
/// `data` must point to `2·count` readable doubles.
unsafe fn complex_slice(data: *const f64, count: usize, what: &str) -> Result<Vec<C64>, LqError> {
    nonnull(data, what)?;
    let len = count
        .checked_mul(2)
        .ok_or_else(|| fail(LqError::InvalidArgument, format!("{what}: size overflow")))?;
    let raw = std::slice::from_raw_parts(data, len);
    if let Some(i) = raw.iter().position(|x| !x.is_finite()) {
        return Err(fail(LqError::InvalidArgument, format!("{what}: non-finite value at {i}")));
    }
    Ok(raw.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect())
}

fn row_major(rows: usize, cols: usize, entries: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(rows, cols, entries)
}

/// Copies `values` into a caller buffer of capacity `cap`, always reporting
/// the required length through `len`.
///
/// # Safety
/// `out` must be writable for `cap` doubles when `cap > 0`; `len` must be valid.
unsafe fn write_doubles(values: &[f64], out: *mut f64, cap: usize, len: *mut usize) -> Result<(), LqError> {
    nonnull(len, "len")?;
    *len = values.len();
    if values.is_empty() {
        return Ok(());
    }
    if cap < values.len() {
        return Err(fail(LqError::BufferTooSmall, format!("need {} doubles, have {cap}", values.len())));
    }
    nonnull(out, "out")?;
    std::ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lq_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}

/// Copies the calling thread's last error message into `buf` (truncated and
/// NUL-terminated) and returns the length the full message needs, including
/// the terminator.
///
/// # Safety
/// `buf` must be writable for `cap` bytes, or null with `cap == 0`.
#[no_mangle]
pub unsafe extern "C" fn lq_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len() + 1
    })
}

/// Builds the states `(I ⊗ B_i)|Φ⟩` from `count` operators, each `dim_b×dim_a`
/// and row-major, stored back to back in `ops`.
///
/// # Safety
/// `ops` must hold `2·count·dim_a·dim_b` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lq_state_set_new(
    dim_a: usize,
    dim_b: usize,
    count: usize,
    ops: *const f64,
    tol_abs: f64,
    tol_rel: f64,
    out: *mut *mut LqStateSet,
) -> LqError {
    guard(|| {
        nonnull(out, "out")?;
        *out = std::ptr::null_mut();
        let tol = tolerance(tol_abs, tol_rel)?;
        if dim_a == 0 || dim_b == 0 || count == 0 {
            return Err(fail(LqError::InvalidArgument, "dimensions and count must be positive"));
        }
        let per = dim_a * dim_b;
        let entries = complex_slice(ops, count * per, "ops")?;
        let mats: Vec<ComplexMatrix> = entries.chunks_exact(per).map(|c| row_major(dim_b, dim_a, c)).collect();
        let inner = StateSet::from_operators(&mats, tol).map_err(from_core)?;
        *out = Box::into_raw(Box::new(LqStateSet { inner }));
        Ok(())
    })
}

/// # Safety
/// `set` must come from `lq_state_set_new` and not be freed twice; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn lq_state_set_free(set: *mut LqStateSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// # Safety
/// `set` must be a live handle and `len` valid.
#[no_mangle]
pub unsafe extern "C" fn lq_state_set_len(set: *const LqStateSet, len: *mut usize) -> LqError {
    guard(|| {
        nonnull(set, "set")?;
        nonnull(len, "len")?;
        *len = (*set).inner.len();
        Ok(())
    })
}

/// # Safety
/// `set` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn lq_state_set_is_orthonormal(set: *const LqStateSet, out: *mut bool) -> LqError {
    guard(|| {
        nonnull(set, "set")?;
        nonnull(out, "out")?;
        *out = (*set).inner.is_orthonormal();
        Ok(())
    })
}

/// One-way distinguishability via the operator system of the set.
///
/// # Safety
/// `set` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn lq_analyze(
    set: *const LqStateSet,
    tol_abs: f64,
    tol_rel: f64,
    out: *mut *mut LqVerdict,
) -> LqError {
    guard(|| {
        nonnull(out, "out")?;
        *out = std::ptr::null_mut();
        nonnull(set, "set")?;
        let tol = tolerance(tol_abs, tol_rel)?;
        let inner = locc::oneway_algebra_test(&(*set).inner, tol);
        *out = Box::into_raw(Box::new(LqVerdict { inner }));
        Ok(())
    })
}

/// # Safety
/// `v` must come from `lq_analyze` and not be freed twice; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn lq_verdict_free(v: *mut LqVerdict) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// # Safety
/// `v` must be a live handle and `status` valid.
#[no_mangle]
pub unsafe extern "C" fn lq_verdict_status(v: *const LqVerdict, status: *mut LqStatus) -> LqError {
    guard(|| {
        nonnull(v, "verdict")?;
        nonnull(status, "status")?;
        *status = (*v).inner.status.into();
        Ok(())
    })
}

/// Writes the algebra structure as `(m, n)` pairs into `blocks`
/// (`2·cap_pairs` slots). `n_pairs` receives the number of pairs, zero when
/// the verdict carries no structure.
///
/// # Safety
/// `blocks` must be writable for `2·cap_pairs` values; `v` and `n_pairs` valid.
#[no_mangle]
pub unsafe extern "C" fn lq_verdict_structure(
    v: *const LqVerdict,
    blocks: *mut usize,
    cap_pairs: usize,
    n_pairs: *mut usize,
) -> LqError {
    guard(|| {
        nonnull(v, "verdict")?;
        nonnull(n_pairs, "n_pairs")?;
        let pairs = (*v).inner.structure().map(|st| st.blocks().to_vec()).unwrap_or_default();
        *n_pairs = pairs.len();
        if pairs.is_empty() {
            return Ok(());
        }
        if cap_pairs < pairs.len() {
            return Err(fail(LqError::BufferTooSmall, format!("need {} pairs, have {cap_pairs}", pairs.len())));
        }
        nonnull(blocks, "blocks")?;
        for (i, (m, n)) in pairs.into_iter().enumerate() {
            *blocks.add(2 * i) = m;
            *blocks.add(2 * i + 1) = n;
        }
        Ok(())
    })
}

/// Alice's measurement basis from a distinguishing protocol: vector `x` is
/// written as `dim_a` interleaved complex entries starting at `2·dim_a·x`.
/// `len` receives the number of doubles, zero when there is no protocol.
///
/// # Safety
/// `out` must be writable for `cap` doubles; `v` and `len` valid.
#[no_mangle]
pub unsafe extern "C" fn lq_verdict_alice_basis(
    v: *const LqVerdict,
    out: *mut f64,
    cap: usize,
    len: *mut usize,
) -> LqError {
    guard(|| {
        nonnull(v, "verdict")?;
        let values: Vec<f64> = match (*v).inner.protocol() {
            Some(p) => p.alice_basis.iter().flat_map(|eta| eta.iter().flat_map(|z| [z.re, z.im])).collect(),
            None => Vec::new(),
        };
        write_doubles(&values, out, cap, len)
    })
}

/// Worst deviation of the verdict's protocol on `set`; zero for a perfect
/// protocol. Fails with `LQ_ERROR_INVALID_ARGUMENT` if there is no protocol.
///
/// # Safety
/// `v`, `set` must be live handles and `deviation` valid.
#[no_mangle]
pub unsafe extern "C" fn lq_verdict_verify(
    v: *const LqVerdict,
    set: *const LqStateSet,
    deviation: *mut f64,
) -> LqError {
    guard(|| {
        nonnull(v, "verdict")?;
        nonnull(set, "set")?;
        nonnull(deviation, "deviation")?;
        let p = (*v)
            .inner
            .protocol()
            .ok_or_else(|| fail(LqError::InvalidArgument, "verdict carries no protocol"))?;
        *deviation = locc::verify(&(*set).inner, p).map_err(from_core)?;
        Ok(())
    })
}

/// Knill–Laflamme test of the code spanned by `code_count` vectors of length
/// `dim` against `kraus_count` operators, each `kraus_rows×dim` row-major.
///
/// # Safety
/// `code` must hold `2·code_count·dim` doubles, `kraus` must hold
/// `2·kraus_count·kraus_rows·dim` doubles; output pointers must be valid.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn lq_kl_check(
    dim: usize,
    code_count: usize,
    code: *const f64,
    kraus_count: usize,
    kraus_rows: usize,
    kraus: *const f64,
    tol_abs: f64,
    tol_rel: f64,
    correctable: *mut bool,
    residual: *mut f64,
) -> LqError {
    guard(|| {
        nonnull(correctable, "correctable")?;
        nonnull(residual, "residual")?;
        let tol = tolerance(tol_abs, tol_rel)?;
        if dim == 0 || code_count == 0 || kraus_count == 0 || kraus_rows == 0 {
            return Err(fail(LqError::InvalidArgument, "sizes must be positive"));
        }
        let vecs: Vec<ComplexVector> = complex_slice(code, code_count * dim, "code")?
            .chunks_exact(dim)
            .map(ComplexVector::from_column_slice)
            .collect();
        let per = kraus_rows * dim;
        let ops: Vec<ComplexMatrix> = complex_slice(kraus, kraus_count * per, "kraus")?
            .chunks_exact(per)
            .map(|c| row_major(kraus_rows, dim, c))
            .collect();
        let code = CodeSpace::new(vecs, tol).map_err(from_core)?;
        let noise = KrausChannel::new(ops).map_err(from_core)?;
        let report = qec::kl_check(&code, &noise, tol).map_err(from_core)?;
        *correctable = report.correctable;
        *residual = report.residual;
        Ok(())
    })
}

/// Distinguishability of the logical Pauli states of the canonical `[[n, k]]`
/// code, with `1 ≤ k ≤ n ≤ 5`.
///
/// # Safety
/// `status` and `s0_dim` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lq_stabilizer(
    n: usize,
    k: usize,
    tol_abs: f64,
    tol_rel: f64,
    status: *mut LqStatus,
    s0_dim: *mut usize,
) -> LqError {
    guard(|| {
        nonnull(status, "status")?;
        nonnull(s0_dim, "s0_dim")?;
        let tol = tolerance(tol_abs, tol_rel)?;
        let report = stabilizer::stabform_distinguishability(n, k, tol).map_err(from_core)?;
        *status = report.verdict.status.into();
        *s0_dim = report.s0_dim;
        Ok(())
    })
}

/// Recovery deviation for generalized-Bell teleportation on `C^d`.
///
/// # Safety
/// `deviation` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lq_teleport_verify(d: usize, deviation: *mut f64) -> LqError {
    guard(|| {
        nonnull(deviation, "deviation")?;
        if !(1..=4).contains(&d) {
            return Err(fail(LqError::InvalidArgument, format!("d must be in 1..=4, got {d}")));
        }
        let p = cli::teleportation_problem(d);
        let report = cli::cmd_teleport_verify(&p, &cli::Settings::default())
            .map_err(|e| fail(LqError::Numerical, e.to_string()))?;
        *deviation = report.residuals["recovery_deviation"];
        Ok(())
    })
}
