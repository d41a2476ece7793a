use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use locc_qec_ffi::*;

const TOL: (f64, f64) = (LQ_DEFAULT_TOL_ABS, LQ_DEFAULT_TOL_REL);

/// Row-major interleaved data for I and X on a qubit.
fn bell_pair_ops() -> Vec<f64> {
    vec![
        1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, // I
        0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, // X
    ]
}

fn full_pauli_ops() -> Vec<f64> {
    let mut v = bell_pair_ops();
    v.extend([0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0, 0.0]); // Y
    v.extend([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0]); // Z
    v
}

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    unsafe {
        lq_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

unsafe fn state_set(ops: &[f64], count: usize) -> *mut LqStateSet {
    let mut set = ptr::null_mut();
    assert_eq!(lq_state_set_new(2, 2, count, ops.as_ptr(), TOL.0, TOL.1, &mut set), LqError::Ok);
    assert!(!set.is_null());
    set
}

#[test]
fn bell_pair_protocol_through_handles() {
    unsafe {
        let ops = bell_pair_ops();
        let set = state_set(&ops, 2);
        let mut len = 0usize;
        assert_eq!(lq_state_set_len(set, &mut len), LqError::Ok);
        assert_eq!(len, 2);
        let mut ortho = false;
        assert_eq!(lq_state_set_is_orthonormal(set, &mut ortho), LqError::Ok);
        assert!(ortho);

        let mut v = ptr::null_mut();
        assert_eq!(lq_analyze(set, TOL.0, TOL.1, &mut v), LqError::Ok);
        let mut status = LqStatus::Inconclusive;
        assert_eq!(lq_verdict_status(v, &mut status), LqError::Ok);
        assert_eq!(status, LqStatus::Distinguishable);

        // Size query, then a short buffer, then the real copy.
        let mut need = 0usize;
        assert_eq!(lq_verdict_alice_basis(v, ptr::null_mut(), 0, &mut need), LqError::BufferTooSmall);
        assert_eq!(need, 8);
        let mut short = [0.0; 4];
        assert_eq!(lq_verdict_alice_basis(v, short.as_mut_ptr(), 4, &mut need), LqError::BufferTooSmall);
        let mut basis = vec![0.0; need];
        assert_eq!(lq_verdict_alice_basis(v, basis.as_mut_ptr(), basis.len(), &mut need), LqError::Ok);
        let norm0: f64 = basis[..4].iter().map(|x| x * x).sum();
        assert!((norm0 - 1.0).abs() < 1e-10);

        let mut dev = f64::NAN;
        assert_eq!(lq_verdict_verify(v, set, &mut dev), LqError::Ok);
        assert!(dev <= 1e-10);

        lq_verdict_free(v);
        lq_state_set_free(set);
    }
}

#[test]
fn full_pauli_set_reports_structure() {
    unsafe {
        let ops = full_pauli_ops();
        let set = state_set(&ops, 4);
        let mut v = ptr::null_mut();
        assert_eq!(lq_analyze(set, TOL.0, TOL.1, &mut v), LqError::Ok);
        let mut status = LqStatus::Distinguishable;
        lq_verdict_status(v, &mut status);
        assert_eq!(status, LqStatus::NotDistinguishable);
        let mut blocks = [0usize; 4];
        let mut n = 0usize;
        assert_eq!(lq_verdict_structure(v, blocks.as_mut_ptr(), 2, &mut n), LqError::Ok);
        assert_eq!((n, blocks[0], blocks[1]), (1, 2, 1));
        let mut dev = 0.0;
        assert_eq!(lq_verdict_verify(v, set, &mut dev), LqError::InvalidArgument);
        assert!(last_error().contains("no protocol"));
        lq_verdict_free(v);
        lq_state_set_free(set);
    }
}

#[test]
fn invalid_inputs_map_to_error_codes() {
    unsafe {
        let mut set = ptr::null_mut();
        assert_eq!(lq_state_set_new(2, 2, 1, ptr::null(), TOL.0, TOL.1, &mut set), LqError::NullPointer);
        assert!(last_error().contains("null"));

        let unnormalized = [2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0];
        let code = lq_state_set_new(2, 2, 1, unnormalized.as_ptr(), TOL.0, TOL.1, &mut set);
        assert_eq!(code, LqError::NotNormalized);
        assert!(set.is_null());

        let nan = [f64::NAN; 8];
        assert_eq!(lq_state_set_new(2, 2, 1, nan.as_ptr(), TOL.0, TOL.1, &mut set), LqError::InvalidArgument);

        let ops = bell_pair_ops();
        assert_eq!(lq_state_set_new(2, 2, 2, ops.as_ptr(), -1.0, TOL.1, &mut set), LqError::InvalidArgument);

        let mut status = LqStatus::Inconclusive;
        let mut dim = 0usize;
        assert_eq!(lq_stabilizer(2, 3, TOL.0, TOL.1, &mut status, &mut dim), LqError::InvalidArgument);
        assert_eq!(lq_verdict_status(ptr::null(), &mut status), LqError::NullPointer);

        // Success clears the message.
        assert_eq!(lq_stabilizer(2, 1, TOL.0, TOL.1, &mut status, &mut dim), LqError::Ok);
        assert_eq!(last_error(), "");
        lq_state_set_free(ptr::null_mut());
        lq_verdict_free(ptr::null_mut());
    }
}

#[test]
fn stabilizer_and_teleportation_entry_points() {
    unsafe {
        let mut status = LqStatus::Inconclusive;
        let mut dim = 0usize;
        assert_eq!(lq_stabilizer(3, 2, TOL.0, TOL.1, &mut status, &mut dim), LqError::Ok);
        assert_eq!((status, dim), (LqStatus::NotDistinguishable, 16));
        assert_eq!(lq_stabilizer(4, 2, TOL.0, TOL.1, &mut status, &mut dim), LqError::Ok);
        assert_eq!(status, LqStatus::Distinguishable);
        for d in [2, 3] {
            let mut dev = f64::NAN;
            assert_eq!(lq_teleport_verify(d, &mut dev), LqError::Ok);
            assert!(dev <= 1e-10, "d={d}: {dev}");
        }
    }
}

#[test]
fn kl_check_bell_code() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let code = [h, 0.0, 0.0, 0.0, 0.0, 0.0, h, 0.0, 0.0, 0.0, h, 0.0, h, 0.0, 0.0, 0.0];
    let mut kraus = vec![0.0; 2 * 16 * 2];
    for (k, diag) in [[0usize, 1], [2, 3]].iter().enumerate() {
        for &i in diag {
            kraus[k * 32 + 2 * (i * 4 + i)] = 1.0;
        }
    }
    let (mut ok, mut residual) = (false, f64::NAN);
    let code_rc =
        unsafe { lq_kl_check(4, 2, code.as_ptr(), 2, 4, kraus.as_ptr(), TOL.0, TOL.1, &mut ok, &mut residual) };
    assert_eq!(code_rc, LqError::Ok);
    assert!(ok && residual <= 1e-10);
}

/// Directory holding the libraries cargo built next to this test binary.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_static_library() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler found; skipping");
        return;
    }
    let lib = artifact_dir().join("liblocc_qec_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "locc_qec.h"
int main(void) {
    const double ops[16] = {1,0, 0,0, 0,0, 1,0,   0,0, 1,0, 1,0, 0,0};
    LqStateSet *set = NULL;
    LqVerdict *v = NULL;
    LqStatus status;
    if (lq_state_set_new(2, 2, 2, ops, LQ_DEFAULT_TOL_ABS, LQ_DEFAULT_TOL_REL, &set) != LQ_ERROR_OK) return 10;
    if (lq_analyze(set, LQ_DEFAULT_TOL_ABS, LQ_DEFAULT_TOL_REL, &v) != LQ_ERROR_OK) return 11;
    if (lq_verdict_status(v, &status) != LQ_ERROR_OK) return 12;
    double dev = 1.0;
    if (lq_verdict_verify(v, set, &dev) != LQ_ERROR_OK || dev > 1e-10) return 13;
    printf("%s %d\n", lq_version(), (int)status);
    lq_verdict_free(v);
    lq_state_set_free(set);
    return status == LQ_STATUS_DISTINGUISHABLE ? 0 : 14;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("smoke");
    let build = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert_eq!(run.status.code(), Some(0));
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert_eq!(stdout.trim(), format!("{} 0", env!("CARGO_PKG_VERSION")));
}
