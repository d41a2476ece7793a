#ifndef LOCC_QEC_H
#define LOCC_QEC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define LQ_DEFAULT_TOL_ABS 1e-10

#define LQ_DEFAULT_TOL_REL 1e-9

typedef enum LqError {
  LQ_ERROR_OK = 0,
  LQ_ERROR_NULL_POINTER = 1,
  LQ_ERROR_INVALID_ARGUMENT = 2,
  LQ_ERROR_DIMENSION_MISMATCH = 3,
  LQ_ERROR_NOT_NORMALIZED = 4,
  LQ_ERROR_NOT_ORTHONORMAL = 5,
  LQ_ERROR_NOT_DISTINGUISHABLE = 6,
  LQ_ERROR_NUMERICAL = 7,
  LQ_ERROR_BUFFER_TOO_SMALL = 8,
  LQ_ERROR_PANIC = 9,
} LqError;

typedef enum LqStatus {
  LQ_STATUS_DISTINGUISHABLE = 0,
  LQ_STATUS_NOT_DISTINGUISHABLE = 1,
  LQ_STATUS_INCONCLUSIVE = 2,
} LqStatus;

/**
 * Opaque set of bipartite pure states.
 */
typedef struct LqStateSet LqStateSet;

/**
 * Opaque result of `lq_analyze`.
 */
typedef struct LqVerdict LqVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *lq_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated and
 * NUL-terminated) and returns the length the full message needs, including
 * the terminator.
 *
 * # Safety
 * `buf` must be writable for `cap` bytes, or null with `cap == 0`.
 */
size_t lq_last_error_message(char *buf, size_t cap);

/**
 * Builds the states `(I ⊗ B_i)|Φ⟩` from `count` operators, each `dim_b×dim_a`
 * and row-major, stored back to back in `ops`.
 *
 * # Safety
 * `ops` must hold `2·count·dim_a·dim_b` doubles; `out` must be valid.
 */
enum LqError lq_state_set_new(size_t dim_a,
                              size_t dim_b,
                              size_t count,
                              const double *ops,
                              double tol_abs,
                              double tol_rel,
                              struct LqStateSet **out);

/**
 * # Safety
 * `set` must come from `lq_state_set_new` and not be freed twice; null is ignored.
 */
void lq_state_set_free(struct LqStateSet *set);

/**
 * # Safety
 * `set` must be a live handle and `len` valid.
 */
enum LqError lq_state_set_len(const struct LqStateSet *set, size_t *len);

/**
 * # Safety
 * `set` must be a live handle and `out` valid.
 */
enum LqError lq_state_set_is_orthonormal(const struct LqStateSet *set, bool *out);

/**
 * One-way distinguishability via the operator system of the set.
 *
 * # Safety
 * `set` must be a live handle and `out` valid.
 */
enum LqError lq_analyze(const struct LqStateSet *set,
                        double tol_abs,
                        double tol_rel,
                        struct LqVerdict **out);

/**
 * # Safety
 * `v` must come from `lq_analyze` and not be freed twice; null is ignored.
 */
void lq_verdict_free(struct LqVerdict *v);

/**
 * # Safety
 * `v` must be a live handle and `status` valid.
 */
enum LqError lq_verdict_status(const struct LqVerdict *v, enum LqStatus *status);

/**
 * Writes the algebra structure as `(m, n)` pairs into `blocks`
 * (`2·cap_pairs` slots). `n_pairs` receives the number of pairs, zero when
 * the verdict carries no structure.
 *
 * # Safety
 * `blocks` must be writable for `2·cap_pairs` values; `v` and `n_pairs` valid.
 */
enum LqError lq_verdict_structure(const struct LqVerdict *v,
                                  size_t *blocks,
                                  size_t cap_pairs,
                                  size_t *n_pairs);

/**
 * Alice's measurement basis from a distinguishing protocol: vector `x` is
 * written as `dim_a` interleaved complex entries starting at `2·dim_a·x`.
 * `len` receives the number of doubles, zero when there is no protocol.
 *
 * # Safety
 * `out` must be writable for `cap` doubles; `v` and `len` valid.
 */
enum LqError lq_verdict_alice_basis(const struct LqVerdict *v,
                                    double *out,
                                    size_t cap,
                                    size_t *len);

/**
 * Worst deviation of the verdict's protocol on `set`; zero for a perfect
 * protocol. Fails with `LQ_ERROR_INVALID_ARGUMENT` if there is no protocol.
 *
 * # Safety
 * `v`, `set` must be live handles and `deviation` valid.
 */
enum LqError lq_verdict_verify(const struct LqVerdict *v,
                               const struct LqStateSet *set,
                               double *deviation);

/**
 * Knill–Laflamme test of the code spanned by `code_count` vectors of length
 * `dim` against `kraus_count` operators, each `kraus_rows×dim` row-major.
 *
 * # Safety
 * `code` must hold `2·code_count·dim` doubles, `kraus` must hold
 * `2·kraus_count·kraus_rows·dim` doubles; output pointers must be valid.
 */
enum LqError lq_kl_check(size_t dim,
                         size_t code_count,
                         const double *code,
                         size_t kraus_count,
                         size_t kraus_rows,
                         const double *kraus,
                         double tol_abs,
                         double tol_rel,
                         bool *correctable,
                         double *residual);

/**
 * Distinguishability of the logical Pauli states of the canonical `[[n, k]]`
 * code, with `1 ≤ k ≤ n ≤ 5`.
 *
 * # Safety
 * `status` and `s0_dim` must be valid.
 */
enum LqError lq_stabilizer(size_t n,
                           size_t k,
                           double tol_abs,
                           double tol_rel,
                           enum LqStatus *status,
                           size_t *s0_dim);

/**
 * Recovery deviation for generalized-Bell teleportation on `C^d`.
 *
 * # Safety
 * `deviation` must be valid.
 */
enum LqError lq_teleport_verify(size_t d, double *deviation);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOCC_QEC_H */
