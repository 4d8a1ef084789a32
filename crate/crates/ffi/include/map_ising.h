#ifndef MAP_ISING_H
#define MAP_ISING_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MiStatus {
  MI_STATUS_OK = 0,
  /**
   * A probability outside `(0, 1/2)`.
   */
  MI_STATUS_DOMAIN = 1,
  MI_STATUS_INVALID_ARGUMENT = 2,
  MI_STATUS_NULL_POINTER = 3,
  /**
   * Two energies could not be ordered inside the guard band.
   */
  MI_STATUS_AMBIGUOUS = 4,
  MI_STATUS_NUMERIC = 5,
  /**
   * The output buffer is too small; the required size was still reported.
   */
  MI_STATUS_BUFFER_TOO_SMALL = 6,
  MI_STATUS_PANIC = 7,
} MiStatus;

typedef enum MiMode {
  /**
   * Exact boundary arithmetic when `(q, eps)` classifies as a boundary.
   */
  MI_MODE_AUTO = 0,
  MI_MODE_INCOMMENSURATE = 1,
  /**
   * Exact arithmetic at `h = 2J/m`; `m` is passed separately.
   */
  MI_MODE_COMMENSURATE = 2,
} MiMode;

/**
 * Opaque decode result.
 */
typedef struct MiDecodeResult MiDecodeResult;

typedef struct MiObservables {
  double f;
  double c;
  double v;
  double theta;
  uint32_t m;
  bool on_boundary;
} MiObservables;

typedef struct MiDecodeStats {
  double v_hat;
  /**
   * NaN for a single site.
   */
  double c_hat;
  double theta_hat;
  double energy_per_site;
} MiDecodeStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *mi_last_error_message(void);

/**
 * `J = ½ ln((1-q)/q)`, `h = ½ ln((1-eps)/eps)`.
 *
 * # Safety
 * `j_out` and `h_out` must be valid for writes.
 */
enum MiStatus mi_couplings(double q, double eps, double *j_out, double *h_out);

/**
 * Regime index `m` with `2J/(m-1) > h > 2J/m`; on a boundary `h = 2J/k`, `m = k`.
 *
 * # Safety
 * `m_out` and `on_boundary_out` must be valid for writes.
 */
enum MiStatus mi_regime_index(double q, double eps, uint32_t *m_out, bool *on_boundary_out);

/**
 * Error probability at which `h = 2J/m`.
 *
 * # Safety
 * `eps_out` must be valid for a write.
 */
enum MiStatus mi_boundary_epsilon(double q, uint32_t m, double *eps_out);

/**
 * Analytic free energy, correlator, overlap and entropy per site.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum MiStatus mi_observables(double q, double eps, struct MiObservables *out);

/**
 * Hidden chain `x` and observation `y` of length `n`, reproducible in `(seed, stream)`.
 *
 * # Safety
 * `x_out` and `y_out` must each be valid for `n` writes.
 */
enum MiStatus mi_sample_pair(double q,
                             double eps,
                             size_t n,
                             uint64_t seed,
                             uint64_t stream,
                             int8_t *x_out,
                             int8_t *y_out);

/**
 * Decode `y` under the model `(q, eps)`. `m` is read only for
 * [`MiMode::Commensurate`]. On success `*out` owns a new handle.
 *
 * # Safety
 * `y` must be valid for `n` reads and `out` for a write.
 */
enum MiStatus mi_decode(const int8_t *y,
                        size_t n,
                        double q,
                        double eps,
                        enum MiMode mode,
                        uint32_t m,
                        struct MiDecodeResult **out);

/**
 * Release a handle; null is ignored.
 *
 * # Safety
 * `r` must be null or a handle from [`mi_decode`] not yet freed.
 */
void mi_decode_result_free(struct MiDecodeResult *r);

/**
 * Sequence length of a result.
 *
 * # Safety
 * `r` must be a live handle and `len_out` valid for a write.
 */
enum MiStatus mi_decode_result_len(const struct MiDecodeResult *r, size_t *len_out);

/**
 * Minimal energy as the lattice pair `(a, b)` with `E = -(aJ + bh)`.
 *
 * # Safety
 * `r` must be a live handle; `a_out`, `b_out` valid for writes.
 */
enum MiStatus mi_decode_result_energy(const struct MiDecodeResult *r,
                                      int64_t *a_out,
                                      int64_t *b_out);

/**
 * Natural log of the number of optimal paths.
 *
 * # Safety
 * `r` must be a live handle and `out` valid for a write.
 */
enum MiStatus mi_decode_result_ln_count(const struct MiDecodeResult *r, double *out);

/**
 * Exact number of optimal paths as a NUL-terminated decimal string.
 * `*required_out` receives the buffer size needed, terminator included;
 * `buf` may be null to query it.
 *
 * # Safety
 * `r` must be a live handle, `buf` null or valid for `buf_len` writes,
 * `required_out` valid for a write.
 */
enum MiStatus mi_decode_result_count(const struct MiDecodeResult *r,
                                     char *buf,
                                     size_t buf_len,
                                     size_t *required_out);

/**
 * Per-site statistics averaged over all optimal paths.
 *
 * # Safety
 * `r` must be a live handle and `out` valid for a write.
 */
enum MiStatus mi_decode_result_stats(const struct MiDecodeResult *r, struct MiDecodeStats *out);

/**
 * Copy one optimal path (ties broken towards `+1`) into `x_out`.
 *
 * # Safety
 * `r` must be a live handle and `x_out` valid for `len` writes.
 */
enum MiStatus mi_decode_result_witness(const struct MiDecodeResult *r, int8_t *x_out, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAP_ISING_H */
