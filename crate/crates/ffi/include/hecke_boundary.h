#ifndef HECKE_BOUNDARY_H
#define HECKE_BOUNDARY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. The first four match the CLI exit codes.
 */
typedef enum HbStatus {
  HB_STATUS_OK = 0,
  HB_STATUS_CHECK_FAILED = 1,
  HB_STATUS_INVALID_INPUT = 2,
  HB_STATUS_IO = 3,
  HB_STATUS_NULL_POINTER = 4,
  HB_STATUS_PANIC = 5,
} HbStatus;

typedef enum HbGauge {
  HB_GAUGE_HOMOGENEOUS = 0,
  HB_GAUGE_PRINCIPAL = 1,
} HbGauge;

typedef enum HbLeft {
  HB_LEFT_IDENTITY = 0,
  HB_LEFT_TRANSPOSE_SHIFT = 1,
  HB_LEFT_AFFINE_LIMIT = 2,
} HbLeft;

typedef enum HbRight {
  HB_RIGHT_EXPLICIT = 0,
  HB_RIGHT_ANSATZ = 1,
  HB_RIGHT_DIAGONAL = 2,
  HB_RIGHT_TRIVIAL = 3,
} HbRight;

typedef enum HbSuite {
  HB_SUITE_HECKE = 0,
  HB_SUITE_YBE = 1,
  HB_SUITE_REFLECTION = 2,
  HB_SUITE_ALGEBRA = 3,
  HB_SUITE_CHAIN = 4,
  HB_SUITE_SYMMETRY = 5,
} HbSuite;

/**
 * Opaque chain configuration: model parameters, boundaries and sampling settings.
 */
typedef struct HbChain HbChain;

/**
 * Opaque dense operator on the chain space.
 */
typedef struct HbOperator HbOperator;

/**
 * Complex number as two doubles.
 */
typedef struct HbComplex {
  double re;
  double im;
} HbComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message on this thread, or null. Owned by the library; valid until the next call.
 */
const char *hb_last_error(void);

/**
 * Create a chain. `diag_block` and `xi` are used only by the diagonal right boundary.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum HbStatus hb_chain_new(uintptr_t n,
                           uintptr_t sites,
                           struct HbComplex mu,
                           struct HbComplex m,
                           struct HbComplex zeta,
                           enum HbGauge gauge,
                           enum HbLeft left,
                           enum HbRight right,
                           uintptr_t diag_block,
                           struct HbComplex xi,
                           struct HbChain **out);

/**
 * # Safety
 * `chain` must come from [`hb_chain_new`] and not be used afterwards. Null is ignored.
 */
void hb_chain_free(struct HbChain *chain);

/**
 * Run one suite. Writes the JSON report to `out_json` (free with [`hb_string_free`]) and
 * returns `Ok` if every check passed, `CheckFailed` otherwise.
 *
 * # Safety
 * `chain` must be a live handle; `out_json` must be writable.
 */
enum HbStatus hb_verify(const struct HbChain *chain,
                        enum HbSuite suite,
                        uintptr_t samples,
                        uint64_t seed,
                        double tol,
                        char **out_json);

/**
 * Spectrum of the open-chain Hamiltonian as a JSON report.
 *
 * # Safety
 * `chain` must be a live handle; `out_json` must be writable.
 */
enum HbStatus hb_spectrum(const struct HbChain *chain, char **out_json);

/**
 * Open-chain Hamiltonian (Hecke-generator form).
 *
 * # Safety
 * `chain` must be a live handle; `out` must be writable.
 */
enum HbStatus hb_hamiltonian(const struct HbChain *chain, struct HbOperator **out);

/**
 * Transfer matrix t(λ); `closed` selects the periodic chain.
 *
 * # Safety
 * `chain` must be a live handle; `out` must be writable.
 */
enum HbStatus hb_transfer(const struct HbChain *chain,
                          struct HbComplex lambda,
                          bool closed,
                          struct HbOperator **out);

/**
 * Side length of the square matrix.
 *
 * # Safety
 * `op` must be a live handle or null (returns 0).
 */
uintptr_t hb_operator_dim(const struct HbOperator *op);

/**
 * Copy the matrix in row-major order into `buf`, which holds `len` complex entries.
 *
 * # Safety
 * `op` must be a live handle; `buf` must point to `len` writable [`HbComplex`] values.
 */
enum HbStatus hb_operator_copy(const struct HbOperator *op, struct HbComplex *buf, uintptr_t len);

/**
 * # Safety
 * `op` must come from this library and not be used afterwards. Null is ignored.
 */
void hb_operator_free(struct HbOperator *op);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is ignored.
 */
void hb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HECKE_BOUNDARY_H */
