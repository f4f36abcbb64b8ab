#ifndef MDCRT_H
#define MDCRT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every exported function.
 */
typedef enum MdcrtStatus {
  MDCRT_STATUS_OK = 0,
  MDCRT_STATUS_NULL_POINTER = 1,
  MDCRT_STATUS_PARSE = 2,
  MDCRT_STATUS_INVALID_ARGUMENT = 3,
  MDCRT_STATUS_SINGULAR = 4,
  MDCRT_STATUS_INCONSISTENT = 5,
  MDCRT_STATUS_CAP_EXCEEDED = 6,
  MDCRT_STATUS_DIMENSION_UNSUPPORTED = 7,
  MDCRT_STATUS_NOT_PRIME = 8,
  MDCRT_STATUS_PANIC = 9,
} MdcrtStatus;

/**
 * Opaque integer matrix.
 */
typedef struct MdcrtMatrix MdcrtMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next call into the library on the same thread.
 */
const char *mdcrt_last_error(void);

/**
 * Frees a string returned by the library.
 *
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void mdcrt_string_free(char *s);

/**
 * Parses `[[a,b],[c,d]]` into a new matrix handle.
 *
 * # Safety
 * `text` must be a valid C string and `out` a valid pointer.
 */
enum MdcrtStatus mdcrt_matrix_parse(const char *text, struct MdcrtMatrix **out);

/**
 * # Safety
 * `m` must be null or a handle returned by this library and not yet freed.
 */
void mdcrt_matrix_free(struct MdcrtMatrix *m);

/**
 * # Safety
 * `m` must be a valid handle and `out` a valid pointer. Free the result with
 * [`mdcrt_string_free`].
 */
enum MdcrtStatus mdcrt_matrix_to_string(const struct MdcrtMatrix *m, char **out);

/**
 * # Safety
 * `m` must be a valid handle; `rows` and `cols` valid pointers.
 */
enum MdcrtStatus mdcrt_matrix_shape(const struct MdcrtMatrix *m, size_t *rows, size_t *cols);

/**
 * Determinant as a decimal string.
 *
 * # Safety
 * `m` must be a valid handle and `out` a valid pointer.
 */
enum MdcrtStatus mdcrt_matrix_det(const struct MdcrtMatrix *m, char **out);

/**
 * Hermite normal form `m = h u`.
 *
 * # Safety
 * `m` must be a valid handle; `h` and `u` valid pointers.
 */
enum MdcrtStatus mdcrt_hnf(const struct MdcrtMatrix *m,
                           struct MdcrtMatrix **h,
                           struct MdcrtMatrix **u);

/**
 * Smith normal form `u m v = lambda`.
 *
 * # Safety
 * `m` must be a valid handle; `lambda`, `u` and `v` valid pointers.
 */
enum MdcrtStatus mdcrt_snf(const struct MdcrtMatrix *m,
                           struct MdcrtMatrix **lambda,
                           struct MdcrtMatrix **u,
                           struct MdcrtMatrix **v);

/**
 * # Safety
 * `a` and `b` must be valid handles and `out` a valid pointer.
 */
enum MdcrtStatus mdcrt_gcld(const struct MdcrtMatrix *a,
                            const struct MdcrtMatrix *b,
                            struct MdcrtMatrix **out);

/**
 * # Safety
 * `a` and `b` must be valid handles and `out` a valid pointer.
 */
enum MdcrtStatus mdcrt_lcrm(const struct MdcrtMatrix *a,
                            const struct MdcrtMatrix *b,
                            struct MdcrtMatrix **out);

/**
 * # Safety
 * `a` and `b` must be valid handles and `out` a valid pointer.
 */
enum MdcrtStatus mdcrt_is_coprime(const struct MdcrtMatrix *a,
                                  const struct MdcrtMatrix *b,
                                  bool *out);

/**
 * Squared length of a shortest nonzero vector of the column lattice of `m`.
 *
 * # Safety
 * `m` must be a valid handle and `out` a valid pointer.
 */
enum MdcrtStatus mdcrt_shortest_vector_sq(const struct MdcrtMatrix *m, char **out);

/**
 * Solves `f = r_i mod M_i`. Writes the solution in `N(lcrm)` and the lcrm.
 *
 * # Safety
 * `moduli` and `remainders` must point to `count` valid handles and C
 * strings; `value` and `lcrm_out` must be valid pointers.
 */
enum MdcrtStatus mdcrt_crt_solve(const struct MdcrtMatrix *const *moduli,
                                 const char *const *remainders,
                                 size_t count,
                                 char **value,
                                 struct MdcrtMatrix **lcrm_out);

/**
 * Robust reconstruction from noisy remainders. `estimate` receives a
 * rational vector such as `[7/2,-3]`.
 *
 * # Safety
 * As for [`mdcrt_crt_solve`]; `estimate` must be a valid pointer.
 */
enum MdcrtStatus mdcrt_robust_reconstruct(const struct MdcrtMatrix *const *moduli,
                                          const char *const *remainders,
                                          size_t count,
                                          char **estimate);

/**
 * Maximum squared shortest-vector length over `[[1,0],[i,p]]` and its
 * smallest achieving index.
 *
 * # Safety
 * `d` and `first_achiever` must be valid pointers.
 */
enum MdcrtStatus mdcrt_search_max_svp(uint64_t p, uint64_t *d, uint64_t *first_achiever);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MDCRT_H */
