#ifndef FMC_H
#define FMC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum FmcStatus {
  FMC_STATUS_OK = 0,
  FMC_STATUS_NULL_ARGUMENT = 1,
  FMC_STATUS_INVALID_UTF8 = 2,
  FMC_STATUS_PARSE_ERROR = 3,
  FMC_STATUS_TYPE_ERROR = 4,
  FMC_STATUS_STUCK = 5,
  FMC_STATUS_FUEL_EXHAUSTED = 6,
  FMC_STATUS_PANIC = 7,
} FmcStatus;

/**
 * Opaque term handle.
 */
typedef struct FmcTerm FmcTerm;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty if none. Valid until the next call.
 */
const char *fmc_last_error(void);

/**
 * Parse `src` into a new handle stored in `*out`.
 *
 * # Safety
 * `src` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FmcStatus fmc_term_parse(const char *src, struct FmcTerm **out);

/**
 * Release a handle. Null is ignored.
 *
 * # Safety
 * `t` must come from this library and not have been freed.
 */
void fmc_term_free(struct FmcTerm *t);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void fmc_string_free(char *s);

/**
 * Print a term in concrete syntax.
 *
 * # Safety
 * `t` must be a live handle and `out` a valid pointer.
 */
enum FmcStatus fmc_term_print(const struct FmcTerm *t, char **out);

/**
 * Alpha-equivalence of two terms.
 *
 * # Safety
 * Both handles must be live and `out` a valid pointer.
 */
enum FmcStatus fmc_term_alpha_eq(const struct FmcTerm *a, const struct FmcTerm *b, bool *out);

/**
 * Check a closed term against a type written like `rnd(Z) c(Z) > c(Z)`.
 *
 * # Safety
 * `t` must be a live handle and `ty` a NUL-terminated string.
 */
enum FmcStatus fmc_term_check(const struct FmcTerm *t, const char *ty);

/**
 * Principal type with row variables, as text.
 *
 * # Safety
 * `t` must be a live handle and `out` a valid pointer.
 */
enum FmcStatus fmc_term_infer(const struct FmcTerm *t, char **out);

/**
 * Ground type of a closed term (rows ε, free type variables `>`), as text.
 *
 * # Safety
 * `t` must be a live handle and `out` a valid pointer.
 */
enum FmcStatus fmc_term_type(const struct FmcTerm *t, char **out);

/**
 * Run the machine from memory `mem` (may be null for empty memory). On success the final
 * memory is written to `*out` and the transition count to `*steps`.
 *
 * # Safety
 * `t` must be a live handle, `mem` null or NUL-terminated, `out` and `steps` valid pointers.
 */
enum FmcStatus fmc_run(const struct FmcTerm *t,
                       const char *mem,
                       size_t fuel,
                       char **out,
                       size_t *steps);

/**
 * Leftmost-outermost beta normal form as a new handle.
 *
 * # Safety
 * `t` must be a live handle and `out` a valid pointer; `steps` may be null.
 */
enum FmcStatus fmc_normalize(const struct FmcTerm *t,
                             size_t fuel,
                             struct FmcTerm **out,
                             size_t *steps);

/**
 * Strong-normalisation measure of a typed term; `ty` null means the ground inferred type.
 * `variant` selects the run-length variant.
 *
 * # Safety
 * `t` must be a live handle, `ty` null or NUL-terminated, `out` a valid pointer.
 */
enum FmcStatus fmc_measure(const struct FmcTerm *t, const char *ty, bool variant, uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FMC_H */
