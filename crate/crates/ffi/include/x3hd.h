#ifndef X3HD_H
#define X3HD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum X3Status {
  X3_STATUS_OK = 0,
  X3_STATUS_NULL_ARGUMENT = 1,
  X3_STATUS_INVALID_UTF8 = 2,
  X3_STATUS_PARSE_ERROR = 3,
  X3_STATUS_MALFORMED_FORMULA = 4,
  X3_STATUS_INTERNAL = 5,
} X3Status;

/**
 * A parsed instance.
 */
typedef struct X3Formula X3Formula;

/**
 * A solver result.
 */
typedef struct X3Report X3Report;

/**
 * Solver settings; obtain defaults from [`x3hd_options_default`].
 */
typedef struct X3Options {
  uint32_t base_threshold;
  uint64_t seed;
  bool parallel;
} X3Options;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *x3hd_last_error_message(void);

struct X3Options x3hd_options_default(void);

/**
 * Parses instance text (`p x3sat N M` format) into `*out`.
 *
 * # Safety
 * `text` must be NULL or a valid NUL-terminated string; `out` must be NULL
 * or writable.
 */
enum X3Status x3hd_formula_parse(const char *text, struct X3Formula **out);

/**
 * # Safety
 * `f` must be NULL or a handle from [`x3hd_formula_parse`] not yet freed.
 */
void x3hd_formula_free(struct X3Formula *f);

/**
 * # Safety
 * `f` must be a live formula handle.
 */
uint32_t x3hd_formula_num_vars(const struct X3Formula *f);

/**
 * # Safety
 * `f` must be a live formula handle.
 */
size_t x3hd_formula_num_clauses(const struct X3Formula *f);

/**
 * Solves `f`. `opts` may be NULL for defaults.
 *
 * # Safety
 * `f` must be a live formula handle, `opts` NULL or valid, `out` writable.
 */
enum X3Status x3hd_solve(const struct X3Formula *f,
                         const struct X3Options *opts,
                         struct X3Report **out);

/**
 * # Safety
 * `r` must be NULL or a handle from [`x3hd_solve`] not yet freed.
 */
void x3hd_report_free(struct X3Report *r);

/**
 * Largest Hamming distance between two solutions, or -1 when unsatisfiable.
 *
 * # Safety
 * `r` must be a live report handle.
 */
int64_t x3hd_report_max_hd(const struct X3Report *r);

/**
 * Polynomial as text, e.g. `12*u^4 + 4`. Free with [`x3hd_string_free`].
 *
 * # Safety
 * `r` must be a live report handle.
 */
char *x3hd_report_poly(const struct X3Report *r);

/**
 * Number of solutions in decimal. Free with [`x3hd_string_free`].
 *
 * # Safety
 * `r` must be a live report handle.
 */
char *x3hd_report_solutions(const struct X3Report *r);

/**
 * Full report as JSON. Free with [`x3hd_string_free`].
 *
 * # Safety
 * `r` must be a live report handle.
 */
char *x3hd_report_json(const struct X3Report *r);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void x3hd_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* X3HD_H */
