#ifndef BRANCHLAB_H
#define BRANCHLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum BlStatus {
  BL_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  BL_STATUS_NULL_POINTER = 1,
  /**
   * Malformed or out-of-range input (parse errors, even seeds, ...).
   */
  BL_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Well-formed input outside the domain of the operation (rejected
   * parameter block, inadmissible perturbation, index out of range, ...).
   */
  BL_STATUS_DOMAIN = 3,
  /**
   * The output buffer is too small; `*needed` holds the required size.
   */
  BL_STATUS_BUFFER_TOO_SMALL = 4,
  BL_STATUS_IO = 5,
  /**
   * An identity that must hold did not; indicates a defect.
   */
  BL_STATUS_INTERNAL = 6,
  /**
   * A panic was caught at the boundary.
   */
  BL_STATUS_PANIC = 7,
} BlStatus;

typedef enum BlCaMode {
  /**
   * Seed is an odd positive integer.
   */
  BL_CA_MODE_SYRACUSE = 0,
  /**
   * Seed is a positive dyadic rational `a/b`.
   */
  BL_CA_MODE_RATIONAL_POWER = 1,
} BlCaMode;

typedef enum BlRenderFormat {
  BL_RENDER_FORMAT_TEXT = 0,
  BL_RENDER_FORMAT_PBM = 1,
  BL_RENDER_FORMAT_SVG = 2,
} BlRenderFormat;

/**
 * Opaque Branch trajectory.
 */
typedef struct BlBranchTrajectory BlBranchTrajectory;

/**
 * Opaque cellular automaton grid.
 */
typedef struct BlCaGrid BlCaGrid;

/**
 * Opaque Syracuse trajectory.
 */
typedef struct BlSyracuseTrajectory BlSyracuseTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *bl_version(void);

/**
 * Copies the calling thread's last error message (empty after a success).
 *
 * # Safety
 * `buf` must be NULL or valid for `len` bytes; `needed` NULL or writable.
 */
enum BlStatus bl_last_error(char *buf, size_t len, size_t *needed);

/**
 * Iterates `steps` transitions from `S_0 = xi` with parameters `(p, q)`.
 * `perturbation` uses the CLI syntax: `zero`, `syracuse:C[:E0]`,
 * `explicit:R0,R1,...` or `grid:RES[:SEED]`.
 *
 * # Safety
 * String arguments must be NULL or NUL-terminated; `out` must be writable.
 */
enum BlStatus bl_branch_iterate(uint32_t p,
                                uint32_t q,
                                const char *xi,
                                const char *perturbation,
                                size_t steps,
                                struct BlBranchTrajectory **out);

/**
 * Embedded Branch trajectory of the odd seed `w0` (decimal), run to 1.
 *
 * # Safety
 * `w0` must be NULL or NUL-terminated; `out` must be writable.
 */
enum BlStatus bl_branch_embed_syracuse(const char *w0,
                                       uint64_t cap,
                                       struct BlBranchTrajectory **out);

/**
 * Number of recorded states.
 *
 * # Safety
 * `h` must be a live handle or NULL; `len` writable or NULL.
 */
enum BlStatus bl_branch_len(const struct BlBranchTrajectory *h, size_t *len);

/**
 * State `S_n` as `a/b` text.
 *
 * # Safety
 * `h` live or NULL; `buf` NULL or valid for `len` bytes; `needed` NULL or writable.
 */
enum BlStatus bl_branch_state(const struct BlBranchTrajectory *h,
                              size_t n,
                              char *buf,
                              size_t len,
                              size_t *needed);

/**
 * `(p^n / q^(n+e_n)) (xi + Sigma_n)` recomputed from the recorded
 * perturbations and valuations, as `a/b` text.
 *
 * # Safety
 * As for [`bl_branch_state`].
 */
enum BlStatus bl_branch_closed_form(const struct BlBranchTrajectory *h,
                                    size_t n,
                                    char *buf,
                                    size_t len,
                                    size_t *needed);

/**
 * Runs the domination checks for `k` in `2..=k_max` and writes the claim
 * reports as a JSON array.
 *
 * # Safety
 * As for [`bl_branch_state`].
 */
enum BlStatus bl_lemma_domination_json(const struct BlBranchTrajectory *h,
                                       uint32_t k_max,
                                       char *buf,
                                       size_t len,
                                       size_t *needed);

/**
 * Recomputes a certificate given as JSON (the bare certificate or a file
 * envelope with a `certificate` field). `*valid` is true iff it still
 * violates its relation with the recorded sides.
 *
 * # Safety
 * `json` NULL or NUL-terminated; `valid` writable.
 */
enum BlStatus bl_certificate_replay(const char *json, bool *valid);

/**
 * Releases a trajectory. NULL is ignored.
 *
 * # Safety
 * `h` must come from this library and not be used afterwards.
 */
void bl_branch_free(struct BlBranchTrajectory *h);

/**
 * Odd-step Syracuse trajectory of `w0` (decimal) until 1 or `cap` steps.
 *
 * # Safety
 * `w0` NULL or NUL-terminated; `out` writable.
 */
enum BlStatus bl_syracuse_trajectory(const char *w0,
                                     uint64_t cap,
                                     struct BlSyracuseTrajectory **out);

/**
 * Number of recorded odd values, and whether 1 was reached.
 *
 * # Safety
 * `h` live or NULL; `len` and `reached_one` writable or NULL.
 */
enum BlStatus bl_syracuse_len(const struct BlSyracuseTrajectory *h, size_t *len, bool *reached_one);

/**
 * `W_n` as decimal text.
 *
 * # Safety
 * As for [`bl_branch_state`].
 */
enum BlStatus bl_syracuse_value(const struct BlSyracuseTrajectory *h,
                                size_t n,
                                char *buf,
                                size_t len,
                                size_t *needed);

/**
 * Releases a trajectory. NULL is ignored.
 *
 * # Safety
 * `h` must come from this library and not be used afterwards.
 */
void bl_syracuse_free(struct BlSyracuseTrajectory *h);

/**
 * Builds `rows` rows of the automaton. `width = 0` fits the integer parts
 * plus 16 fractional columns.
 *
 * # Safety
 * `seed` NULL or NUL-terminated; `out` writable.
 */
enum BlStatus bl_ca_build(enum BlCaMode mode,
                          const char *seed,
                          size_t rows,
                          size_t width,
                          struct BlCaGrid **out);

/**
 * Gray recoding of `h` as a new grid.
 *
 * # Safety
 * `h` live or NULL; `out` writable.
 */
enum BlStatus bl_ca_gray(const struct BlCaGrid *h, struct BlCaGrid **out);

/**
 * Grid geometry: number of rows and rendered width.
 *
 * # Safety
 * `h` live or NULL; `rows` and `width` writable or NULL.
 */
enum BlStatus bl_ca_shape(const struct BlCaGrid *h, size_t *rows, size_t *width);

/**
 * Renders the grid (PBM `P1`, SVG or text) into `buf`.
 *
 * # Safety
 * As for [`bl_branch_state`].
 */
enum BlStatus bl_ca_render(const struct BlCaGrid *h,
                           enum BlRenderFormat format,
                           char *buf,
                           size_t len,
                           size_t *needed);

/**
 * Releases a grid. NULL is ignored.
 *
 * # Safety
 * `h` must come from this library and not be used afterwards.
 */
void bl_ca_free(struct BlCaGrid *h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BRANCHLAB_H */
