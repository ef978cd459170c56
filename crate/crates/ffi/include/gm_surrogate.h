#ifndef GM_SURROGATE_H
#define GM_SURROGATE_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GmStatus {
  GM_STATUS_OK = 0,
  GM_STATUS_NULL_POINTER = 1,
  GM_STATUS_INVALID_UTF8 = 2,
  GM_STATUS_PARSE = 3,
  GM_STATUS_INVALID_INPUT = 4,
  /**
   * The solver stopped early; the report is still produced.
   */
  GM_STATUS_ITERATION_LIMIT = 5,
  GM_STATUS_SIZE_LIMIT = 6,
  GM_STATUS_INTERNAL = 7,
  GM_STATUS_PANIC = 8,
} GmStatus;

/**
 * Opaque graph handle.
 */
typedef struct GmGraph GmGraph;

/**
 * Opaque match report handle.
 */
typedef struct GmReport GmReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *gm_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gm_version(void);

/**
 * Parses a graph in matrix or edge-list format.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum GmStatus gm_graph_parse(const char *text, struct GmGraph **out);

/**
 * # Safety
 * `graph` must come from [`gm_graph_parse`] and not be freed twice.
 */
void gm_graph_free(struct GmGraph *graph);

/**
 * Number of vertices, or 0 for a null handle.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t gm_graph_vertex_count(const struct GmGraph *graph);

/**
 * Number of edges, or 0 for a null handle.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t gm_graph_edge_count(const struct GmGraph *graph);

/**
 * Matches `g1` onto `g2` with the certified perturbation. A
 * `max_iterations` of 0 runs to optimality. On `GM_STATUS_ITERATION_LIMIT`
 * the report is still written to `out`.
 *
 * # Safety
 * `g1` and `g2` must be live handles and `out` a valid pointer.
 */
enum GmStatus gm_match(const struct GmGraph *g1,
                       const struct GmGraph *g2,
                       uint64_t max_iterations,
                       struct GmReport **out);

/**
 * # Safety
 * `report` must come from [`gm_match`] and not be freed twice.
 */
void gm_report_free(struct GmReport *report);

/**
 * Edge disagreement of the reported relabeling, or -1 for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
int64_t gm_report_symdiff(const struct GmReport *report);

/**
 * Integer upper bound on the objective, or -1 for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
int64_t gm_report_upper_bound(const struct GmReport *report);

/**
 * Optimality gap, or -1 for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
int64_t gm_report_gap(const struct GmReport *report);

/**
 * Whether the solver proved optimality.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
bool gm_report_is_optimal(const struct GmReport *report);

/**
 * Copies the 1-based relabeling into `out`, which must hold `len` entries
 * with `len` equal to the vertex count.
 *
 * # Safety
 * `report` must be a live handle and `out` valid for `len` writes.
 */
enum GmStatus gm_report_sigma(const struct GmReport *report, size_t *out, size_t len);

/**
 * The report as JSON; release with [`gm_string_free`]. Null on failure.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
char *gm_report_to_json(const struct GmReport *report);

/**
 * Exhaustive minimum edge disagreement between `g1` and `g2`.
 *
 * # Safety
 * `g1` and `g2` must be live handles and `out` a valid pointer.
 */
enum GmStatus gm_oracle_min_symdiff(const struct GmGraph *g1,
                                    const struct GmGraph *g2,
                                    uint64_t *out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void gm_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GM_SURROGATE_H */
