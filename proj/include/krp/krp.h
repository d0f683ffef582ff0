/*
 * krp: stochastic fleet-placement toolkit, C API.
 *
 * The library computes placements of k unit-capacity vehicles in a finite
 * metric space that minimize the expected min-cost perfect-matching distance
 * to k i.i.d. random riders, and evaluates such placements exactly or by
 * Monte Carlo. All functions return KRP_OK on success; on failure they
 * return an error code and krp_last_error() describes the most recent
 * failure on the calling thread. Strings returned through `char**` output
 * parameters are owned by the caller and released with krp_string_free().
 */
#ifndef KRP_KRP_H
#define KRP_KRP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(KRP_BUILD_SHARED)
#    define KRP_API __declspec(dllexport)
#  else
#    define KRP_API __declspec(dllimport)
#  endif
#else
#  define KRP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum krp_status {
  KRP_OK = 0,
  KRP_ERR_INVALID_ARGUMENT = 1,
  KRP_ERR_PARSE = 2,
  KRP_ERR_DIMENSION_MISMATCH = 3,
  KRP_ERR_INVARIANT = 4,
  KRP_ERR_SIZE_MISMATCH = 5,
  KRP_ERR_TOO_LARGE = 6,
  KRP_ERR_EMPTY_ALLOWABLE_SET = 7,
  KRP_ERR_UNKNOWN_ZONE = 8,
  KRP_ERR_EMPTY_FILE = 9,
  KRP_ERR_NOT_BINARY = 10,
  KRP_ERR_K_MISMATCH = 11,
  KRP_ERR_NOT_A_TREE = 12,
  KRP_ERR_INFEASIBLE = 13,
  KRP_ERR_IO = 14,
  KRP_ERR_UNSUPPORTED = 15,
  KRP_ERR_INTERNAL = 16
} krp_status;

/* Opaque instance bundle: metric space, demand distribution, fleet size,
 * optional allowable set, optional tree metric. */
typedef struct krp_bundle krp_bundle;

KRP_API const char* krp_version(void);

/* Message for the last failing call on this thread; empty string if none. */
KRP_API const char* krp_last_error(void);

KRP_API void krp_string_free(char* s);
KRP_API void krp_bundle_free(krp_bundle* bundle);

/* ---- bundles ---------------------------------------------------------- */

KRP_API krp_status krp_bundle_load(const char* path, krp_bundle** out);
KRP_API krp_status krp_bundle_from_json(const char* json_text, krp_bundle** out);
KRP_API krp_status krp_bundle_save(const krp_bundle* bundle, const char* path);
KRP_API krp_status krp_bundle_to_json(const krp_bundle* bundle, char** json_out);
KRP_API int64_t    krp_bundle_num_points(const krp_bundle* bundle);
KRP_API int64_t    krp_bundle_fleet_size(const krp_bundle* bundle);
KRP_API int        krp_bundle_has_tree(const krp_bundle* bundle);

/* Replace the demand distribution (length = point count). */
KRP_API krp_status krp_bundle_set_demand(krp_bundle* bundle, const double* probs, int64_t n);
KRP_API krp_status krp_bundle_set_fleet_size(krp_bundle* bundle, int64_t k);

/* ---- validation ------------------------------------------------------- */

/* matrix_json: JSON array of n rows of n numbers, or flat array of n*n.
 * Writes a validation report; status is KRP_OK even when the matrix is
 * invalid (the report says so), and an error only for malformed input. */
KRP_API krp_status krp_validate_matrix(const char* matrix_json, char** report_json);

/* ---- generators ------------------------------------------------------- */

KRP_API krp_status krp_gen_star(int64_t n, int64_t k, krp_bundle** out);
KRP_API krp_status krp_gen_coverage_bundle(const char* coverage_json, krp_bundle** out);
KRP_API krp_status krp_gen_full_cover_system(int64_t universe_size, int64_t cover_budget,
                                             int64_t decoy_sets, double epsilon, uint64_t seed,
                                             char** coverage_json);
KRP_API krp_status krp_gen_euclidean(int64_t n, int64_t k, double concentration, uint64_t seed,
                                     krp_bundle** out);
KRP_API krp_status krp_gen_tree(int64_t n, int64_t k, uint64_t seed, krp_bundle** out);

/* ---- placement -------------------------------------------------------- */

/* algo: "rp" | "vrrp" | "rrp" | "tree-dp" | "uckm".
 * options_json (may be NULL): {"gap": g, "time_limit_s": t}.
 * counts_out: caller-allocated, length = point count.
 * info_json_out (may be NULL): solver metadata (objective, status, ...). */
KRP_API krp_status krp_place(const krp_bundle* bundle, const char* algo, uint64_t seed,
                             const char* options_json, int64_t* counts_out,
                             char** info_json_out);

/* ---- evaluation ------------------------------------------------------- */

/* estimate_json: {"mean","stderr","ci95","samples","seed"} plus per-rider
 * fields. */
KRP_API krp_status krp_evaluate_mc(const krp_bundle* bundle, const int64_t* counts,
                                   int64_t samples, uint64_t seed, int threads,
                                   char** estimate_json);
KRP_API krp_status krp_evaluate_exact(const krp_bundle* bundle, const int64_t* counts,
                                      double* cost_out);
KRP_API krp_status krp_evaluate_tree_exact(const krp_bundle* bundle, const int64_t* counts,
                                           double* cost_out);

/* ---- distances -------------------------------------------------------- */

/* d_k between two multisets over the bundle's metric; plan_json_out may be
 * NULL when only the cost is wanted. */
KRP_API krp_status krp_matching_cost(const krp_bundle* bundle, const int64_t* u_counts,
                                     const int64_t* v_counts, double* cost_out,
                                     char** plan_json_out);
KRP_API krp_status krp_wasserstein(const krp_bundle* bundle, const double* mu, const double* nu,
                                   double* cost_out, char** plan_json_out);

/* ---- bench + trips ---------------------------------------------------- */

/* algos_csv: comma-separated algorithm names; "fixed" scores the placement
 * in options_json {"fixed_counts": [...]}. options_json (may be NULL):
 * {"threads": t, "independent_demand": bool, "gap": g, "time_limit_s": s,
 *  "fixed_counts": [...]}.
 * report_json_out: deterministic report (no wall times).
 * timing_json_out / scatter_csv_out may be NULL. */
KRP_API krp_status krp_bench(const krp_bundle* bundle, const char* algos_csv, int64_t runs,
                             int64_t demand_sets, uint64_t seed, const char* options_json,
                             char** report_json_out, char** scatter_csv_out,
                             char** timing_json_out);

/* options_json (may be NULL): {"zone_column": "...", "zone_map": {"raw": idx}}.
 * probs_json_out: {"n": ..., "trips": ..., "probs": [...]}. */
KRP_API krp_status krp_ingest_trips(const char* csv_path, int64_t zone_count,
                                    const char* options_json, char** probs_json_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* KRP_KRP_H */
