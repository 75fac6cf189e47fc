#ifndef MHSM_H
#define MHSM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result codes.
 */
typedef enum {
  MHSM_STATUS_OK = 0,
  MHSM_STATUS_NULL_POINTER = 1,
  MHSM_STATUS_INVALID_ARGUMENT = 2,
  MHSM_STATUS_TOO_FEW_POINTS = 3,
  MHSM_STATUS_MATCH_FAILED = 4,
  MHSM_STATUS_OUT_OF_RANGE = 5,
  MHSM_STATUS_PANIC = 6,
} MhsmStatus;

/**
 * Ranked candidates of one match.
 */
typedef struct MhsmMatchResult MhsmMatchResult;

/**
 * A Cartesian scan with its search index.
 */
typedef struct MhsmScan MhsmScan;

typedef struct {
  size_t n_hypotheses;
  double d_min;
  double d_max;
  size_t k;
  uint64_t rng_seed;
} MhsmGenParams;

/**
 * `contribution`: 0 projected, 1 per-axis.
 */
typedef struct {
  size_t n_seeds;
  double uniform_seed_fraction;
  double sigma0;
  double kappa0;
  size_t max_iterations;
  double d_thr;
  double r_thr;
  size_t stable_iters;
  double merge_dist;
  double merge_angle;
  double regularization_eps;
  double seed_angle_scale;
  uint32_t contribution;
  uint64_t rng_seed;
} MhsmClusterParams;

typedef struct {
  size_t max_iterations;
  double correspondence_cutoff;
  double convergence_eps_t;
  double convergence_eps_r;
  double angular_window;
} MhsmIterativeParams;

/**
 * Rigid transform `p ↦ R(theta)·p + (x, y)`.
 */
typedef struct {
  double x;
  double y;
  double theta;
} MhsmTransform;

typedef struct {
  MhsmTransform transform;
  double weight;
  double asr;
  size_t members;
} MhsmCandidate;

typedef struct {
  MhsmTransform transform;
  size_t iterations;
  bool converged;
  bool degraded;
} MhsmIterativeResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null if none. Valid until
 * the next failing call on the same thread.
 */
const char *mhsm_last_error_message(void);

/**
 * Library version, a static NUL-terminated string.
 */
const char *mhsm_version(void);

MhsmGenParams mhsm_gen_params_default(void);

MhsmClusterParams mhsm_cluster_params_default(void);

MhsmIterativeParams mhsm_iterative_params_default(void);

/**
 * Builds a scan from `n` points given as separate coordinate arrays.
 */
MhsmStatus mhsm_scan_from_points(const double *xs, const double *ys, size_t n, MhsmScan **out);

/**
 * Builds a scan from `n` polar readings with strictly increasing bearings.
 * Ranges above `max_range` (or NaN) are clamped to it; with
 * `drop_max_range` those readings are left out.
 */
MhsmStatus mhsm_scan_from_polar(const double *ranges,
                                const double *angles,
                                size_t n,
                                double max_range,
                                bool drop_max_range,
                                MhsmScan **out);

/**
 * Number of points, 0 for a null handle.
 */
size_t mhsm_scan_len(const MhsmScan *scan);

/**
 * Releases a scan; null is ignored.
 */
void mhsm_scan_free(MhsmScan *scan);

/**
 * Multi-hypothesis match of `current` into `reference` coordinates. Null
 * parameter pointers select the defaults.
 */
MhsmStatus mhsm_match(const MhsmScan *current,
                      const MhsmScan *reference,
                      const MhsmGenParams *gen,
                      const MhsmClusterParams *clus,
                      MhsmMatchResult **out);

/**
 * Number of candidates, 0 for a null handle.
 */
size_t mhsm_match_result_len(const MhsmMatchResult *result);

/**
 * Candidate `index`, ranked by descending weight.
 */
MhsmStatus mhsm_match_result_get(const MhsmMatchResult *result, size_t index, MhsmCandidate *out);

/**
 * Releases a match result; null is ignored.
 */
void mhsm_match_result_free(MhsmMatchResult *result);

/**
 * Point-to-point ICP. Null `init` means identity; null `params` the defaults.
 */
MhsmStatus mhsm_icp(const MhsmScan *current,
                    const MhsmScan *reference,
                    const MhsmTransform *init,
                    const MhsmIterativeParams *params,
                    MhsmIterativeResult *out);

/**
 * Iterative dual correspondence. Null `init` means identity; null `params`
 * the defaults.
 */
MhsmStatus mhsm_idc(const MhsmScan *current,
                    const MhsmScan *reference,
                    const MhsmTransform *init,
                    const MhsmIterativeParams *params,
                    MhsmIterativeResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MHSM_H */
