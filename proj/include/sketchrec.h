/* C interface to the sketchrec library. All functions return SKR_OK on success; on failure
 * the message is available from skr_last_error() on the calling thread. */
#ifndef SKETCHREC_H
#define SKETCHREC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SKR_API __declspec(dllexport)
#else
#define SKR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  SKR_OK = 0,
  SKR_E_INVALID_ARGUMENT = 1,
  SKR_E_INCOMPATIBLE = 2,
  SKR_E_OVERFLOW = 3,
  SKR_E_DOMAIN = 4,
  SKR_E_NUMERIC = 5,
  SKR_E_NON_IDENTIFIABLE = 6,
  SKR_E_IO = 7,
  SKR_E_TOO_LARGE = 8,
  SKR_E_DEGENERATE = 9,
  SKR_E_PRECONDITION = 10,
  SKR_E_INTERNAL = 99
} skr_status;

typedef enum { SKR_KIND_DP = 0, SKR_KIND_NGGP = 1 } skr_kind;
typedef enum { SKR_RULE_POE = 0, SKR_RULE_MIN = 1, SKR_RULE_CMS = 2 } skr_rule;

typedef struct skr_sketch skr_sketch;
typedef struct skr_dist skr_dist;
typedef struct skr_conformal skr_conformal;

typedef struct {
  skr_kind kind;
  double theta;
  double alpha; /* NGGP only */
  double tau;   /* NGGP only */
} skr_params;

typedef struct {
  skr_params params;
  double objective;
  int iterations;
  int converged;
  uint64_t seed;
  char method[32];
} skr_fit;

SKR_API const char* skr_last_error(void);
SKR_API const char* skr_status_name(skr_status status);

/* Seedless 64-bit symbol encodings applied before hashing. */
SKR_API uint64_t skr_key64_u64(uint64_t x);
SKR_API uint64_t skr_key64_str(const char* data, size_t len);

/* Sketches: M rows of width J, row seeds expanded from seed. Keys are key64 values. */
SKR_API skr_status skr_sketch_create(uint32_t m, uint32_t j, uint64_t seed, skr_sketch** out);
SKR_API void skr_sketch_free(skr_sketch* sketch);
SKR_API skr_status skr_sketch_add(skr_sketch* sketch, uint64_t key, uint64_t weight);
SKR_API skr_status skr_sketch_merge(skr_sketch* dst, const skr_sketch* src);
SKR_API skr_status skr_sketch_save(const skr_sketch* sketch, const char* path);
SKR_API skr_status skr_sketch_load(const char* path, skr_sketch** out);
SKR_API skr_status skr_sketch_export_csv(const skr_sketch* sketch, const char* path);
SKR_API skr_status skr_sketch_info(const skr_sketch* sketch, uint32_t* m, uint32_t* j, uint64_t* n);
SKR_API skr_status skr_sketch_row_seeds(const skr_sketch* sketch, uint32_t row, uint64_t* a, uint64_t* b);
/* Copies row counts into out, which must hold J values. */
SKR_API skr_status skr_sketch_counts(const skr_sketch* sketch, uint32_t row, uint64_t* out, size_t len);
/* Bucket count of key in every row; out must hold M values. */
SKR_API skr_status skr_sketch_query(const skr_sketch* sketch, uint64_t key, uint64_t* out, size_t len);

/* Parameter fitting. */
SKR_API skr_status skr_fit_dp(const skr_sketch* sketch, uint32_t row, skr_fit* out);
SKR_API skr_status skr_fit_nggp_prefix(const uint64_t* symbols, size_t m, double tau, skr_fit* out);
SKR_API skr_status skr_fit_nggp_minwass(const skr_sketch* sketch, uint32_t row, uint64_t m, uint32_t num_mc,
                                        uint64_t seed, double tau, skr_fit* out);
/* Writes NUL-terminated JSON into buf when cap suffices; *needed receives the full size incl. NUL. */
SKR_API skr_status skr_fit_to_json(const skr_fit* fit, char* buf, size_t cap, size_t* needed);
SKR_API skr_status skr_fit_from_json(const char* json, skr_fit* out);

/* Frequency estimate of key. params holds 1 shared entry or M per-view entries (ignored for
 * SKR_RULE_CMS). With one row the rule only matters for CMS. dist may be NULL. */
SKR_API skr_status skr_estimate_freq(const skr_sketch* sketch, uint64_t key, const skr_params* params, size_t nparams,
                                     skr_rule rule, uint64_t mc_samples, uint64_t mc_seed, double* point,
                                     skr_dist** dist);
/* Distinct-symbol estimate from one row. stderr_out receives the Monte Carlo error (0 for DP). */
SKR_API skr_status skr_estimate_card(const skr_sketch* sketch, uint32_t row, const skr_params* params,
                                     uint64_t mc_samples, uint64_t mc_seed, double* value, double* stderr_out);

SKR_API void skr_dist_free(skr_dist* dist);
SKR_API uint64_t skr_dist_support_max(const skr_dist* dist);
SKR_API skr_status skr_dist_pmf(const skr_dist* dist, double* out, size_t len);
SKR_API double skr_dist_mean(const skr_dist* dist);
SKR_API uint64_t skr_dist_quantile(const skr_dist* dist, double p);

/* Equal-tailed interval from the smoothed posterior. */
SKR_API skr_status skr_smoothed_interval(const skr_dist* dist, double level, uint64_t* lo, uint64_t* hi);
SKR_API skr_status skr_conformal_calibrate(const double* estimates, const uint64_t* truth, size_t m, double level,
                                           skr_conformal** out);
SKR_API void skr_conformal_free(skr_conformal* adj);
SKR_API skr_status skr_conformal_quantiles(const skr_conformal* adj, double* q_lo, double* q_hi);
SKR_API skr_status skr_conformal_interval(const skr_conformal* adj, double point, uint64_t cap, uint64_t* lo,
                                          uint64_t* hi);

/* Synthetic streams of n dense symbol ids written to out (n values). */
SKR_API skr_status skr_simulate_pyp(double gamma, double sigma, uint64_t n, uint64_t seed, uint64_t* out);
SKR_API skr_status skr_simulate_zipf(double c, uint64_t vocab, uint64_t n, uint64_t seed, uint64_t* out);
SKR_API skr_status skr_simulate_nggp(double theta, double alpha, double tau, uint64_t n, uint64_t seed,
                                     uint64_t* out);

/* Runs the experiment described by config_json and writes freq_mae.csv, cardinality.csv,
 * fits.csv and config.json under out_dir. failed_reps may be NULL. */
SKR_API skr_status skr_eval_run(const char* config_json, const char* out_dir, size_t* failed_reps);

#ifdef __cplusplus
}
#endif

#endif
