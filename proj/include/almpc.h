/* almpc — adaptive LPV-MPC vehicle control toolkit, C API.
 *
 * All entry points return an almpc_status; non-OK calls leave a detailed
 * message retrievable with almpc_last_error() (thread-local). Handles are
 * opaque and must be released with the matching _free function. Strings
 * returned through char** out-parameters are heap-allocated and must be
 * released with almpc_string_free().
 */
#ifndef ALMPC_H
#define ALMPC_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#ifndef ALMPC_API
#if defined(_WIN32)
#define ALMPC_API __declspec(dllexport)
#else
#define ALMPC_API __attribute__((visibility("default")))
#endif
#endif

typedef enum almpc_status {
  ALMPC_OK = 0,
  ALMPC_ERR_IO = 1,      /* missing/unreadable/unwritable file */
  ALMPC_ERR_CONFIG = 2,  /* malformed or invalid configuration */
  ALMPC_ERR_RUNTIME = 3, /* run aborted (partial results may exist) */
  ALMPC_ERR_INVALID = 4  /* bad argument (e.g. null handle) */
} almpc_status;

typedef struct almpc_config almpc_config; /* experiment configuration */
typedef struct almpc_run almpc_run;       /* closed-loop run log */

ALMPC_API const char* almpc_version(void);

/* Last error message for the calling thread; never NULL. */
ALMPC_API const char* almpc_last_error(void);

ALMPC_API void almpc_string_free(char* s);

/* ---- configuration ---- */

ALMPC_API almpc_status almpc_config_load(const char* path, almpc_config** out);
ALMPC_API almpc_status almpc_config_from_json(const char* json_text, almpc_config** out);
/* Built-in desk_track_v1 experiment. */
ALMPC_API almpc_status almpc_config_default(almpc_config** out);
ALMPC_API almpc_status almpc_config_to_json(const almpc_config* cfg, char** json_out);
ALMPC_API void almpc_config_free(almpc_config* cfg);

ALMPC_API almpc_status almpc_config_set_seed(almpc_config* cfg, uint64_t seed);
/* on = 0 disables the NN adaptation (fixed nominal stiffness is used). */
ALMPC_API almpc_status almpc_config_set_adaptation(almpc_config* cfg, int on);
ALMPC_API almpc_status almpc_config_set_qp(almpc_config* cfg, double tol, int max_iter);
ALMPC_API almpc_status almpc_config_set_model_path(almpc_config* cfg, const char* path);
/* Diagonal cost weights: 5 state weights, 2 increment weights. */
ALMPC_API almpc_status almpc_config_set_weights(almpc_config* cfg, const double q_diag[5],
                                                const double r_diag[2]);

/* ---- closed-loop simulation ---- */

/* Runs the experiment. On ALMPC_ERR_RUNTIME *out still receives the partial
 * run log (export/metrics work on it). */
ALMPC_API almpc_status almpc_simulate(const almpc_config* cfg, almpc_run** out);
ALMPC_API almpc_status almpc_run_export_csv(const almpc_run* run, const char* path);
ALMPC_API almpc_status almpc_run_load_csv(const char* path, almpc_run** out);
ALMPC_API almpc_status almpc_run_metrics_json(const almpc_run* run, const almpc_config* cfg,
                                              char** json_out);
ALMPC_API int almpc_run_record_count(const almpc_run* run);
ALMPC_API int almpc_run_aborted(const almpc_run* run);
ALMPC_API void almpc_run_free(almpc_run* run);

/* ---- stiffness estimator pipeline ---- */

/* Simulates labeled maneuvers and writes the dataset CSV
 * (header vx,vy,delta,ax,omega,cf,cr). */
ALMPC_API almpc_status almpc_generate_dataset(const almpc_config* cfg, int n_points,
                                              uint64_t seed, const char* csv_path);

/* Trains the stiffness network on a dataset CSV and writes the model JSON.
 * summary_json (optional, may be NULL) receives losses and R^2 scores. */
ALMPC_API almpc_status almpc_train_model(const almpc_config* cfg, const char* data_csv,
                                         const char* model_path, char** summary_json);

/* ---- tuning and benchmarks ---- */

/* GA-tunes the MPC weights on the configured scenario. Writes per-generation
 * history CSV (gen,best_fitness,mean_fitness) and the best weights as JSON;
 * either path may be NULL to skip. summary_json receives the tuned weights
 * and fitness. */
ALMPC_API almpc_status almpc_tune_ga(const almpc_config* cfg, const char* history_csv,
                                     const char* best_json, char** summary_json);

/* Sphere benchmark over selector variants; writes hybrid.csv / rws.csv /
 * ts.csv (seed,gen,best_fitness) into out_dir when non-NULL. */
ALMPC_API almpc_status almpc_bench_ga(const almpc_config* cfg, int n_seeds, const char* out_dir,
                                      char** summary_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ALMPC_H */
