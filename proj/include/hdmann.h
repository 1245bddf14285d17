/*
 * hdmann - C API for the HD memory-augmented network simulator.
 *
 * All entry points are thread-compatible: handles are not internally
 * synchronized, but distinct handles can be used from distinct threads.
 * Functions returning hdm_status never throw; on failure they return a
 * status code and leave a message retrievable with hdm_last_error() (the
 * message is thread-local).
 */
#ifndef HDMANN_H
#define HDMANN_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hdm_status {
  HDM_OK = 0,
  HDM_ERR_INVALID_ARG = 1, /* null/ill-formed argument at the API boundary */
  HDM_ERR_VALIDATION = 2,  /* schema violation, shape/label/config mismatch */
  HDM_ERR_DOMAIN = 3,      /* degenerate numeric input (zero norm, ...) */
  HDM_ERR_IO = 4,          /* filesystem or file-format failure */
  HDM_ERR_RUNTIME = 5      /* anything else */
} hdm_status;

typedef struct hdm_config hdm_config;         /* key=value run configuration */
typedef struct hdm_dataset hdm_dataset;       /* few-shot glyph dataset */
typedef struct hdm_checkpoint hdm_checkpoint; /* trained controller parameters */

const char* hdm_version(void);
const char* hdm_status_name(hdm_status status);
const char* hdm_last_error(void);

/* --- configuration ------------------------------------------------------ */

hdm_config* hdm_config_new(void);
void hdm_config_free(hdm_config* config);

/* Validates the key against the schema and the value against its type and
 * range; unknown keys are rejected. */
hdm_status hdm_config_set(hdm_config* config, const char* key, const char* value);

/* Plain-text `key = value` file, '#' comments. Applied on top of current
 * values, so CLI overrides should be set() after loading. */
hdm_status hdm_config_load_file(hdm_config* config, const char* path);

/* Copies the current value into buf (NUL-terminated, truncating). */
hdm_status hdm_config_get(const hdm_config* config, const char* key, char* buf, size_t buf_len);

/* --- datasets ------------------------------------------------------------ */

/* Synthetic glyph dataset from config keys: classes, samples, image_size,
 * seed. */
hdm_status hdm_dataset_generate(const hdm_config* config, hdm_dataset** out);

/* Class-per-subdirectory tree of P5 PGM files (see docs for the layout). */
hdm_status hdm_dataset_load(const char* dir, hdm_dataset** out);

hdm_status hdm_dataset_export(const hdm_dataset* dataset, const char* dir);
void hdm_dataset_free(hdm_dataset* dataset);
hdm_status hdm_dataset_info(const hdm_dataset* dataset, int* classes, int* samples_per_class,
                            int* image_size);

/* --- training and checkpoints -------------------------------------------- */

/* Episodic training per the config; writes the best checkpoint and, when
 * log_csv_path is non-NULL, a per-episode CSV log. */
hdm_status hdm_train(const hdm_config* config, const hdm_dataset* dataset,
                     const char* checkpoint_path, const char* log_csv_path,
                     double* best_val_accuracy);

hdm_status hdm_checkpoint_load(const char* path, hdm_checkpoint** out);
void hdm_checkpoint_free(hdm_checkpoint* checkpoint);
hdm_status hdm_checkpoint_info(const hdm_checkpoint* checkpoint, int* embedding_dim,
                               int* input_size, long long* param_count);

/* --- evaluation and sweeps ------------------------------------------------ */

/* Test-split accuracy for the configured mode/backend/criterion; writes a
 * JSON report when report_json_path is non-NULL. */
hdm_status hdm_eval(const hdm_config* config, const hdm_checkpoint* checkpoint,
                    const hdm_dataset* dataset, const char* report_json_path,
                    double* mean_accuracy, double* std_accuracy);

/* Robustness-law grid (alphas x dims x sigmas). */
hdm_status hdm_sweep_sigma_lambda(const hdm_config* config, const char* csv_path,
                                  const char* json_path);

/* Accuracy vs conductance-variation level on the simulated crossbar. */
hdm_status hdm_sweep_noise(const hdm_config* config, const hdm_checkpoint* checkpoint,
                           const hdm_dataset* dataset, const char* csv_path,
                           const char* json_path);

/* Accuracy / robustness / occupancy across vector dimensionalities. */
hdm_status hdm_sweep_dimension(const hdm_config* config, const hdm_dataset* dataset,
                               const char* csv_path, const char* json_path);

/* Summarizes JSON reports; writes to out_path, or stdout when NULL. */
hdm_status hdm_report_render(const char* const* json_paths, size_t count, const char* out_path);

/* --- value-level helpers -------------------------------------------------- */

double hdm_softabs(double alpha, double beta);
hdm_status hdm_sigma_lambda_theory(double alpha, int d, double sigma_rel, double* out);
hdm_status hdm_cosine_similarity(const double* a, const double* b, size_t d, double* out);

#ifdef __cplusplus
}
#endif

#endif /* HDMANN_H */
