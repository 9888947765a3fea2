/* C API for the sensor-array optimization library. All functions return
 * a crs_status (CRS_OK on success); the failure message for the calling
 * thread is available via crs_last_error(). Handles are opaque and must
 * be released with their matching _free function. */

#ifndef CRS_ARRAY_H
#define CRS_ARRAY_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum crs_status {
    CRS_OK = 0,
    CRS_ERR_IO = 1,
    CRS_ERR_SCHEMA = 2,
    CRS_ERR_PARSE = 3,
    CRS_ERR_SHAPE = 4,
    CRS_ERR_PARAMETER = 5,
    CRS_ERR_STRATIFICATION = 6,
    CRS_ERR_DEGENERATE_DATA = 7,
    CRS_ERR_ADMISSION = 8,
    CRS_ERR_DEGENERATE_WEIGHTS = 9,
    CRS_ERR_DOMAIN = 10,
    CRS_ERR_INVALID_ARGUMENT = 11,
    CRS_ERR_INTERNAL = 12
} crs_status;

typedef struct crs_dataset crs_dataset;

/* Message for the most recent failing call on this thread; empty string
 * if none. The pointer stays valid until the next failing call. */
const char* crs_last_error(void);

/* ---- dataset ---- */

crs_status crs_dataset_load_csv(const char* path, crs_dataset** out);
crs_status crs_dataset_save_csv(const crs_dataset* ds, const char* path);
void crs_dataset_free(crs_dataset* ds);

size_t crs_dataset_rows(const crs_dataset* ds);
size_t crs_dataset_sensors(const crs_dataset* ds);
/* Canonical label of one row ("B", "BTX", "NONE", ...); pointer valid
 * until the dataset is freed or the function is called again. */
const char* crs_dataset_label(const crs_dataset* ds, size_t row);
const char* crs_dataset_sensor_id(const crs_dataset* ds, size_t index);

/* ---- commands (config is the same JSON the CLI resolves) ---- */

crs_status crs_run_synth(const char* config_json, const char* out_dir);
crs_status crs_run_pipeline(const char* config_json, const char* out_dir);
crs_status crs_run_theory(const char* config_json, const char* out_dir);
/* Renders summary text from an existing bundle; free with crs_string_free. */
crs_status crs_run_report(const char* bundle_dir, char** out_text);
void crs_string_free(char* s);

/* Fully-resolved default config as JSON text; free with crs_string_free. */
crs_status crs_default_config(char** out_json);

/* ---- theory helpers ---- */

double crs_energy_savings(size_t active, size_t total);
double crs_analytic_capability(size_t n, double mu_frac, size_t m);
/* Returns 0 and sets the error on domain failure. */
crs_status crs_min_sensors(double capability, double mu_frac, size_t m, size_t* out_n);

#ifdef __cplusplus
}
#endif

#endif /* CRS_ARRAY_H */
