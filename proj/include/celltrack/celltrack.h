/* SPDX-License-Identifier: Apache-2.0
 * Copyright 2026 celltrack contributors
 *
 * C interface to the celltrack library. All objects are opaque handles owned
 * by the caller and released with the matching *_destroy function (NULL is
 * accepted). Every fallible call returns a ct_status; on failure
 * ct_last_error() describes the problem for the calling thread.
 */
#ifndef CELLTRACK_CELLTRACK_H
#define CELLTRACK_CELLTRACK_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CELLTRACK_BUILDING)
#    define CT_API __declspec(dllexport)
#  else
#    define CT_API __declspec(dllimport)
#  endif
#else
#  define CT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ct_status {
    CT_OK = 0,
    CT_ERR_INVALID_ARGUMENT = 1,
    CT_ERR_IO = 2,
    CT_ERR_PARSE = 3,
    CT_ERR_VALIDATION = 4,
    CT_ERR_DIMENSION = 5,
    CT_ERR_UNDEFINED = 6,
    CT_ERR_INTERNAL = 7
} ct_status;

typedef struct ct_config ct_config;
typedef struct ct_detections ct_detections;
typedef struct ct_forest ct_forest;
typedef struct ct_report ct_report;

CT_API const char* ct_version(void);
CT_API const char* ct_status_name(ct_status status);
/* Message of the last failed call on this thread; "" if none. */
CT_API const char* ct_last_error(void);

/* Configuration: flat dotted keys, e.g. "tracker.tau_high", "sim.frames". */
CT_API ct_status ct_config_create(ct_config** out);
CT_API ct_status ct_config_clone(const ct_config* config, ct_config** out);
CT_API void ct_config_destroy(ct_config* config);
CT_API ct_status ct_config_load(ct_config* config, const char* path);
CT_API ct_status ct_config_set(ct_config* config, const char* key, const char* value);
/* Copies the value (NUL-terminated) into buf when it fits; *needed gets the
 * required size including the terminator. */
CT_API ct_status ct_config_get(const ct_config* config, const char* key, char* buf, size_t cap, size_t* needed);
CT_API ct_status ct_config_validate(const ct_config* config);
/* Full snapshot, one key=value per line, reloadable with ct_config_load. */
CT_API ct_status ct_config_save(const ct_config* config, const char* path);

/* Simulates one video with sim.* settings and corrupts it with corrupt.*.
 * Any output pointer may be NULL. */
CT_API ct_status ct_simulate(const ct_config* config, uint64_t seed, ct_forest** ground_truth,
                             ct_detections** clean, ct_detections** noisy);

CT_API ct_status ct_detections_load(const char* path, ct_detections** out);
CT_API ct_status ct_detections_save(const ct_detections* detections, const char* path);
CT_API size_t ct_detections_frame_count(const ct_detections* detections);
CT_API size_t ct_detections_count(const ct_detections* detections);
CT_API void ct_detections_destroy(ct_detections* detections);

/* Runs the tracker. When tracker.embedding_dim is "auto" the video's
 * dimension is used. */
CT_API ct_status ct_track(const ct_config* config, const ct_detections* detections, ct_forest** out);

CT_API ct_status ct_forest_load(const char* dir, int require_contiguous, ct_forest** out);
CT_API ct_status ct_forest_save(const ct_forest* forest, const char* dir);
CT_API size_t ct_forest_track_count(const ct_forest* forest);
CT_API ct_status ct_forest_isomorphic(const ct_forest* a, const ct_forest* b, int* out);
CT_API void ct_forest_destroy(ct_forest* forest);

CT_API ct_status ct_evaluate(const ct_config* config, const ct_forest* pred, const ct_forest* gt, ct_report** out);
/* Scalar by name ("tra", "hota", "mota", "aogm_fn", ...). Undefined values
 * (MOTP without matches) return CT_ERR_UNDEFINED and store NaN. */
CT_API ct_status ct_report_get(const ct_report* report, const char* key, double* out);
CT_API ct_status ct_report_save_kv(const ct_report* report, const char* path);
CT_API ct_status ct_report_save_json(const ct_report* report, const char* path);
CT_API void ct_report_destroy(ct_report* report);

/* Ablation table (CSV) over a corpus directory. */
CT_API ct_status ct_ablate(const ct_config* config, const char* corpus_dir, const char* detection_file,
                           int workers, const char* out_csv);

/* Writes event_rates.csv, ancestor_descendant.csv, sister_correlation.csv,
 * interdivision_times.csv and division_profiles.csv into out_dir. */
CT_API ct_status ct_analyze(const ct_config* config, const char* const* forest_dirs, size_t count, uint64_t seed,
                            const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* CELLTRACK_CELLTRACK_H */
