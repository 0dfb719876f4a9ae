/* SPDX-License-Identifier: Apache-2.0 */
/* Copyright Contributors to the msfa Project. */

#ifndef MSFA_MSFA_H
#define MSFA_MSFA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(MSFA_BUILDING_LIBRARY)
#    define MSFA_API __declspec(dllexport)
#  else
#    define MSFA_API __declspec(dllimport)
#  endif
#else
#  define MSFA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/*
 * Every fallible call returns an msfa_status. On failure the thread's last
 * error message describes the cause; it stays valid until the next call into
 * the library from the same thread. Output handles are only written on
 * success. Strings returned through char** are owned by the caller and must
 * be released with msfa_string_free.
 */
typedef enum msfa_status {
    MSFA_OK = 0,
    MSFA_ERR_INVALID_ARGUMENT = 1,
    MSFA_ERR_SHAPE_MISMATCH = 2,
    MSFA_ERR_INVALID_GEOMETRY = 3,
    MSFA_ERR_IO = 4,
    MSFA_ERR_BAD_MAGIC = 5,
    MSFA_ERR_TRUNCATED = 6,
    MSFA_ERR_DIMENSION_OVERFLOW = 7,
    MSFA_ERR_UNSUPPORTED_FORMAT = 8,
    MSFA_ERR_DOMAIN = 9,
    MSFA_ERR_PROFILE = 10,
    MSFA_ERR_NUMERIC = 11,
    MSFA_ERR_STATE = 12,
    MSFA_ERR_NULL_POINTER = 13,
    MSFA_ERR_BUFFER_SIZE = 14,
    MSFA_ERR_INTERNAL = 15
} msfa_status;

MSFA_API const char* msfa_version(void);
MSFA_API const char* msfa_status_name(msfa_status status);
MSFA_API const char* msfa_last_error(void);
MSFA_API void msfa_string_free(char* s);

typedef struct msfa_cube msfa_cube;
typedef struct msfa_pattern msfa_pattern;
typedef struct msfa_mosaic msfa_mosaic;
typedef struct msfa_profile msfa_profile;
typedef struct msfa_network msfa_network;

/* ---- spectral cubes (band-major, row-major within a band) ---- */

MSFA_API msfa_status msfa_cube_create(size_t bands, size_t height, size_t width, const double* wavelengths_nm,
                                      const float* data, msfa_cube** out);
/* HSC1, or ENVI when the path ends in .hdr */
MSFA_API msfa_status msfa_cube_load(const char* path, msfa_cube** out);
MSFA_API msfa_status msfa_cube_save(const msfa_cube* cube, const char* path);
MSFA_API msfa_status msfa_cube_shape(const msfa_cube* cube, size_t* bands, size_t* height, size_t* width);
/* `count` must equal bands*height*width (data) or bands (wavelengths). */
MSFA_API msfa_status msfa_cube_read(const msfa_cube* cube, float* data, size_t count);
MSFA_API msfa_status msfa_cube_wavelengths(const msfa_cube* cube, double* wavelengths_nm, size_t count);
MSFA_API void msfa_cube_free(msfa_cube* cube);

/* ---- filter patterns ---- */

/* 4x4, bands in row-major order, centers 450..630 nm in 12 nm steps */
MSFA_API msfa_status msfa_pattern_default(msfa_pattern** out);
MSFA_API msfa_status msfa_pattern_from_json(const char* json, msfa_pattern** out);
MSFA_API msfa_status msfa_pattern_load(const char* path, msfa_pattern** out);
MSFA_API msfa_status msfa_pattern_to_json(const msfa_pattern* pattern, char** json);
MSFA_API size_t msfa_pattern_tile(const msfa_pattern* pattern);
MSFA_API void msfa_pattern_free(msfa_pattern* pattern);

/* ---- camera profiles ---- */

MSFA_API msfa_status msfa_profile_default(msfa_profile** out);
MSFA_API msfa_status msfa_profile_load(const char* dir, msfa_profile** out);
MSFA_API msfa_status msfa_profile_save(const msfa_profile* profile, const char* dir);
/* Copy of the profile's filter layout. */
MSFA_API msfa_status msfa_profile_pattern(const msfa_profile* profile, msfa_pattern** out);
/* Integral of transmission * irradiance * filter for one band. */
MSFA_API msfa_status msfa_profile_band_response(const msfa_profile* profile, size_t band, double* out);
MSFA_API void msfa_profile_free(msfa_profile* profile);

/* ---- raw mosaic frames ---- */

MSFA_API msfa_status msfa_mosaic_from_cube(const msfa_cube* cube, const msfa_pattern* pattern, msfa_mosaic** out);
MSFA_API msfa_status msfa_mosaic_load(const char* path, msfa_mosaic** out);
MSFA_API msfa_status msfa_mosaic_save(const msfa_mosaic* mosaic, const char* path);
MSFA_API msfa_status msfa_mosaic_shape(const msfa_mosaic* mosaic, size_t* height, size_t* width, size_t* tile);
MSFA_API msfa_status msfa_mosaic_read(const msfa_mosaic* mosaic, float* data, size_t count);
MSFA_API void msfa_mosaic_free(msfa_mosaic* mosaic);

/* ---- camera simulation ---- */

/* Resample to the pattern's band centers; pattern may be NULL (default). */
MSFA_API msfa_status msfa_simulate_simple(const msfa_cube* cube, const msfa_pattern* pattern, msfa_cube** out);
/* Integrate through transmission, irradiance and filters. */
MSFA_API msfa_status msfa_simulate_real(const msfa_cube* cube, const msfa_profile* profile, msfa_cube** out);

/* ---- networks ---- */

/* JSON array of architecture names. */
MSFA_API msfa_status msfa_architectures(char** json);
MSFA_API msfa_status msfa_network_create(const char* architecture, uint64_t seed, msfa_network** out);
MSFA_API msfa_status msfa_network_param_count(const msfa_network* net, size_t* out);
MSFA_API msfa_status msfa_network_describe(const msfa_network* net, char** json);
MSFA_API msfa_status msfa_network_load_weights(msfa_network* net, const char* path);
MSFA_API msfa_status msfa_network_save_weights(const msfa_network* net, const char* path);
MSFA_API void msfa_network_free(msfa_network* net);

/* ---- demosaicing ---- */

/* method: "bilinear", "id" or "net:<architecture>" (needs weights_path). */
MSFA_API msfa_status msfa_demosaic(const msfa_mosaic* mosaic, const char* method, const char* weights_path,
                                   msfa_cube** out);
MSFA_API msfa_status msfa_network_demosaic(const msfa_network* net, const msfa_mosaic* mosaic, msfa_cube** out);

/* ---- metrics ---- */

typedef struct msfa_metric_report {
    double ssim;
    double psnr_db; /* +inf for identical cubes */
    double sam_rad;
    double mse;
    size_t sam_excluded;
} msfa_metric_report;

MSFA_API msfa_status msfa_evaluate(const msfa_cube* reference, const msfa_cube* test, size_t crop_margin,
                                   msfa_metric_report* out);

/* ---- datasets, training and benchmarks (JSON requests) ---- */

/*
 * {"source": "synthetic"|"simple"|"real", "seed": n, "count": n, "height": n,
 *  "width": n, "inputs": [paths], "range": [min, max], "patch": n,
 *  "stride": n, "profile": dir}
 */
MSFA_API msfa_status msfa_make_corpus(const char* options_json, const char* out_dir);

/* Called after every epoch with the run-record line. */
typedef void (*msfa_epoch_callback)(const char* record_json, void* user);

/* Config keys as in the train config file; *summary_json may be NULL. */
MSFA_API msfa_status msfa_train(const char* config_json, msfa_epoch_callback on_epoch, void* user,
                                char** summary_json);

/*
 * options: {"split": "test", "crop_margin": 4, "weights": {"arch": path}}
 * (all optional). Result: method, split, mean and per-scene metrics.
 */
MSFA_API msfa_status msfa_evaluate_dataset(const char* data_dir, const char* method, const char* options_json,
                                           char** result_json);

/*
 * request: {"methods": [...], "weights": {...}, "split": "test",
 *           "scene": id, "rois": [[y, x, h, w], ...]}
 * Writes tables and images into out_dir; *csv receives metrics.csv.
 */
MSFA_API msfa_status msfa_bench(const char* data_dir, const char* request_json, const char* out_dir, char** csv);

#ifdef __cplusplus
}
#endif

#endif
