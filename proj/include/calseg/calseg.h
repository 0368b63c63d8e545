/*
 * Copyright 2026 The calseg Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface of the calseg shared library.
 *
 * Objects are opaque handles released with their matching *_free function.
 * Every fallible call returns a calseg_status; on failure the message of the
 * most recent error on the calling thread is available from
 * calseg_last_error(). Strings returned through char** parameters are owned
 * by the caller and released with calseg_string_free().
 */

#ifndef CALSEG_CALSEG_H_
#define CALSEG_CALSEG_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(CALSEG_BUILDING_LIBRARY)
#define CALSEG_API __declspec(dllexport)
#else
#define CALSEG_API __declspec(dllimport)
#endif
#else
#define CALSEG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum calseg_status {
  CALSEG_OK = 0,
  CALSEG_ERR_ARGUMENT = 1,    /* bad option value or unknown tag */
  CALSEG_ERR_SHAPE = 2,       /* extents disagree */
  CALSEG_ERR_FORMAT = 3,      /* malformed or truncated file */
  CALSEG_ERR_NOT_SIMPLEX = 4, /* probability rows do not sum to 1 */
  CALSEG_ERR_EMPTY = 5,       /* a mask has no foreground */
  CALSEG_ERR_IO = 6,          /* read or write refused */
  CALSEG_ERR_DIVERGED = 7,    /* training produced a non-finite loss */
  CALSEG_ERR_INTERNAL = 8
} calseg_status;

CALSEG_API const char* calseg_version(void);
CALSEG_API const char* calseg_status_string(calseg_status status);
CALSEG_API const char* calseg_last_error(void);
CALSEG_API void calseg_string_free(char* s);

/* Dense float tensor in the CALT file layout. */
typedef struct calseg_tensor calseg_tensor;

CALSEG_API calseg_status calseg_tensor_create(size_t ndim,
                                              const uint32_t* dims,
                                              const double* values,
                                              calseg_tensor** out);
CALSEG_API calseg_status calseg_tensor_read(const char* path,
                                            calseg_tensor** out);
CALSEG_API calseg_status calseg_tensor_write(const calseg_tensor* tensor,
                                             const char* path);
CALSEG_API size_t calseg_tensor_ndim(const calseg_tensor* tensor);
CALSEG_API uint32_t calseg_tensor_dim(const calseg_tensor* tensor, size_t i);
CALSEG_API size_t calseg_tensor_size(const calseg_tensor* tensor);
CALSEG_API const double* calseg_tensor_data(const calseg_tensor* tensor);
CALSEG_API void calseg_tensor_free(calseg_tensor* tensor);

/* 8-bit label image, one class index per pixel. */
typedef struct calseg_mask calseg_mask;

CALSEG_API calseg_status calseg_mask_create(size_t height, size_t width,
                                            const uint8_t* pixels,
                                            calseg_mask** out);
CALSEG_API calseg_status calseg_mask_read(const char* path, calseg_mask** out);
CALSEG_API calseg_status calseg_mask_write(const calseg_mask* mask,
                                           const char* path);
CALSEG_API size_t calseg_mask_height(const calseg_mask* mask);
CALSEG_API size_t calseg_mask_width(const calseg_mask* mask);
CALSEG_API const uint8_t* calseg_mask_pixels(const calseg_mask* mask);
CALSEG_API void calseg_mask_free(calseg_mask* mask);

typedef struct calseg_metric_options {
  int bins;
  double fp_weight;
  double threshold;
} calseg_metric_options;

/* bins 10, fp_weight 2, threshold 1e-3. */
CALSEG_API void calseg_metric_options_init(calseg_metric_options* options);

/* `probs` has dims (C, H, W) or (1, C, H, W); every label must be < C.
 * Either output pointer may be NULL. */
CALSEG_API calseg_status calseg_metrics(const calseg_tensor* probs,
                                        const calseg_mask* labels,
                                        const calseg_metric_options* options,
                                        char** report_json, char** bins_csv);

/* Signed distance of the nonzero pixels, dims (1, H, W). `normalization`
 * is "none" or "max_abs". */
CALSEG_API calseg_status calseg_sdf(const calseg_mask* mask,
                                    const char* normalization,
                                    calseg_tensor** out);

/* Per-class morphology with a square element of odd size `se_size`. Labels
 * must be < num_classes. */
CALSEG_API calseg_status calseg_morph(const calseg_mask* mask, const char* op,
                                      int se_size, int num_classes,
                                      calseg_mask** out);

/* Named text outputs of an experiment. */
typedef struct calseg_artifacts calseg_artifacts;

/* Runs "train-demo", "ablation", "sweep" or "theory" with options given as a
 * JSON object. Unset options take their defaults. */
CALSEG_API calseg_status calseg_run(const char* command,
                                    const char* options_json,
                                    calseg_artifacts** out);
CALSEG_API size_t calseg_artifacts_count(const calseg_artifacts* artifacts);
CALSEG_API const char* calseg_artifacts_name(const calseg_artifacts* artifacts,
                                             size_t i);
CALSEG_API const char* calseg_artifacts_content(
    const calseg_artifacts* artifacts, size_t i, size_t* length);
CALSEG_API void calseg_artifacts_free(calseg_artifacts* artifacts);

/* The resolved option set of `command` with every default filled in, as
 * JSON. Fails on unknown keys or bad values. */
CALSEG_API calseg_status calseg_resolve_options(const char* command,
                                                const char* options_json,
                                                char** resolved_json);

#ifdef __cplusplus
}
#endif

#endif /* CALSEG_CALSEG_H_ */
