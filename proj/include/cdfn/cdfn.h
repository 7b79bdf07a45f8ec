/*
 * Copyright 2026 The cdfn Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface of the cdfn library: layer-wise unsupervised feature
 * extraction networks, linear one-vs-all classifiers and score-fusion
 * committees.
 *
 * Every function returns a cdfn_status. On failure, cdfn_last_error()
 * returns a message for the calling thread that stays valid until the next
 * failing call on that thread. Objects are opaque; each *_free accepts NULL.
 */

#ifndef CDFN_CDFN_H_
#define CDFN_CDFN_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CDFN_API __declspec(dllexport)
#else
#define CDFN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cdfn_status {
  CDFN_OK = 0,
  CDFN_ERR_INDEX = 1,
  CDFN_ERR_NON_FINITE = 2,
  CDFN_ERR_FORMAT = 3,
  CDFN_ERR_INVALID_PATCH_SIZE = 4,
  CDFN_ERR_DIM = 5,
  CDFN_ERR_INVALID_K = 6,
  CDFN_ERR_INVALID_WINDOW = 7,
  CDFN_ERR_INVALID_GROUPING = 8,
  CDFN_ERR_DEGENERATE_LABELS = 9,
  CDFN_ERR_ALIGNMENT = 10,
  CDFN_ERR_CONTRACT = 11,
  CDFN_ERR_IO = 12,
  CDFN_ERR_CONFIG = 13,
  CDFN_ERR_INVALID_ARGUMENT = 14,
  CDFN_ERR_INTERNAL = 100
} cdfn_status;

typedef enum cdfn_normalization {
  CDFN_NORMALIZE_PER_IMAGE = 0,
  CDFN_NORMALIZE_PER_NETWORK = 1
} cdfn_normalization;

typedef struct cdfn_dataset cdfn_dataset;         /* grayscale labeled images */
typedef struct cdfn_fold_plan cdfn_fold_plan;     /* predefined training folds */
typedef struct cdfn_experiment cdfn_experiment;   /* parsed experiment config */
typedef struct cdfn_network cdfn_network;         /* trained feature extractor */
typedef struct cdfn_descriptors cdfn_descriptors; /* per-image descriptors */
typedef struct cdfn_svm cdfn_svm;                 /* one-vs-all linear SVM */
typedef struct cdfn_scores cdfn_scores;           /* score table of one network */
typedef struct cdfn_report cdfn_report;           /* fold protocol results */

typedef void (*cdfn_progress_fn)(const char* line, void* user);

CDFN_API const char* cdfn_version(void);
CDFN_API const char* cdfn_last_error(void);
CDFN_API const char* cdfn_status_name(cdfn_status status);

/* ---- datasets ---------------------------------------------------------- */

/* STL-10 binary image + label files. Image ids are file positions. */
CDFN_API cdfn_status cdfn_dataset_load_stl10(const char* images_path, const char* labels_path,
                                             cdfn_dataset** out);
/* count images of height x width, row-major pixels in [0,1], labels >= 0.
 * Image i gets id i. */
CDFN_API cdfn_status cdfn_dataset_from_pixels(const double* pixels, const int32_t* labels,
                                              size_t count, size_t height, size_t width,
                                              cdfn_dataset** out);
CDFN_API cdfn_status cdfn_dataset_select(const cdfn_dataset* set, const size_t* indices,
                                         size_t count, cdfn_dataset** out);
CDFN_API cdfn_status cdfn_dataset_size(const cdfn_dataset* set, size_t* count);
CDFN_API cdfn_status cdfn_dataset_label(const cdfn_dataset* set, size_t index, int32_t* label);
CDFN_API void cdfn_dataset_free(cdfn_dataset* set);

/* Text file, one line of zero-based indices per fold. Pass 0 for any of the
 * shape arguments to use the STL-10 values (10 folds, 1000, 5000). */
CDFN_API cdfn_status cdfn_fold_plan_load(const char* path, size_t num_folds, size_t fold_size,
                                         size_t num_images, cdfn_fold_plan** out);
CDFN_API cdfn_status cdfn_fold_plan_fold(const cdfn_fold_plan* plan, size_t fold,
                                         const size_t** indices, size_t* count);
CDFN_API void cdfn_fold_plan_free(cdfn_fold_plan* plan);

/* ---- configuration ----------------------------------------------------- */

CDFN_API cdfn_status cdfn_experiment_load(const char* path, cdfn_experiment** out);
CDFN_API cdfn_status cdfn_experiment_parse(const char* text, const char* base_dir,
                                           cdfn_experiment** out);
CDFN_API cdfn_status cdfn_experiment_network_count(const cdfn_experiment* exp, size_t* count);
/* Borrowed pointer valid for the lifetime of exp. */
CDFN_API cdfn_status cdfn_experiment_network_name(const cdfn_experiment* exp, size_t index,
                                                  const char** name);
/* Replaces every network's seeds with ones derived from base_seed. */
CDFN_API cdfn_status cdfn_experiment_set_seed(cdfn_experiment* exp, uint64_t base_seed);
/* Loads the experiment's STL-10 train/test files and fold plan. */
CDFN_API cdfn_status cdfn_experiment_load_data(const cdfn_experiment* exp, cdfn_dataset** train,
                                               cdfn_dataset** test, cdfn_fold_plan** plan);
CDFN_API void cdfn_experiment_free(cdfn_experiment* exp);

/* ---- networks ---------------------------------------------------------- */

/* Trains the named network of exp on images (augmented per its config).
 * fold >= 0 derives the per-fold seeds used by the evaluation protocol;
 * pass -1 to use the configured seeds as is. */
CDFN_API cdfn_status cdfn_network_train(const cdfn_experiment* exp, const char* network_name,
                                        const cdfn_dataset* images, int64_t fold,
                                        cdfn_progress_fn progress, void* user,
                                        cdfn_network** out);
CDFN_API cdfn_status cdfn_network_save(const cdfn_network* net, const char* path);
CDFN_API cdfn_status cdfn_network_load(const char* path, cdfn_network** out);
CDFN_API cdfn_status cdfn_network_name(const cdfn_network* net, const char** name);
CDFN_API cdfn_status cdfn_network_descriptor_dim(const cdfn_network* net, size_t* dim);
/* Descriptors of images after the network's rescaling; augment != 0 also
 * expands the set with the network's augmentation plan. */
CDFN_API cdfn_status cdfn_network_extract(const cdfn_network* net, const cdfn_dataset* images,
                                          int augment, cdfn_descriptors** out);
CDFN_API void cdfn_network_free(cdfn_network* net);

/* ---- descriptors ------------------------------------------------------- */

CDFN_API cdfn_status cdfn_descriptors_save(const cdfn_descriptors* d, const char* path);
CDFN_API cdfn_status cdfn_descriptors_load(const char* path, cdfn_descriptors** out);
CDFN_API cdfn_status cdfn_descriptors_shape(const cdfn_descriptors* d, size_t* count,
                                            size_t* dim);
/* Copies descriptor index into out (length dim). */
CDFN_API cdfn_status cdfn_descriptors_get(const cdfn_descriptors* d, size_t index, double* out,
                                          size_t out_len);
CDFN_API void cdfn_descriptors_free(cdfn_descriptors* d);

/* ---- classifier -------------------------------------------------------- */

/* reg_c <= 0 selects C by 5-fold cross-validation over {0.01, 0.1, 1, 10}. */
CDFN_API cdfn_status cdfn_svm_train(const cdfn_descriptors* train, double reg_c,
                                    cdfn_svm** out);
CDFN_API cdfn_status cdfn_svm_save(const cdfn_svm* svm, const char* path);
CDFN_API cdfn_status cdfn_svm_load(const char* path, cdfn_svm** out);
CDFN_API cdfn_status cdfn_svm_score(const cdfn_svm* svm, const cdfn_descriptors* d,
                                    const char* network_id, cdfn_scores** out);
CDFN_API void cdfn_svm_free(cdfn_svm* svm);

/* ---- scores and committees ---------------------------------------------- */

CDFN_API cdfn_status cdfn_scores_save(const cdfn_scores* s, const char* path);
CDFN_API cdfn_status cdfn_scores_load(const char* path, cdfn_scores** out);
CDFN_API cdfn_status cdfn_scores_shape(const cdfn_scores* s, size_t* images, size_t* classes);
CDFN_API cdfn_status cdfn_scores_row(const cdfn_scores* s, size_t index, int64_t* image_id,
                                     double* out, size_t out_len);
CDFN_API void cdfn_scores_free(cdfn_scores* s);

/* Normalizes each table, sums them and writes the argmax per image into
 * labels (length = image count). summed, when non-NULL, receives the
 * summed table. */
CDFN_API cdfn_status cdfn_committee_predict(const cdfn_scores* const* tables, size_t count,
                                            cdfn_normalization mode, int32_t* labels,
                                            size_t labels_len, cdfn_scores** summed);

/* ---- evaluation protocol ------------------------------------------------ */

/* Full fold protocol of exp. out_dir (may be NULL) receives score files and
 * report.txt / report.csv. fold >= 0 restricts the run to that fold. */
CDFN_API cdfn_status cdfn_evaluate(const cdfn_experiment* exp, const cdfn_dataset* train,
                                   const cdfn_dataset* test, const cdfn_fold_plan* plan,
                                   int64_t fold, const char* out_dir, cdfn_progress_fn progress,
                                   void* user, cdfn_report** out);
/* Recomputes a report from score files written by cdfn_evaluate. */
CDFN_API cdfn_status cdfn_report_from_scores(const cdfn_experiment* exp, const cdfn_dataset* test,
                                             const char* out_dir, cdfn_report** out);
CDFN_API cdfn_status cdfn_report_committee(const cdfn_report* r, double* mean, double* std_dev);
CDFN_API cdfn_status cdfn_report_network(const cdfn_report* r, const char* name, double* mean,
                                         double* std_dev);
/* Borrowed pointer valid for the lifetime of r. */
CDFN_API cdfn_status cdfn_report_text(const cdfn_report* r, const char** text);
CDFN_API cdfn_status cdfn_report_csv(const cdfn_report* r, const char** csv);
CDFN_API void cdfn_report_free(cdfn_report* r);

#ifdef __cplusplus
}
#endif

#endif /* CDFN_CDFN_H_ */
