#ifndef GRAPHSPARSE_H
#define GRAPHSPARSE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GsLoss {
  GS_LOSS_LOGISTIC = 0,
  GS_LOSS_SQUARED = 1,
} GsLoss;

typedef enum GsStatus {
  GS_STATUS_OK = 0,
  GS_STATUS_NULL_POINTER = 1,
  GS_STATUS_INVALID_UTF8 = 2,
  GS_STATUS_PARSE = 3,
  GS_STATUS_VALIDATION = 4,
  GS_STATUS_NUMERICAL = 5,
  GS_STATUS_IO = 6,
  GS_STATUS_INTERNAL = 7,
} GsStatus;

/**
 * Parsed, validated graph dataset.
 */
typedef struct GsDataset GsDataset;

/**
 * Fitted sparse model.
 */
typedef struct GsModel GsModel;

/**
 * Training settings; obtain defaults from [`gs_fit_config_default`].
 */
typedef struct GsFitConfig {
  enum GsLoss loss;
  double lambda1;
  double lambda2;
  double sigma;
  double backtrack;
  double gamma;
  double gsr_v;
  double eps;
  uint64_t max_iter;
  /**
   * Pattern size limit in edges; negative means unlimited.
   */
  int64_t max_edges;
  bool prune;
} GsFitConfig;

/**
 * Summary of a finished fit.
 */
typedef struct GsFitInfo {
  uint64_t iterations;
  bool converged;
  double objective;
  double train_error;
} GsFitInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *gs_last_error_message(void);

/**
 * Parses a dataset from NUL-terminated text in the `t # id label` format.
 *
 * # Safety
 * `text` must be a valid C string and `out` a writable pointer.
 */
enum GsStatus gs_dataset_parse(const char *text, struct GsDataset **out);

/**
 * Loads a dataset file.
 *
 * # Safety
 * `path` must be a valid C string and `out` a writable pointer.
 */
enum GsStatus gs_dataset_load(const char *path, struct GsDataset **out);

/**
 * Number of graphs; 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
size_t gs_dataset_len(const struct GsDataset *ds);

/**
 * # Safety
 * `ds` must be null or a handle not yet freed.
 */
void gs_dataset_free(struct GsDataset *ds);

struct GsFitConfig gs_fit_config_default(void);

/**
 * Fits a model. `info` may be null.
 *
 * # Safety
 * `ds` and `config` must be live pointers, `out` writable, `info` null or
 * writable.
 */
enum GsStatus gs_fit(const struct GsDataset *ds,
                     const struct GsFitConfig *config,
                     struct GsModel **out,
                     struct GsFitInfo *info);

/**
 * Writes the model output `mu` for every graph of `ds` into `out[0..len)`;
 * `len` must equal the dataset size.
 *
 * # Safety
 * `model` and `ds` must be live handles and `out` must hold `len` doubles.
 */
enum GsStatus gs_model_predict(const struct GsModel *model,
                               const struct GsDataset *ds,
                               double *out,
                               size_t len);

/**
 * Intercept; NaN for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
double gs_model_intercept(const struct GsModel *model);

/**
 * Number of features with nonzero coefficient; 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t gs_model_feature_count(const struct GsModel *model);

/**
 * # Safety
 * `model` must be a live handle and `path` a valid C string.
 */
enum GsStatus gs_model_save(const struct GsModel *model, const char *path);

/**
 * # Safety
 * `path` must be a valid C string and `out` a writable pointer.
 */
enum GsStatus gs_model_load(const char *path, struct GsModel **out);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void gs_model_free(struct GsModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRAPHSPARSE_H */
