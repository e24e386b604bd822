#ifndef TRIDIFF_H
#define TRIDIFF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum TridiffStatus {
  TRIDIFF_STATUS_OK = 0,
  TRIDIFF_STATUS_NULL_POINTER = 1,
  TRIDIFF_STATUS_INVALID_ARGUMENT = 2,
  TRIDIFF_STATUS_INDEX_OUT_OF_RANGE = 3,
  TRIDIFF_STATUS_UNKNOWN_ID = 4,
  TRIDIFF_STATUS_EMPTY_DATASET = 5,
  TRIDIFF_STATUS_UNDEFINED_METRIC = 6,
  TRIDIFF_STATUS_IO = 7,
  TRIDIFF_STATUS_PARSE = 8,
  TRIDIFF_STATUS_BUFFER_TOO_SMALL = 9,
  TRIDIFF_STATUS_PANIC = 10,
} TridiffStatus;

typedef enum TridiffMeasure {
  TRIDIFF_MEASURE_DIFFUSION = 0,
  TRIDIFF_MEASURE_COSINE = 1,
  TRIDIFF_MEASURE_JACCARD = 2,
} TridiffMeasure;

typedef enum TridiffMetric {
  TRIDIFF_METRIC_RANK_SCORE = 0,
  /**
   * Needs a list length.
   */
  TRIDIFF_METRIC_RECALL = 1,
  /**
   * Needs a list length.
   */
  TRIDIFF_METRIC_PRECISION = 2,
} TridiffMetric;

/**
 * Opaque dataset handle.
 */
typedef struct TridiffDataset TridiffDataset;

/**
 * Opaque experiment report handle.
 */
typedef struct TridiffReport TridiffReport;

/**
 * Sweep configuration. `list_lengths` points at `list_lengths_len` values.
 */
typedef struct TridiffExperimentConfig {
  enum TridiffMeasure measure;
  double lambda_min;
  double lambda_max;
  double lambda_step;
  uint32_t runs;
  double train_fraction;
  uint64_t base_seed;
  const uint32_t *list_lengths;
  size_t list_lengths_len;
} TridiffExperimentConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *tridiff_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tridiff_version(void);

/**
 * Parses rating and tag files, applies the core filter and returns the
 * dataset. Ratings below `rating_threshold` are dropped (0 keeps all).
 * Malformed lines are skipped; their count is written to `out_bad_lines`
 * when it is not NULL.
 */
enum TridiffStatus tridiff_dataset_from_files(const char *objects_path,
                                              const char *tags_path,
                                              int32_t rating_threshold,
                                              struct TridiffDataset **out_dataset,
                                              size_t *out_bad_lines);

/**
 * Loads a dataset written by `tridiff ingest` or [`tridiff_dataset_save`].
 */
enum TridiffStatus tridiff_dataset_load(const char *dir, struct TridiffDataset **out_dataset);

enum TridiffStatus tridiff_dataset_save(const struct TridiffDataset *dataset, const char *dir);

/**
 * Releases a dataset. NULL is ignored.
 */
void tridiff_dataset_free(struct TridiffDataset *dataset);

/**
 * Entity and edge counts. Any out pointer may be NULL.
 */
enum TridiffStatus tridiff_dataset_counts(const struct TridiffDataset *dataset,
                                          size_t *out_users,
                                          size_t *out_objects,
                                          size_t *out_tags,
                                          size_t *out_object_edges,
                                          size_t *out_tag_edges);

/**
 * Dense index of the user with external id `user_id`.
 */
enum TridiffStatus tridiff_dataset_user_index(const struct TridiffDataset *dataset,
                                              const char *user_id,
                                              uint32_t *out_index);

/**
 * Copies the external id of object `index` into `buf` (NUL-terminated).
 * `out_len` receives the id length excluding the terminator.
 */
enum TridiffStatus tridiff_dataset_object_id(const struct TridiffDataset *dataset,
                                             uint32_t index,
                                             char *buf,
                                             size_t capacity,
                                             size_t *out_len);

/**
 * Fused similarity row of `user`: `λ·object + (1−λ)·tag`, as parallel
 * arrays of user indices (ascending) and scores.
 */
enum TridiffStatus tridiff_similarity_row(const struct TridiffDataset *dataset,
                                          enum TridiffMeasure measure,
                                          double lambda,
                                          uint32_t user,
                                          uint32_t *out_users,
                                          double *out_scores,
                                          size_t capacity,
                                          size_t *out_len);

/**
 * Top-`list_length` recommendations for `user`, best first, as parallel
 * arrays of object indices and scores. The list may be shorter than
 * `list_length` when fewer objects score above zero.
 */
enum TridiffStatus tridiff_recommend(const struct TridiffDataset *dataset,
                                     enum TridiffMeasure measure,
                                     double lambda,
                                     uint32_t user,
                                     size_t list_length,
                                     uint32_t *out_objects,
                                     double *out_scores,
                                     size_t capacity,
                                     size_t *out_len);

/**
 * Fills `out` with the default sweep: diffusion, λ = 0, 0.02, …, 1, five
 * runs at a 90/10 split, base seed 0, list lengths 10 and 20.
 */
enum TridiffStatus tridiff_experiment_config_default(struct TridiffExperimentConfig *out);

/**
 * Runs the repeated hold-out sweep.
 */
enum TridiffStatus tridiff_run_experiment(const struct TridiffDataset *dataset,
                                          const struct TridiffExperimentConfig *config,
                                          struct TridiffReport **out_report);

/**
 * Releases a report. NULL is ignored.
 */
void tridiff_report_free(struct TridiffReport *report);

/**
 * Number of cells (λ values × runs).
 */
enum TridiffStatus tridiff_report_cell_count(const struct TridiffReport *report, size_t *out_count);

/**
 * Mean of `metric` over runs at grid value `lambda`. `list_length` is
 * ignored for the rank score.
 */
enum TridiffStatus tridiff_report_mean(const struct TridiffReport *report,
                                       enum TridiffMetric metric,
                                       uint32_t list_length,
                                       double lambda,
                                       double *out_value);

/**
 * Best grid point for `metric`: lowest rank score, highest recall or
 * precision.
 */
enum TridiffStatus tridiff_report_optimum(const struct TridiffReport *report,
                                          enum TridiffMetric metric,
                                          uint32_t list_length,
                                          double *out_lambda,
                                          double *out_value);

/**
 * Writes the per-cell CSV table to `path`.
 */
enum TridiffStatus tridiff_report_write_cells_csv(const struct TridiffReport *report,
                                                  const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRIDIFF_H */
