/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef FLOOD_DETECT_H
#define FLOOD_DETECT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. Values are stable.
typedef enum FdStatus {
  FD_STATUS_OK = 0,
  FD_STATUS_NULL_ARGUMENT = 1,
  FD_STATUS_INVALID_UTF8 = 2,
  FD_STATUS_IO = 3,
  FD_STATUS_PARSE = 4,
  FD_STATUS_VALIDATION = 5,
  FD_STATUS_DIMENSION = 6,
  FD_STATUS_MISSING_FEATURES = 7,
  FD_STATUS_EMPTY_VOCABULARY = 8,
  FD_STATUS_INVALID_ARGUMENT = 9,
  FD_STATUS_CONFIG = 10,
  FD_STATUS_MISSING_INPUT = 11,
  FD_STATUS_PANIC = 99,
} FdStatus;

// Opaque loaded dataset.
typedef struct FdDataset FdDataset;

// Opaque trained model.
typedef struct FdModel FdModel;

// Class posterior; the two fields sum to one.
typedef struct FdPosterior {
  double p_neg;
  double p_pos;
} FdPosterior;

// Confusion counts and scores for the Relevant class.
typedef struct FdEvalReport {
  uint64_t tp;
  uint64_t fp;
  uint64_t fn_;
  uint64_t tn;
  double precision;
  double recall;
  double f1;
} FdEvalReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *fd_last_error(void);

// Loads a CSV or JSON-lines dataset. `format` is `"csv"`, `"jsonl"` or null
// to infer from the extension.
//
// # Safety
// `path` and a non-null `format` must be NUL-terminated strings; `out` must
// be writable.
enum FdStatus fd_dataset_load(const char *path, const char *format, struct FdDataset **out);

// Number of records, or 0 for a null handle.
//
// # Safety
// `ds` must be null or a live handle from [`fd_dataset_load`].
size_t fd_dataset_len(const struct FdDataset *ds);

// Writes the Relevant, NotRelevant and unlabeled counts. Any out pointer may
// be null.
//
// # Safety
// `ds` must be a live handle; non-null out pointers must be writable.
enum FdStatus fd_dataset_counts(const struct FdDataset *ds,
                                size_t *positive,
                                size_t *negative,
                                size_t *unlabeled);

// # Safety
// `ds` must be null or a handle not yet freed.
void fd_dataset_free(struct FdDataset *ds);

// Loads a model written by `flood-detect train`.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum FdStatus fd_model_load(const char *path, struct FdModel **out);

// Input dimension the model expects, or 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle.
size_t fd_model_dim(const struct FdModel *model);

// Scores one feature vector of length `len`.
//
// # Safety
// `model` must be a live handle, `x` must point to `len` doubles and `out`
// must be writable.
enum FdStatus fd_model_predict(const struct FdModel *model,
                               const double *x,
                               size_t len,
                               struct FdPosterior *out);

// # Safety
// `model` must be null or a handle not yet freed.
void fd_model_free(struct FdModel *model);

// Weighted mean of `n` posteriors.
//
// # Safety
// `posteriors` and `weights` must each point to `n` elements; `out` must be
// writable.
enum FdStatus fd_fuse(const struct FdPosterior *posteriors,
                      const double *weights,
                      size_t n,
                      struct FdPosterior *out);

// 1 for Relevant, 0 for NotRelevant; ties are Relevant.
int fd_decide(struct FdPosterior p);

// Scores `n` 0/1 predictions against 0/1 labels.
//
// # Safety
// `labels` and `preds` must each point to `n` bytes; `out` must be writable.
enum FdStatus fd_score_binary(const uint8_t *labels,
                              const uint8_t *preds,
                              size_t n,
                              struct FdEvalReport *out);

// Executes a run config, writing its output files, and reports the fused
// dev score. `preset` overrides the config's preset when non-null.
//
// # Safety
// `config` and a non-null `preset` must be NUL-terminated strings; `out`
// must be null or writable.
enum FdStatus fd_run(const char *config, const char *preset, struct FdEvalReport *out);

// Cleans `text` and writes its tokens joined by single spaces. A null
// `stopwords_path` uses the built-in Italian list.
//
// # Safety
// `text` and a non-null `stopwords_path` must be NUL-terminated strings;
// `out` must be writable. Free the result with [`fd_string_free`].
enum FdStatus fd_preprocess(const char *text, const char *stopwords_path, char **out);

// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void fd_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLOOD_DETECT_H */
