#ifndef BFST_H
#define BFST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum BfstStatus {
  BFST_STATUS_OK = 0,
  BFST_STATUS_NULL_POINTER = 1,
  BFST_STATUS_INVALID_UTF8 = 2,
  BFST_STATUS_IO = 3,
  BFST_STATUS_PARSE = 4,
  BFST_STATUS_BUDGET_EXCEEDED = 5,
  BFST_STATUS_UNKNOWN_SYMBOL = 6,
  BFST_STATUS_LIMIT_EXCEEDED = 7,
  BFST_STATUS_NO_RESULT = 8,
  BFST_STATUS_INTERNAL = 9,
} BfstStatus;

/**
 * A compiled transducer.
 */
typedef struct BfstFst BfstFst;

/**
 * A trained HMM.
 */
typedef struct BfstModel BfstModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *bfst_last_error(void);

/**
 * Loads an HMMv1 model file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum BfstStatus bfst_model_load(const char *path, struct BfstModel **out);

/**
 * Parses a model from HMMv1 text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a writable pointer.
 */
enum BfstStatus bfst_model_from_text(const char *text, struct BfstModel **out);

/**
 * # Safety
 * `model` must come from this library and not be used afterwards. Null is ignored.
 */
void bfst_model_free(struct BfstModel *model);

/**
 * # Safety
 * `model` must be a live handle or null (which yields 0).
 */
size_t bfst_model_num_tags(const struct BfstModel *model);

/**
 * # Safety
 * `model` must be a live handle or null (which yields 0).
 */
size_t bfst_model_num_classes(const struct BfstModel *model);

/**
 * Compiles the b-type transducer with look-back `beta` and look-ahead
 * `alpha`. `max_states` bounds every intermediate automaton; 0 means the
 * library default.
 *
 * # Safety
 * `model` must be a live handle and `out` a writable pointer.
 */
enum BfstStatus bfst_compile(const struct BfstModel *model,
                             size_t beta,
                             size_t alpha,
                             size_t max_states,
                             struct BfstFst **out);

/**
 * Loads an FSTv1 file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum BfstStatus bfst_fst_load(const char *path, struct BfstFst **out);

/**
 * Writes an FSTv1 file.
 *
 * # Safety
 * `fst` must be a live handle and `path` a NUL-terminated string.
 */
enum BfstStatus bfst_fst_save(const struct BfstFst *fst, const char *path);

/**
 * # Safety
 * `fst` must come from this library and not be used afterwards. Null is ignored.
 */
void bfst_fst_free(struct BfstFst *fst);

/**
 * # Safety
 * `fst` must be a live handle or null (which yields 0).
 */
size_t bfst_fst_num_states(const struct BfstFst *fst);

/**
 * # Safety
 * `fst` must be a live handle or null (which yields 0).
 */
size_t bfst_fst_num_arcs(const struct BfstFst *fst);

/**
 * First tag sequence the transducer gives for `n` class names, as tag names
 * separated by single spaces.
 *
 * # Safety
 * Handles must be live, `classes` must point to `n` NUL-terminated strings,
 * and `out` must be writable. Free the result with [`bfst_string_free`].
 */
enum BfstStatus bfst_fst_first(const struct BfstModel *model,
                               const struct BfstFst *fst,
                               const char *const *classes,
                               size_t n,
                               char **out);

/**
 * Number of distinct tag sequences for `n` class names; fails with
 * `LimitExceeded` above `limit`.
 *
 * # Safety
 * Handles must be live, `classes` must point to `n` NUL-terminated strings,
 * and `out` must be writable.
 */
enum BfstStatus bfst_fst_count(const struct BfstModel *model,
                               const struct BfstFst *fst,
                               const char *const *classes,
                               size_t n,
                               size_t limit,
                               size_t *out);

/**
 * Most likely tag sequence under the HMM, formatted like [`bfst_fst_first`].
 *
 * # Safety
 * `model` must be live, `classes` must point to `n` NUL-terminated strings,
 * and `out` must be writable. Free the result with [`bfst_string_free`].
 */
enum BfstStatus bfst_viterbi(const struct BfstModel *model,
                             const char *const *classes,
                             size_t n,
                             char **out);

/**
 * # Safety
 * `s` must be a string returned by this library, or null.
 */
void bfst_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* BFST_H */
