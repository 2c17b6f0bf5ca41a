// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ALADIN_ALADIN_H_
#define ALADIN_ALADIN_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ALADIN_API __declspec(dllexport)
#else
#define ALADIN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum aladin_status {
  ALADIN_OK = 0,
  ALADIN_INVALID_ARGUMENT = 1,
  ALADIN_IO = 2,
  ALADIN_FORMAT = 3,
  ALADIN_PRECONDITION = 4,
  ALADIN_DIMENSION = 5,
  ALADIN_NUMERIC = 6,
  ALADIN_INTERNAL = 7
} aladin_status;

typedef struct aladin_config aladin_config;
typedef struct aladin_corpus aladin_corpus;
typedef struct aladin_model aladin_model;
typedef struct aladin_cache aladin_cache;

typedef struct aladin_hit {
  uint64_t id;
  double score;
} aladin_hit;

/* Message for the last failed call on this thread; empty if none. */
ALADIN_API const char* aladin_last_error(void);
ALADIN_API const char* aladin_version(void);

/* Strings handed out by the library are released with this. */
ALADIN_API void aladin_string_free(char* s);

/* Flat key=value configuration. Unknown keys are rejected on load/set. */
ALADIN_API aladin_status aladin_config_new(aladin_config** out);
ALADIN_API aladin_status aladin_config_load(const char* path, aladin_config** out);
ALADIN_API aladin_status aladin_config_set(aladin_config* cfg, const char* key,
                                           const char* value);
ALADIN_API aladin_status aladin_config_get_u64(const aladin_config* cfg, const char* key,
                                               uint64_t fallback, uint64_t* out);
ALADIN_API aladin_status aladin_config_dump(const aladin_config* cfg, char** out);
ALADIN_API void aladin_config_free(aladin_config* cfg);

/* Synthetic paired corpus. */
ALADIN_API aladin_status aladin_corpus_generate(const aladin_config* cfg, aladin_corpus** out);
ALADIN_API aladin_status aladin_corpus_read(const char* path, aladin_corpus** out);
ALADIN_API aladin_status aladin_corpus_write(const aladin_corpus* corpus, const char* path);
ALADIN_API uint64_t aladin_corpus_images(const aladin_corpus* corpus);
ALADIN_API uint64_t aladin_corpus_captions(const aladin_corpus* corpus);
ALADIN_API void aladin_corpus_free(aladin_corpus* corpus);

/* Backbone plus matching head. */
ALADIN_API aladin_status aladin_model_init(const aladin_config* cfg, aladin_model** out);
ALADIN_API aladin_status aladin_model_load(const char* path, aladin_model** out);
ALADIN_API aladin_status aladin_model_save(const aladin_model* model, const char* path);
ALADIN_API uint64_t aladin_model_alignment_steps(const aladin_model* model);
ALADIN_API void aladin_model_free(aladin_model* model);

/* Runs a scheme ("align", "distill", "triplet", "triplet-ft", "joint" or the
 * short names) on the corpus train split. Per-step metric lines go to
 * metrics_path when it is non-null. */
ALADIN_API aladin_status aladin_train(aladin_model* model, const aladin_corpus* corpus,
                                      const char* scheme, const aladin_config* cfg,
                                      const char* metrics_path, uint64_t* steps_out);

/* Offline encodes of one split ("train", "val", "test"). */
ALADIN_API aladin_status aladin_cache_build(const aladin_model* model,
                                            const aladin_corpus* corpus, const char* split,
                                            aladin_cache** out);
ALADIN_API aladin_status aladin_cache_read(const char* path, aladin_cache** out);
ALADIN_API aladin_status aladin_cache_write(const aladin_cache* cache, const char* path);
ALADIN_API uint64_t aladin_cache_images(const aladin_cache* cache);
ALADIN_API uint64_t aladin_cache_captions(const aladin_cache* cache);
ALADIN_API void aladin_cache_free(aladin_cache* cache);

/* Recall over every cached item as a query. Writes two JSON lines
 * (text_to_image, image_to_text). source: "alignment", "matching",
 * "two-stage". */
ALADIN_API aladin_status aladin_evaluate(const aladin_cache* cache, const aladin_corpus* corpus,
                                         const char* source, uint64_t k1, uint64_t folds,
                                         char** json_lines);

/* Query by word ids or by the regions of a corpus image. `hits` must hold k
 * entries. */
ALADIN_API aladin_status aladin_search_text(const aladin_model* model, const aladin_cache* cache,
                                            const uint32_t* words, size_t n_words,
                                            const char* source, size_t k, size_t k1,
                                            aladin_hit* hits);
ALADIN_API aladin_status aladin_search_image(const aladin_model* model, const aladin_cache* cache,
                                             const aladin_corpus* corpus, uint64_t image_id,
                                             const char* source, size_t k, size_t k1,
                                             aladin_hit* hits);

/* Latency benchmark; one JSON line per pipeline. */
ALADIN_API aladin_status aladin_bench(const aladin_model* model, const aladin_corpus* corpus,
                                      const aladin_config* cfg, char** json_lines);

/* Lowercase hex SHA-256 of a file; `out` needs 65 bytes. */
ALADIN_API aladin_status aladin_sha256_file(const char* path, char* out);

#ifdef __cplusplus
}
#endif

#endif  // ALADIN_ALADIN_H_
