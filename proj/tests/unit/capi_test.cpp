// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "aladin/aladin.h"

namespace {

std::string scratch(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

TEST(CApiTest, ConfigErrorsNameTheKey) {
  aladin_config* cfg = nullptr;
  ASSERT_EQ(aladin_config_new(&cfg), ALADIN_OK);
  EXPECT_STREQ(aladin_last_error(), "");
  EXPECT_EQ(aladin_config_set(cfg, "n_imags", "3"), ALADIN_INVALID_ARGUMENT);
  EXPECT_NE(std::string(aladin_last_error()).find("n_imags"), std::string::npos);
  EXPECT_EQ(aladin_config_set(cfg, "n_images", "0"), ALADIN_OK);
  aladin_corpus* corpus = nullptr;
  EXPECT_EQ(aladin_corpus_generate(cfg, &corpus), ALADIN_INVALID_ARGUMENT);
  EXPECT_EQ(corpus, nullptr);
  EXPECT_NE(std::string(aladin_last_error()).find("n_images"), std::string::npos);

  char* dump = nullptr;
  ASSERT_EQ(aladin_config_dump(cfg, &dump), ALADIN_OK);
  EXPECT_STREQ(dump, "n_images=0\n");
  aladin_string_free(dump);
  aladin_config_free(cfg);
}

TEST(CApiTest, NullArgumentsAreRejected) {
  EXPECT_EQ(aladin_config_new(nullptr), ALADIN_INVALID_ARGUMENT);
  EXPECT_EQ(aladin_model_save(nullptr, "x"), ALADIN_INVALID_ARGUMENT);
  EXPECT_EQ(aladin_corpus_images(nullptr), 0u);
  aladin_config_free(nullptr);
  aladin_model_free(nullptr);
}

TEST(CApiTest, FileErrors) {
  aladin_corpus* corpus = nullptr;
  EXPECT_EQ(aladin_corpus_read("/nonexistent/corpus.bin", &corpus), ALADIN_IO);
  const auto path = scratch("aladin_capi_garbage.bin");
  std::ofstream(path) << "not a checkpoint";
  aladin_model* model = nullptr;
  EXPECT_EQ(aladin_model_load(path.c_str(), &model), ALADIN_FORMAT);
  aladin_cache* cache = nullptr;
  EXPECT_EQ(aladin_cache_read(path.c_str(), &cache), ALADIN_FORMAT);
  std::remove(path.c_str());
}

TEST(CApiTest, SmallPipeline) {
  aladin_config* cfg = nullptr;
  ASSERT_EQ(aladin_config_new(&cfg), ALADIN_OK);
  ASSERT_EQ(aladin_config_set(cfg, "n_images", "60"), ALADIN_OK);
  ASSERT_EQ(aladin_config_set(cfg, "max_steps", "2"), ALADIN_OK);
  ASSERT_EQ(aladin_config_set(cfg, "batch_size", "8"), ALADIN_OK);
  ASSERT_EQ(aladin_config_set(cfg, "validate", "false"), ALADIN_OK);

  aladin_corpus* corpus = nullptr;
  ASSERT_EQ(aladin_corpus_generate(cfg, &corpus), ALADIN_OK);
  EXPECT_EQ(aladin_corpus_images(corpus), 60u);
  EXPECT_EQ(aladin_corpus_captions(corpus), 300u);

  aladin_model* model = nullptr;
  ASSERT_EQ(aladin_model_init(cfg, &model), ALADIN_OK);
  uint64_t steps = 0;
  EXPECT_EQ(aladin_train(model, corpus, "distill", cfg, nullptr, &steps), ALADIN_PRECONDITION);
  EXPECT_NE(std::string(aladin_last_error()).find("train-align"), std::string::npos);
  EXPECT_EQ(aladin_train(model, corpus, "nonsense", cfg, nullptr, &steps),
            ALADIN_INVALID_ARGUMENT);
  ASSERT_EQ(aladin_train(model, corpus, "align", cfg, nullptr, &steps), ALADIN_OK);
  EXPECT_EQ(steps, 2u);
  EXPECT_EQ(aladin_model_alignment_steps(model), 2u);
  ASSERT_EQ(aladin_train(model, corpus, "D", cfg, nullptr, &steps), ALADIN_OK);

  aladin_cache* cache = nullptr;
  EXPECT_EQ(aladin_cache_build(model, corpus, "holdout", &cache), ALADIN_INVALID_ARGUMENT);
  ASSERT_EQ(aladin_cache_build(model, corpus, "test", &cache), ALADIN_OK);
  EXPECT_EQ(aladin_cache_captions(cache), 5 * aladin_cache_images(cache));

  char* report = nullptr;
  ASSERT_EQ(aladin_evaluate(cache, corpus, "matching", 50, 1, &report), ALADIN_OK);
  EXPECT_NE(std::string(report).find("\"direction\":\"image_to_text\""), std::string::npos);
  aladin_string_free(report);

  aladin_hit hits[3];
  const uint32_t words[] = {1, 2, 250};
  EXPECT_EQ(aladin_search_text(model, cache, words, 3, "two-stage", 3, 50, hits), ALADIN_OK);
  EXPECT_GE(hits[0].score, hits[1].score);
  const uint32_t oov[] = {100000};
  EXPECT_EQ(aladin_search_text(model, cache, oov, 1, "alignment", 3, 50, hits),
            ALADIN_INVALID_ARGUMENT);
  EXPECT_EQ(aladin_search_image(model, cache, corpus, 9999, "matching", 3, 50, hits),
            ALADIN_INVALID_ARGUMENT);

  const auto ckpt = scratch("aladin_capi_model.ckpt");
  ASSERT_EQ(aladin_model_save(model, ckpt.c_str()), ALADIN_OK);
  char hex[65];
  ASSERT_EQ(aladin_sha256_file(ckpt.c_str(), hex), ALADIN_OK);
  EXPECT_EQ(std::string(hex).size(), 64u);
  aladin_model* again = nullptr;
  ASSERT_EQ(aladin_model_load(ckpt.c_str(), &again), ALADIN_OK);
  EXPECT_EQ(aladin_model_alignment_steps(again), 2u);
  std::remove(ckpt.c_str());

  aladin_model_free(again);
  aladin_cache_free(cache);
  aladin_model_free(model);
  aladin_corpus_free(corpus);
  aladin_config_free(cfg);
}

}  // namespace
