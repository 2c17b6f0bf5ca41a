// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include "aladin/aladin.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "common/config.hpp"
#include "common/error.hpp"
#include "common/hash.hpp"
#include "corpus/corpus.hpp"
#include "model/model.hpp"
#include "retrieval/bench.hpp"
#include "retrieval/cache.hpp"
#include "retrieval/report.hpp"
#include "retrieval/search.hpp"
#include "train/trainer.hpp"

struct aladin_config {
  aladin::KeyValueConfig kv;
};
struct aladin_corpus {
  aladin::corpus::PairedCorpus corpus;
};
struct aladin_model {
  aladin::model::Model model;
};
struct aladin_cache {
  explicit aladin_cache(aladin::retrieval::FeatureCache c) : cache(std::move(c)) {}
  aladin::retrieval::FeatureCache cache;
};

namespace {

using namespace aladin;

thread_local std::string g_last_error;

aladin_status fail(aladin_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
aladin_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return ALADIN_OK;
  } catch (const Error& e) {
    return fail(static_cast<aladin_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(ALADIN_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ALADIN_INTERNAL, e.what());
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) throw InvalidArgument(std::string(what) + " is null");
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const KeyValueConfig& kv_or_empty(const aladin_config* cfg) {
  static const KeyValueConfig empty;
  return cfg ? cfg->kv : empty;
}

void copy_hits(const std::vector<retrieval::Hit>& hits, aladin_hit* out) {
  for (std::size_t i = 0; i < hits.size(); ++i) out[i] = {hits[i].id, hits[i].score};
}

std::vector<retrieval::Hit> run_search(const retrieval::Query& q,
                                       const retrieval::FeatureCache& cache,
                                       const char* source, std::size_t k, std::size_t k1) {
  switch (retrieval::parse_source(source ? source : "two-stage")) {
    case retrieval::ScoreSource::kAlignment:
      return retrieval::alignment_search(q, cache, k);
    case retrieval::ScoreSource::kMatching:
      return retrieval::knn_query(q.embedding, cache, q.target(), k);
    case retrieval::ScoreSource::kTwoStage:
      // Small collections: the candidate list cannot exceed the collection.
      return retrieval::two_stage_search(
          q, cache, std::min(k1, cache.items(q.target()).size()), k);
  }
  throw Error(ErrorCode::kInternal, "search: unhandled source");
}

}  // namespace

extern "C" {

const char* aladin_last_error(void) { return g_last_error.c_str(); }

const char* aladin_version(void) { return "0.1.0"; }

void aladin_string_free(char* s) { std::free(s); }

aladin_status aladin_config_new(aladin_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new aladin_config();
  });
}

aladin_status aladin_config_load(const char* path, aladin_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto cfg = std::make_unique<aladin_config>();
    cfg->kv = KeyValueConfig::load(path);
    cfg->kv.require_known(all_config_keys());
    *out = cfg.release();
  });
}

aladin_status aladin_config_set(aladin_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    KeyValueConfig probe;
    probe.set(key, value);
    probe.require_known(all_config_keys());
    cfg->kv.set(key, value);
  });
}

aladin_status aladin_config_get_u64(const aladin_config* cfg, const char* key,
                                    uint64_t fallback, uint64_t* out) {
  return guarded([&] {
    need(key, "key");
    need(out, "out");
    *out = kv_or_empty(cfg).get_u64(key, fallback);
  });
}

aladin_status aladin_config_dump(const aladin_config* cfg, char** out) {
  return guarded([&] {
    need(out, "out");
    *out = copy_string(kv_or_empty(cfg).dump());
  });
}

void aladin_config_free(aladin_config* cfg) { delete cfg; }

aladin_status aladin_corpus_generate(const aladin_config* cfg, aladin_corpus** out) {
  return guarded([&] {
    need(out, "out");
    auto c = std::make_unique<aladin_corpus>();
    c->corpus = corpus::generate(corpus::CorpusConfig::from(kv_or_empty(cfg)));
    *out = c.release();
  });
}

aladin_status aladin_corpus_read(const char* path, aladin_corpus** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto c = std::make_unique<aladin_corpus>();
    c->corpus = corpus::read(path);
    *out = c.release();
  });
}

aladin_status aladin_corpus_write(const aladin_corpus* c, const char* path) {
  return guarded([&] {
    need(c, "corpus");
    need(path, "path");
    corpus::write(c->corpus, path);
  });
}

uint64_t aladin_corpus_images(const aladin_corpus* c) { return c ? c->corpus.images.size() : 0; }

uint64_t aladin_corpus_captions(const aladin_corpus* c) {
  return c ? c->corpus.captions.size() : 0;
}

void aladin_corpus_free(aladin_corpus* c) { delete c; }

aladin_status aladin_model_init(const aladin_config* cfg, aladin_model** out) {
  return guarded([&] {
    need(out, "out");
    const KeyValueConfig& kv = kv_or_empty(cfg);
    model::ModelConfig mc = model::ModelConfig::from(kv);
    // The vocabulary follows the corpus unless pinned explicitly.
    if (!kv.has("vocab")) mc.vocab = corpus::CorpusConfig::from(kv).vocab_size();
    auto m = std::make_unique<aladin_model>();
    m->model = model::Model::init(mc);
    *out = m.release();
  });
}

aladin_status aladin_model_load(const char* path, aladin_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto m = std::make_unique<aladin_model>();
    m->model = model::Model::load(path);
    *out = m.release();
  });
}

aladin_status aladin_model_save(const aladin_model* m, const char* path) {
  return guarded([&] {
    need(m, "model");
    need(path, "path");
    m->model.save(path);
  });
}

uint64_t aladin_model_alignment_steps(const aladin_model* m) {
  return m ? m->model.alignment_steps : 0;
}

void aladin_model_free(aladin_model* m) { delete m; }

aladin_status aladin_train(aladin_model* m, const aladin_corpus* c, const char* scheme,
                           const aladin_config* cfg, const char* metrics_path,
                           uint64_t* steps_out) {
  return guarded([&] {
    need(m, "model");
    need(c, "corpus");
    need(scheme, "scheme");
    const auto s = train::parse_scheme(scheme);
    const auto tc = train::TrainConfig::from(kv_or_empty(cfg));
    std::ofstream metrics;
    if (metrics_path != nullptr) {
      metrics.open(metrics_path, std::ios::trunc);
      if (!metrics) throw IoError(std::string("cannot open metrics file ") + metrics_path);
    }
    const auto summary =
        train::train(m->model, c->corpus, s, tc, metrics_path ? &metrics : nullptr);
    if (steps_out) *steps_out = summary.steps;
  });
}

aladin_status aladin_cache_build(const aladin_model* m, const aladin_corpus* c,
                                 const char* split, aladin_cache** out) {
  return guarded([&] {
    need(m, "model");
    need(c, "corpus");
    need(split, "split");
    need(out, "out");
    *out = new aladin_cache(retrieval::build_cache(m->model, c->corpus, corpus::parse_split(split)));
  });
}

aladin_status aladin_cache_read(const char* path, aladin_cache** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new aladin_cache(retrieval::read_cache(path));
  });
}

aladin_status aladin_cache_write(const aladin_cache* cache, const char* path) {
  return guarded([&] {
    need(cache, "cache");
    need(path, "path");
    retrieval::write(cache->cache, path);
  });
}

uint64_t aladin_cache_images(const aladin_cache* cache) {
  return cache ? cache->cache.items(model::Modality::kImage).size() : 0;
}

uint64_t aladin_cache_captions(const aladin_cache* cache) {
  return cache ? cache->cache.items(model::Modality::kText).size() : 0;
}

void aladin_cache_free(aladin_cache* cache) { delete cache; }

aladin_status aladin_evaluate(const aladin_cache* cache, const aladin_corpus* c,
                              const char* source, uint64_t k1, uint64_t folds,
                              char** json_lines) {
  return guarded([&] {
    need(cache, "cache");
    need(c, "corpus");
    need(json_lines, "out");
    retrieval::EvalOptions opt;
    opt.source = retrieval::parse_source(source ? source : "alignment");
    opt.k1 = k1;
    opt.folds = folds == 0 ? 1 : folds;
    const auto r = retrieval::evaluate(cache->cache, c->corpus, opt);
    *json_lines = copy_string(retrieval::to_json_line(r.text_to_image) + "\n" +
                              retrieval::to_json_line(r.image_to_text) + "\n");
  });
}

aladin_status aladin_search_text(const aladin_model* m, const aladin_cache* cache,
                                 const uint32_t* words, size_t n_words, const char* source,
                                 size_t k, size_t k1, aladin_hit* hits) {
  return guarded([&] {
    need(m, "model");
    need(cache, "cache");
    need(words, "words");
    need(hits, "hits");
    const auto q = retrieval::encode_query(m->model, std::span<const std::uint32_t>(words, n_words));
    copy_hits(run_search(q, cache->cache, source, k, k1), hits);
  });
}

aladin_status aladin_search_image(const aladin_model* m, const aladin_cache* cache,
                                  const aladin_corpus* c, uint64_t image_id, const char* source,
                                  size_t k, size_t k1, aladin_hit* hits) {
  return guarded([&] {
    need(m, "model");
    need(cache, "cache");
    need(c, "corpus");
    need(hits, "hits");
    if (image_id >= c->corpus.images.size()) {
      throw InvalidArgument("search: image id " + std::to_string(image_id) + " not in corpus");
    }
    const auto q = retrieval::encode_query(m->model, c->corpus.regions(image_id));
    copy_hits(run_search(q, cache->cache, source, k, k1), hits);
  });
}

aladin_status aladin_bench(const aladin_model* m, const aladin_corpus* c,
                           const aladin_config* cfg, char** json_lines) {
  return guarded([&] {
    need(m, "model");
    need(c, "corpus");
    need(json_lines, "out");
    const auto timings =
        retrieval::bench(m->model, c->corpus, retrieval::BenchConfig::from(kv_or_empty(cfg)));
    std::string text;
    for (const auto& t : timings) text += retrieval::to_json_line(t) + "\n";
    *json_lines = copy_string(text);
  });
}

aladin_status aladin_sha256_file(const char* path, char* out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    const std::string hex = file_sha256_hex(path);
    std::memcpy(out, hex.c_str(), hex.size() + 1);
  });
}

}  // extern "C"
