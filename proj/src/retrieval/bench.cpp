// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include "retrieval/bench.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "align/alignment.hpp"
#include "common/error.hpp"
#include "retrieval/cache.hpp"
#include "retrieval/search.hpp"

namespace aladin::retrieval {
namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Re-encodes the query next to every caption and scores each pair.
std::vector<Hit> full_forward_query(const model::Model& model,
                                    const corpus::PairedCorpus& corpus,
                                    const FeatureCache& cache, const Tensor& regions,
                                    std::size_t k) {
  const auto& captions = cache.items(Modality::kText);
  const std::vector<Tensor> image = {regions};
  std::vector<double> scores(captions.size());
  for (std::size_t l = 0; l < captions.size(); ++l) {
    const std::vector<std::vector<std::uint32_t>> words = {corpus.captions[captions[l].id].words};
    const auto seqs = model.backbone.encode_batch(image, words);
    scores[l] = align::pool_mrsw(align::alignment_matrix(seqs[0], seqs[1]));
  }
  std::vector<std::size_t> idx(captions.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
                    });
  std::vector<Hit> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back({captions[idx[i]].id, scores[idx[i]]});
  return out;
}

}  // namespace

BenchConfig BenchConfig::from(const KeyValueConfig& cfg) {
  BenchConfig c;
  c.n = cfg.get_u64("bench_n", c.n);
  c.repetitions = cfg.get_u64("bench_reps", c.repetitions);
  c.warmup = cfg.get_u64("bench_warmup", c.warmup);
  c.k1 = cfg.get_u64("k1", c.k1);
  c.validate();
  return c;
}

void BenchConfig::validate() const {
  if (n == 0) throw InvalidArgument("config key 'bench_n': must be >= 1");
  if (repetitions == 0) throw InvalidArgument("config key 'bench_reps': must be >= 1");
  if (k == 0 || k > k1) throw InvalidArgument("config key 'k1': must be >= k (10)");
  for (const auto& p : pipelines) {
    if (p != kFullForward && p != kCachedAlignment && p != kCachedMatching &&
        p != kTwoStagePipeline) {
      throw InvalidArgument("bench: unknown pipeline '" + p + "'");
    }
  }
}

std::vector<PipelineTiming> bench(const model::Model& model,
                                  const corpus::PairedCorpus& corpus,
                                  const BenchConfig& config) {
  config.validate();
  if (config.n > corpus.images.size()) {
    throw InvalidArgument("bench: bench_n=" + std::to_string(config.n) +
                          " exceeds corpus size " + std::to_string(corpus.images.size()));
  }
  Tape::Pause no_grad;
  std::vector<std::uint64_t> ids(config.n);
  std::iota(ids.begin(), ids.end(), 0);
  const auto before = model::backbone_forwards();
  const FeatureCache cache = build_cache(model, corpus, ids);
  const auto cache_forwards = model::backbone_forwards() - before;
  const std::uint64_t r = corpus.config.captions_per_image;
  const std::size_t n_captions = cache.items(Modality::kText).size();
  if (config.k1 > n_captions) {
    throw InvalidArgument("config key 'k1': exceeds the " + std::to_string(n_captions) +
                          " captions in the bench collection");
  }

  std::vector<PipelineTiming> out;
  for (const auto& pipeline : config.pipelines) {
    PipelineTiming t;
    t.pipeline = pipeline;
    t.n = config.n;
    t.r = r;
    t.repetitions = config.repetitions;
    t.cache_forwards = cache_forwards;
    std::vector<double> ms;
    const std::uint64_t total = config.warmup + config.repetitions;
    for (std::uint64_t q = 0; q < total; ++q) {
      const Tensor regions = corpus.regions((q * 7919 + 13) % config.n);
      const auto f0 = model::backbone_forwards();
      const auto t0 = Clock::now();
      std::vector<Hit> hits;
      if (pipeline == kFullForward) {
        hits = full_forward_query(model, corpus, cache, regions, config.k);
      } else if (pipeline == kCachedAlignment) {
        const Query query{model.backbone.encode_visual(regions), {}};
        hits = alignment_search(query, cache, config.k);
      } else if (pipeline == kCachedMatching) {
        const Query query = encode_query(model, regions);
        hits = knn_query(query.embedding, cache, Modality::kText, config.k);
      } else {
        const Query query = encode_query(model, regions);
        hits = two_stage_search(query, cache, config.k1, config.k);
      }
      const double elapsed =
          std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
      const auto forwards = model::backbone_forwards() - f0;
      if (hits.size() != config.k) throw Error(ErrorCode::kInternal, "bench: short result list");
      if (q < config.warmup) continue;
      ms.push_back(elapsed);
      // Full pairwise re-encodes the query beside every item.
      t.query_forwards_per_query = pipeline == kFullForward ? forwards / 2 : forwards;
      t.item_forwards_per_query = forwards - t.query_forwards_per_query;
    }
    t.median_ms = median(ms);
    out.push_back(t);
  }
  return out;
}

}  // namespace aladin::retrieval
