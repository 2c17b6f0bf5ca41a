// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "retrieval/cache.hpp"
#include "retrieval/metrics.hpp"

namespace aladin::retrieval {

struct Hit {
  std::uint64_t id = 0;
  double score = 0.0;

  friend bool operator==(const Hit&, const Hit&) = default;
};

// A query item already pushed through the backbone and matching head.
struct Query {
  TokenSequence sequence;
  std::vector<double> embedding;

  Modality modality() const { return sequence.modality; }
  // Collection side the query searches.
  Modality target() const {
    return modality() == Modality::kImage ? Modality::kText : Modality::kImage;
  }
};

Query encode_query(const model::Model& model, const Tensor& regions);
Query encode_query(const model::Model& model, std::span<const std::uint32_t> words);
// Reuses a cached item as a query; no encoding happens.
Query cached_query(const FeatureCache& cache, Modality modality, std::size_t index);

// Exact cosine kNN over the target side: score descending, ties by id.
std::vector<Hit> knn_query(std::span<const double> query_embedding,
                           const FeatureCache& cache, Modality target, std::size_t k);

// Alignment scores of the query against all (or the listed) target items,
// ranked, top k.
std::vector<Hit> alignment_search(const Query& query, const FeatureCache& cache,
                                  std::size_t k,
                                  std::span<const std::size_t> candidates = {});

// kNN candidates from the common space, re-ranked by alignment score.
std::vector<Hit> two_stage_search(const Query& query, const FeatureCache& cache,
                                  std::size_t k1, std::size_t k);

enum class ScoreSource { kAlignment, kMatching, kTwoStage };
const char* source_name(ScoreSource source);
ScoreSource parse_source(const std::string& name);

struct EvalOptions {
  ScoreSource source = ScoreSource::kAlignment;
  std::size_t k1 = 50;     // two-stage candidate count
  std::size_t folds = 1;   // >1 averages recall over contiguous image folds
};

// Recall@{1,5,10} both ways, with every cached item used once as a query.
// Pairing comes from the corpus the cache was built from.
RecallPair evaluate(const FeatureCache& cache, const corpus::PairedCorpus& corpus,
                    const EvalOptions& options = {});

// Dense score matrices over the cache, [images x captions].
Tensor alignment_scores(const FeatureCache& cache);
Tensor matching_scores(const FeatureCache& cache);

}  // namespace aladin::retrieval
