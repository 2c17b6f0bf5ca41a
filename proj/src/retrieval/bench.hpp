// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "common/config.hpp"
#include "corpus/corpus.hpp"
#include "model/model.hpp"

namespace aladin::retrieval {

inline constexpr const char* kFullForward = "full-forward";
inline constexpr const char* kCachedAlignment = "cached-alignment";
inline constexpr const char* kCachedMatching = "cached-matching";
inline constexpr const char* kTwoStagePipeline = "two-stage";

struct BenchConfig {
  std::uint64_t n = 1000;  // images in the collection; captions follow (n * r)
  std::uint64_t repetitions = 20;
  std::uint64_t warmup = 3;
  std::uint64_t k1 = 50;
  std::uint64_t k = 10;
  std::vector<std::string> pipelines = {kFullForward, kCachedAlignment, kCachedMatching,
                                        kTwoStagePipeline};

  static BenchConfig from(const KeyValueConfig& cfg);
  void validate() const;
};

// One line of the timing report. Queries are images searching the n * r
// captions; a full pairwise scan therefore forwards n * r collection items
// per query, while cached pipelines forward only the query itself.
struct PipelineTiming {
  std::string pipeline;
  std::uint64_t n = 0;
  std::uint64_t r = 0;
  std::uint64_t repetitions = 0;
  double median_ms = 0.0;
  std::uint64_t item_forwards_per_query = 0;
  std::uint64_t query_forwards_per_query = 0;
  std::uint64_t cache_forwards = 0;  // one-off offline encodes (n + n * r)

  friend bool operator==(const PipelineTiming&, const PipelineTiming&) = default;
};

// Times each pipeline over the first n images of the corpus (all splits).
std::vector<PipelineTiming> bench(const model::Model& model,
                                  const corpus::PairedCorpus& corpus,
                                  const BenchConfig& config);

}  // namespace aladin::retrieval
