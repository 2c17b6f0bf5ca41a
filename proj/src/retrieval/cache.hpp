// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "align/alignment.hpp"
#include "corpus/corpus.hpp"
#include "model/model.hpp"

namespace aladin::retrieval {

using model::Modality;
using model::TokenSequence;

struct CachedItem {
  std::uint64_t id = 0;  // corpus image or caption id
  TokenSequence sequence;
  std::vector<double> embedding;
};

// Search-ready views of one side of the cache.
struct SideIndex {
  explicit SideIndex(std::span<const CachedItem> items);

  align::PaddedTokens tokens;
  std::size_t dim = 0;
  std::vector<double> unit_embeddings;  // rows normalized as cosine does
};

// Backbone sequences and common-space embeddings for every image and
// caption of a collection, in ascending id order. Immutable once indexed.
class FeatureCache {
 public:
  FeatureCache(std::vector<CachedItem> images, std::vector<CachedItem> captions);

  const std::vector<CachedItem>& items(Modality m) const {
    return m == Modality::kImage ? images_ : captions_;
  }
  const SideIndex& index(Modality m) const {
    return m == Modality::kImage ? *image_index_ : *caption_index_;
  }
  std::size_t dim() const { return image_index_->dim; }

  friend bool operator==(const FeatureCache& a, const FeatureCache& b);

 private:
  std::vector<CachedItem> images_, captions_;
  std::shared_ptr<const SideIndex> image_index_, caption_index_;
};

// Encodes each listed image and all of its captions exactly once.
FeatureCache build_cache(const model::Model& model, const corpus::PairedCorpus& corpus,
                         std::span<const std::uint64_t> image_ids);
FeatureCache build_cache(const model::Model& model, const corpus::PairedCorpus& corpus,
                         corpus::Split split);

// Normalizes a vector exactly the way cosine_pairwise does.
std::vector<double> unit_vector(std::span<const double> v);

inline constexpr char kCacheMagic[] = "ALDF";
inline constexpr std::uint32_t kCacheVersion = 1;

std::string serialize(const FeatureCache& cache);
FeatureCache deserialize_cache(const std::string& bytes, const std::string& context = "cache");
void write(const FeatureCache& cache, const std::string& path);
FeatureCache read_cache(const std::string& path);

}  // namespace aladin::retrieval
