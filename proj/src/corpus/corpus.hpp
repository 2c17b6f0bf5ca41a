// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "common/config.hpp"
#include "tensor/tensor.hpp"

namespace aladin::corpus {

enum class Split : std::uint8_t { kTrain = 0, kVal = 1, kTest = 2 };

const char* split_name(Split split);
Split parse_split(const std::string& name);

struct CorpusConfig {
  std::uint64_t n_images = 1200;
  std::uint64_t captions_per_image = 5;  // r
  std::uint64_t concepts = 200;          // K
  std::uint64_t d_v = 64;
  std::uint64_t d_c = 32;
  std::uint64_t regions_min = 4;
  std::uint64_t regions_max = 10;
  std::uint64_t words_min = 4;
  std::uint64_t words_max = 12;
  std::uint64_t concepts_min = 2;
  std::uint64_t concepts_max = 4;
  std::uint64_t filler_words = 100;
  double noise_sigma = 0.1;
  std::uint64_t seed = 1;
  // 1000 / 100 / 100 images at the default size.
  std::array<double, 3> split_fractions = {10.0 / 12.0, 1.0 / 12.0, 1.0 / 12.0};

  static CorpusConfig from(const KeyValueConfig& cfg);
  void validate() const;
  std::uint64_t vocab_size() const { return concepts + filler_words; }

  bool operator==(const CorpusConfig&) const = default;
};

// Unit-norm concept directions plus the fixed map into region-feature space.
struct ConceptVocabulary {
  std::uint64_t count = 0;
  std::uint64_t dim = 0;
  std::vector<double> vectors;     // count x dim, rows unit norm
  std::vector<double> projection;  // dim x d_v
  std::uint64_t seed = 0;

  // Concept c mapped into region space (length d_v).
  std::vector<double> project(std::uint32_t concept_id, std::uint64_t d_v) const;

  bool operator==(const ConceptVocabulary&) const = default;
};

ConceptVocabulary make_vocabulary(const CorpusConfig& config);

struct Image {
  std::vector<std::uint32_t> concepts;  // ground-truth concept set
  std::uint64_t n_regions = 0;
  std::vector<double> regions;  // n_regions x d_v
  std::vector<std::uint64_t> caption_ids;
  Split split = Split::kTrain;

  bool operator==(const Image&) const = default;
};

struct Caption {
  std::uint64_t image = 0;
  std::vector<std::uint32_t> words;  // ids < concepts are concept words

  bool operator==(const Caption&) const = default;
};

struct PairedCorpus {
  CorpusConfig config;
  std::vector<Image> images;
  std::vector<Caption> captions;

  Tensor regions(std::uint64_t image_id) const;
  std::vector<std::uint64_t> images_in(Split split) const;
  std::vector<std::uint64_t> captions_in(Split split) const;
  std::uint64_t d_v() const { return config.d_v; }

  bool operator==(const PairedCorpus&) const = default;
};

PairedCorpus generate(const CorpusConfig& config);

// Reassigns image-level splits. Fractions must sum to 1.
PairedCorpus split(PairedCorpus corpus, const std::array<double, 3>& fractions,
                   std::uint64_t seed);

inline constexpr char kMagic[] = "ALDC";
inline constexpr std::uint32_t kVersion = 1;

std::string serialize(const PairedCorpus& corpus);
PairedCorpus deserialize(const std::string& bytes,
                         const std::string& context = "corpus");
void write(const PairedCorpus& corpus, const std::string& path);
PairedCorpus read(const std::string& path);

}  // namespace aladin::corpus
