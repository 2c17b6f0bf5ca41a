// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "common/config.hpp"
#include "model/encoder.hpp"
#include "tensor/checkpoint.hpp"

namespace aladin::model {

struct ModelConfig {
  std::size_t hidden_d = 64;
  std::size_t d_v = 64;
  std::size_t vocab = 300;
  std::size_t layers = 2;  // backbone depth
  std::size_t heads = 4;
  std::size_t ff_mult = 4;
  std::uint64_t seed = 1;

  static ModelConfig from(const KeyValueConfig& cfg);
  void validate() const;
  std::size_t ff() const { return ff_mult * hidden_d; }
};

inline constexpr std::size_t kMatchingLayers = 2;
// Sinusoidal word positions are scaled to the embedding init scale so they
// do not swamp word identity at initialization.
inline constexpr double kPositionScale = kInitStd;

Tensor sinusoidal_positions(std::size_t length, std::size_t d);

// Process-wide count of sequences pushed through any backbone.
std::uint64_t backbone_forwards();
void reset_backbone_forwards();

// Modality-specific input maps feeding one encoder stack shared by images
// and captions. Regions carry no positional signal; words do.
class Backbone {
 public:
  static Backbone init(const ModelConfig& config, std::uint64_t seed);
  static Backbone load(const checkpoint::NamedTensors& named,
                       const ModelConfig& config);
  static std::size_t parameter_count(const ModelConfig& config);

  TokenSequence encode_visual(const Tensor& regions) const;
  TokenSequence encode_text(std::span<const std::uint32_t> word_ids) const;

  // Encodes every image, then every caption, as one packed pass. Each output
  // equals what the single-item calls return.
  std::vector<TokenSequence> encode_batch(
      std::span<const Tensor> region_sets,
      std::span<const std::vector<std::uint32_t>> captions) const;

  const std::vector<EncoderLayer>& layers() const { return layers_; }
  std::vector<Tensor> parameters() const;
  void append_named(checkpoint::NamedTensors& out) const;

 private:
  ModelConfig config_;
  Tensor visual_w_, visual_b_;
  Tensor word_embedding_;
  Tensor cls_visual_, cls_text_;
  std::vector<EncoderLayer> layers_;
};

// Two-layer encoder shared across modalities; the CLS output row is the
// common-space embedding.
class MatchingHead {
 public:
  static MatchingHead init(const ModelConfig& config, std::uint64_t seed);
  static MatchingHead load(const checkpoint::NamedTensors& named,
                           const ModelConfig& config);

  // One embedding row per input sequence, [n x d].
  Tensor encode(std::span<const TokenSequence> sequences) const;
  Tensor encode_common(const TokenSequence& sequence) const;

  const std::vector<EncoderLayer>& layers() const { return layers_; }
  std::vector<Tensor> parameters() const;
  void append_named(checkpoint::NamedTensors& out) const;

 private:
  std::size_t d_ = 0;
  std::size_t heads_ = 0;
  std::vector<EncoderLayer> layers_;
};

struct Model {
  ModelConfig config;
  Backbone backbone;
  MatchingHead matching;
  // Steps trained with the alignment objective on this backbone; schemes
  // that need an alignment-warmed backbone check it.
  std::uint64_t alignment_steps = 0;

  static Model init(const ModelConfig& config);

  checkpoint::NamedTensors backbone_named() const;
  checkpoint::NamedTensors matching_named() const;
  checkpoint::NamedTensors named() const;
  static Model from_named(const checkpoint::NamedTensors& named);

  void save(const std::string& path) const;
  static Model load(const std::string& path);
  Model clone() const;
};

}  // namespace aladin::model
