// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include "model/model.hpp"

#include <atomic>
#include <cmath>

#include "common/error.hpp"
#include "tensor/ops.hpp"

namespace aladin::model {
namespace {

std::atomic<std::uint64_t> g_forwards{0};

const Tensor& find_named(const checkpoint::NamedTensors& named,
                         const std::string& name) {
  for (const auto& [n, t] : named) {
    if (n == name) return t;
  }
  throw FormatError("checkpoint is missing tensor '" + name + "'");
}

}  // namespace

std::uint64_t backbone_forwards() { return g_forwards.load(); }
void reset_backbone_forwards() { g_forwards.store(0); }

ModelConfig ModelConfig::from(const KeyValueConfig& cfg) {
  ModelConfig c;
  c.hidden_d = cfg.get_u64("hidden_d", c.hidden_d);
  c.d_v = cfg.get_u64("d_v", c.d_v);
  c.vocab = cfg.get_u64("vocab", c.vocab);
  c.layers = cfg.get_u64("layers", c.layers);
  c.heads = cfg.get_u64("heads", c.heads);
  c.ff_mult = cfg.get_u64("ff_mult", c.ff_mult);
  c.seed = cfg.get_u64("seed", c.seed);
  c.validate();
  return c;
}

void ModelConfig::validate() const {
  if (hidden_d < 2) throw InvalidArgument("config key 'hidden_d': must be >= 2");
  if (heads == 0 || hidden_d % heads != 0) {
    throw InvalidArgument("config key 'heads': must divide hidden_d");
  }
  if (layers == 0) throw InvalidArgument("config key 'layers': must be >= 1");
  if (vocab == 0) throw InvalidArgument("config key 'vocab': must be >= 1");
  if (d_v == 0) throw InvalidArgument("config key 'd_v': must be >= 1");
  if (ff_mult == 0) throw InvalidArgument("config key 'ff_mult': must be >= 1");
}

Tensor sinusoidal_positions(std::size_t length, std::size_t d) {
  std::vector<double> pe(length * d);
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (std::size_t i = 0; i < d; ++i) {
      const double freq =
          std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(d));
      const double angle = static_cast<double>(pos) * freq;
      pe[pos * d + i] = kPositionScale * (i % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  }
  return Tensor::matrix(length, d, std::move(pe));
}

Backbone Backbone::init(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const std::size_t d = config.hidden_d;
  Backbone b;
  b.config_ = config;
  b.visual_w_ = normal_tensor({config.d_v, d}, rng, kInitStd);
  b.visual_b_ = Tensor::zeros({d}, true);
  b.word_embedding_ = normal_tensor({config.vocab, d}, rng, kInitStd);
  b.cls_visual_ = normal_tensor({1, d}, rng, kInitStd);
  b.cls_text_ = normal_tensor({1, d}, rng, kInitStd);
  for (std::size_t l = 0; l < config.layers; ++l) {
    b.layers_.push_back(EncoderLayer::init(d, config.ff(), rng, kInitStd));
  }
  return b;
}

Backbone Backbone::load(const checkpoint::NamedTensors& named,
                        const ModelConfig& config) {
  const std::size_t d = config.hidden_d;
  Backbone b;
  b.config_ = config;
  b.visual_w_ = take_named(named, "backbone.visual_w", {config.d_v, d});
  b.visual_b_ = take_named(named, "backbone.visual_b", {d});
  b.word_embedding_ = take_named(named, "backbone.word_embedding", {config.vocab, d});
  b.cls_visual_ = take_named(named, "backbone.cls_visual", {1, d});
  b.cls_text_ = take_named(named, "backbone.cls_text", {1, d});
  for (std::size_t l = 0; l < config.layers; ++l) {
    b.layers_.push_back(load_layer(
        named, "backbone.layer" + std::to_string(l) + ".", d, config.ff()));
  }
  return b;
}

std::size_t Backbone::parameter_count(const ModelConfig& c) {
  const std::size_t d = c.hidden_d;
  return c.d_v * d + d + c.vocab * d + 2 * d +
         c.layers * EncoderLayer::parameter_count(d, c.ff());
}

TokenSequence Backbone::encode_visual(const Tensor& regions) const {
  return encode_batch({&regions, 1}, {}).front();
}

TokenSequence Backbone::encode_text(std::span<const std::uint32_t> word_ids) const {
  const std::vector<std::uint32_t> ids(word_ids.begin(), word_ids.end());
  return encode_batch({}, {&ids, 1}).front();
}

std::vector<TokenSequence> Backbone::encode_batch(
    std::span<const Tensor> region_sets,
    std::span<const std::vector<std::uint32_t>> captions) const {
  const std::size_t d = config_.hidden_d;
  std::vector<Tensor> parts;
  std::vector<Segment> segments;
  std::vector<Modality> modalities;
  std::size_t row = 0;

  for (const Tensor& regions : region_sets) {
    if (regions.rank() != 2 || regions.rows() == 0) {
      throw InvalidArgument("encode_visual: need at least one region");
    }
    if (regions.cols() != config_.d_v) {
      throw DimensionError("encode_visual: region width " +
                           std::to_string(regions.cols()) + ", expected " +
                           std::to_string(config_.d_v));
    }
    parts.push_back(cls_visual_);
    parts.push_back(ops::add_row(ops::matmul(regions, visual_w_), visual_b_));
    segments.push_back({row, 1 + regions.rows()});
    modalities.push_back(Modality::kImage);
    row += 1 + regions.rows();
  }
  for (const auto& words : captions) {
    if (words.empty()) throw InvalidArgument("encode_text: empty caption");
    std::vector<Tensor> rows;
    rows.reserve(words.size());
    for (std::uint32_t id : words) {
      if (id >= config_.vocab) {
        throw InvalidArgument("encode_text: word id " + std::to_string(id) +
                              " out of range for vocab " +
                              std::to_string(config_.vocab));
      }
      rows.push_back(ops::slice_rows(word_embedding_, id, id + 1));
    }
    Tensor embedded = rows.size() == 1 ? rows.front() : ops::concat_rows(rows);
    parts.push_back(cls_text_);
    parts.push_back(ops::add(embedded, sinusoidal_positions(words.size(), d)));
    segments.push_back({row, 1 + words.size()});
    modalities.push_back(Modality::kText);
    row += 1 + words.size();
  }
  if (segments.empty()) return {};
  g_forwards.fetch_add(segments.size());

  Tensor packed = ops::concat_rows(parts);
  for (const auto& layer : layers_) {
    packed = layer.forward(packed, segments, config_.heads);
  }
  std::vector<TokenSequence> out;
  out.reserve(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    out.push_back({segments.size() == 1
                       ? packed
                       : ops::slice_rows(packed, s.begin, s.begin + s.rows),
                   modalities[i]});
  }
  return out;
}

std::vector<Tensor> Backbone::parameters() const {
  std::vector<Tensor> out = {visual_w_, visual_b_, word_embedding_, cls_visual_,
                             cls_text_};
  for (const auto& l : layers_) l.append_parameters(out);
  return out;
}

void Backbone::append_named(checkpoint::NamedTensors& out) const {
  out.emplace_back("backbone.visual_w", visual_w_);
  out.emplace_back("backbone.visual_b", visual_b_);
  out.emplace_back("backbone.word_embedding", word_embedding_);
  out.emplace_back("backbone.cls_visual", cls_visual_);
  out.emplace_back("backbone.cls_text", cls_text_);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].append_named("backbone.layer" + std::to_string(l) + ".", out);
  }
}

MatchingHead MatchingHead::init(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  MatchingHead m;
  m.d_ = config.hidden_d;
  m.heads_ = config.heads;
  for (std::size_t l = 0; l < kMatchingLayers; ++l) {
    m.layers_.push_back(EncoderLayer::init(m.d_, config.ff(), rng, kInitStd));
  }
  return m;
}

MatchingHead MatchingHead::load(const checkpoint::NamedTensors& named,
                                const ModelConfig& config) {
  MatchingHead m;
  m.d_ = config.hidden_d;
  m.heads_ = config.heads;
  for (std::size_t l = 0; l < kMatchingLayers; ++l) {
    m.layers_.push_back(load_layer(
        named, "matching.layer" + std::to_string(l) + ".", m.d_, config.ff()));
  }
  return m;
}

Tensor MatchingHead::encode(std::span<const TokenSequence> sequences) const {
  if (sequences.empty()) throw InvalidArgument("encode_common: no sequences");
  std::vector<Tensor> parts;
  std::vector<Segment> segments;
  std::size_t row = 0;
  for (const auto& s : sequences) {
    if (s.dim() != d_) {
      throw DimensionError("encode_common: sequence width " +
                           std::to_string(s.dim()) + ", expected " +
                           std::to_string(d_));
    }
    parts.push_back(s.tokens);
    segments.push_back({row, s.tokens.rows()});
    row += s.tokens.rows();
  }
  Tensor packed = parts.size() == 1 ? parts.front() : ops::concat_rows(parts);
  for (const auto& layer : layers_) packed = layer.forward(packed, segments, heads_);
  if (segments.size() == 1) return ops::slice_rows(packed, 0, 1);
  std::vector<Tensor> cls;
  cls.reserve(segments.size());
  for (const auto& s : segments) cls.push_back(ops::slice_rows(packed, s.begin, s.begin + 1));
  return ops::concat_rows(cls);
}

Tensor MatchingHead::encode_common(const TokenSequence& sequence) const {
  return encode({&sequence, 1});
}

std::vector<Tensor> MatchingHead::parameters() const {
  std::vector<Tensor> out;
  for (const auto& l : layers_) l.append_parameters(out);
  return out;
}

void MatchingHead::append_named(checkpoint::NamedTensors& out) const {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].append_named("matching.layer" + std::to_string(l) + ".", out);
  }
}

Model Model::init(const ModelConfig& config) {
  config.validate();
  Model m;
  m.config = config;
  m.backbone = Backbone::init(config, derive_seed(config.seed, "init.backbone"));
  m.matching = MatchingHead::init(config, derive_seed(config.seed, "init.matching"));
  return m;
}

checkpoint::NamedTensors Model::backbone_named() const {
  checkpoint::NamedTensors out;
  backbone.append_named(out);
  return out;
}

checkpoint::NamedTensors Model::matching_named() const {
  checkpoint::NamedTensors out;
  matching.append_named(out);
  return out;
}

checkpoint::NamedTensors Model::named() const {
  checkpoint::NamedTensors out;
  out.emplace_back(
      "meta.config",
      Tensor::from_data({7}, {static_cast<double>(config.hidden_d),
                              static_cast<double>(config.d_v),
                              static_cast<double>(config.vocab),
                              static_cast<double>(config.layers),
                              static_cast<double>(config.heads),
                              static_cast<double>(config.ff_mult),
                              static_cast<double>(config.seed & ((1ull << 52) - 1))}));
  out.emplace_back("meta.alignment_steps",
                   Tensor::scalar(static_cast<double>(alignment_steps)));
  backbone.append_named(out);
  matching.append_named(out);
  return out;
}

Model Model::from_named(const checkpoint::NamedTensors& named) {
  const Tensor& meta = find_named(named, "meta.config");
  if (meta.numel() != 7) throw FormatError("checkpoint meta.config has wrong size");
  Model m;
  auto v = meta.data();
  m.config.hidden_d = static_cast<std::size_t>(v[0]);
  m.config.d_v = static_cast<std::size_t>(v[1]);
  m.config.vocab = static_cast<std::size_t>(v[2]);
  m.config.layers = static_cast<std::size_t>(v[3]);
  m.config.heads = static_cast<std::size_t>(v[4]);
  m.config.ff_mult = static_cast<std::size_t>(v[5]);
  m.config.seed = static_cast<std::uint64_t>(v[6]);
  m.config.validate();
  m.alignment_steps =
      static_cast<std::uint64_t>(find_named(named, "meta.alignment_steps").item());
  m.backbone = Backbone::load(named, m.config);
  m.matching = MatchingHead::load(named, m.config);
  return m;
}

void Model::save(const std::string& path) const { checkpoint::save(path, named()); }

Model Model::load(const std::string& path) {
  return from_named(checkpoint::load(path));
}

Model Model::clone() const { return from_named(named()); }

}  // namespace aladin::model
