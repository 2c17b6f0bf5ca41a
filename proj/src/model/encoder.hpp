// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "common/rng.hpp"
#include "tensor/checkpoint.hpp"
#include "tensor/tensor.hpp"

namespace aladin::model {

enum class Modality : std::uint8_t { kImage = 0, kText = 1 };

// CLS-prefixed token features: row 0 is CLS, rows 1..L the regions or words.
struct TokenSequence {
  Tensor tokens;
  Modality modality = Modality::kImage;

  std::size_t length() const { return tokens.rows() - 1; }
  std::size_t dim() const { return tokens.cols(); }
};

// Rows [begin, begin + rows) of a packed matrix belong to one sequence.
struct Segment {
  std::size_t begin = 0;
  std::size_t rows = 0;
};

// One post-norm transformer encoder layer:
//   h = LN(x + MHA(x)),  out = LN(h + W2 relu(W1 h + b1) + b2)
// Attention never crosses segment boundaries, so a packed batch yields the
// same rows as encoding each sequence alone.
struct EncoderLayer {
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor ln1_gain, ln1_bias;
  Tensor w1, b1, w2, b2;
  Tensor ln2_gain, ln2_bias;

  static EncoderLayer init(std::size_t d, std::size_t ff, Rng& rng, double std);
  static std::size_t parameter_count(std::size_t d, std::size_t ff);

  Tensor forward(const Tensor& packed, std::span<const Segment> segments,
                 std::size_t heads) const;

  void append_named(const std::string& prefix, checkpoint::NamedTensors& out) const;
  void append_parameters(std::vector<Tensor>& out) const;
};

inline constexpr double kLayerNormEps = 1e-5;
inline constexpr double kInitStd = 0.02;

Tensor normal_tensor(Shape shape, Rng& rng, double std, bool requires_grad = true);

// Looks up `name` in a checkpoint and checks its shape.
Tensor take_named(const checkpoint::NamedTensors& named, const std::string& name,
                  const Shape& shape);

EncoderLayer load_layer(const checkpoint::NamedTensors& named,
                        const std::string& prefix, std::size_t d, std::size_t ff);

}  // namespace aladin::model
