// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "model/encoder.hpp"
#include "tensor/tensor.hpp"

namespace aladin::align {

using model::TokenSequence;

// Cosine between every region and every word, CLS rows excluded: [N x M].
Tensor alignment_matrix(const TokenSequence& image, const TokenSequence& caption);

// Max over regions, summed over words.
double pool_mrsw(const Tensor& alignment);
// Same reduction, recorded on the active tape.
Tensor pool_mrsw_scalar(const Tensor& alignment);

// Unit-normalized non-CLS tokens, padded to a common length so whole
// collections can be scored without touching the autodiff graph.
class PaddedTokens {
 public:
  explicit PaddedTokens(std::span<const TokenSequence> sequences);

  std::size_t size() const { return lengths_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t max_length() const { return max_length_; }
  std::size_t length(std::size_t item) const { return lengths_[item]; }
  const double* token(std::size_t item, std::size_t t) const {
    return units_.data() + (item * max_length_ + t) * dim_;
  }

 private:
  std::size_t dim_ = 0;
  std::size_t max_length_ = 0;
  std::vector<std::size_t> lengths_;
  std::vector<double> units_;
};

// Alignment score of one padded image against one padded caption. Padding
// rows and columns never enter the max or the sum.
double mrsw_score(const PaddedTokens& images, std::size_t k,
                  const PaddedTokens& captions, std::size_t l);

// Scores for selected caption columns of one image row (or the full row
// when `columns` is empty).
std::vector<double> score_row(const PaddedTokens& images, std::size_t k,
                              const PaddedTokens& captions,
                              std::span<const std::size_t> columns = {});

// Full [n_images x n_captions] alignment score matrix, rows split across
// scoring threads. No gradient.
Tensor score_all(std::span<const TokenSequence> images,
                 std::span<const TokenSequence> captions);
Tensor score_all(const PaddedTokens& images, const PaddedTokens& captions);

// Differentiable batch scores for training: every pair in one cosine pass,
// then per-image column maxima and per-caption sums.
Tensor score_batch(std::span<const TokenSequence> images,
                   std::span<const TokenSequence> captions);

// Worker count for collection scoring; ALDN_THREADS caps it.
std::size_t scoring_threads();

}  // namespace aladin::align
