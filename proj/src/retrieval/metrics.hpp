// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tensor/tensor.hpp"

namespace aladin::retrieval {

inline constexpr const char* kTextToImage = "text_to_image";
inline constexpr const char* kImageToText = "image_to_text";

struct RecallReport {
  std::string direction;
  double r1 = 0.0, r5 = 0.0, r10 = 0.0;  // percentages
  double rsum = 0.0;                     // r1 + r5 + r10 of this direction
  std::uint64_t n_queries = 0;
  double median_ms = 0.0;

  friend bool operator==(const RecallReport&, const RecallReport&) = default;
};

struct RecallPair {
  RecallReport text_to_image;
  RecallReport image_to_text;

  double rsum() const { return text_to_image.rsum + image_to_text.rsum; }
  double mean_r1() const { return 0.5 * (text_to_image.r1 + image_to_text.r1); }
};

// 0-based rank of `target` among `scores`, descending; equal scores rank the
// lower index first.
std::size_t rank_of(std::span<const double> scores, std::size_t target);

// Recall percentages from 0-based ranks of each query's first hit.
RecallReport report_from_ranks(const std::string& direction,
                               std::span<const std::size_t> ranks);

// Recall from a dense [images x captions] matrix. `owner[l]` is the row of
// caption l's paired image. An image query hits when any of its captions
// lands in the top k.
RecallPair recall_from_scores(const Tensor& scores,
                              std::span<const std::size_t> owner);

// Mean Spearman rank correlation between two score matrices, taken per
// query over both directions (rows and columns). Ties get average ranks.
double mean_spearman(const Tensor& a, const Tensor& b);

// Spearman rank correlation over all entries of two same-shape matrices.
double matrix_spearman(const Tensor& a, const Tensor& b);

}  // namespace aladin::retrieval
