// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tensor/tensor.hpp"

namespace aladin::train {

inline constexpr double kDefaultMargin = 0.2;
inline constexpr double kDefaultTemperature = 6.0;

// Hinge loss with the hardest in-batch negative in each direction, summed
// over the batch. Positives sit on the diagonal of the square score matrix.
Tensor triplet_loss(const Tensor& scores, double margin = kDefaultMargin);

struct TopOneProbs {
  Tensor image_query;  // row k: distribution over captions for image k
  Tensor text_query;   // row l: distribution over images for caption l
};

// Softmax of temperature * scores, per image row and per caption column.
TopOneProbs topone_probs(const Tensor& scores, double temperature);

// Cross-entropy from teacher alignment scores (temperature 1, detached) to
// student matching scores (given temperature), both directions, averaged over
// the batch size.
Tensor distill_loss(const Tensor& alignment_scores, const Tensor& matching_scores,
                    double temperature = kDefaultTemperature);

// Lower bound of distill_loss for a given teacher.
double teacher_entropy(const Tensor& alignment_scores);

}  // namespace aladin::train
