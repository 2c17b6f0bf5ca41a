// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include "train/losses.hpp"

#include <cmath>

#include "common/error.hpp"
#include "tensor/ops.hpp"

namespace aladin::train {
namespace {

std::size_t require_square(const Tensor& s, const char* what) {
  if (s.rank() != 2 || s.rows() != s.cols() || s.rows() < 2) {
    throw DimensionError(std::string(what) + ": need a square batch matrix with B >= 2, got " +
                         shape_string(s.shape()));
  }
  return s.rows();
}

Tensor off_diagonal_mask(std::size_t b) {
  std::vector<double> m(b * b, 1.0);
  for (std::size_t i = 0; i < b; ++i) m[i * b + i] = 0.0;
  return Tensor::matrix(b, b, std::move(m));
}

// x - logsumexp(x) per row, shifted by the (constant) row max so large
// temperatures never underflow to log(0).
Tensor log_softmax_rows(const Tensor& x) {
  const Tensor ones_row = Tensor::full({1, x.cols()}, 1.0);
  const Tensor shift = ops::detach(ops::row_max(x).values);
  const Tensor centered = ops::sub(x, ops::matmul(shift, ones_row));
  const Tensor lse = ops::log(ops::row_sum(ops::exp(centered)));
  return ops::sub(centered, ops::matmul(lse, ones_row));
}

}  // namespace

Tensor triplet_loss(const Tensor& s, double margin) {
  const std::size_t b = require_square(s, "triplet_loss");
  if (!(margin > 0.0)) throw InvalidArgument("triplet_loss: margin must be positive");
  const Tensor eye = Tensor::identity(b);
  const Tensor ones_col = Tensor::full({b, 1}, 1.0);
  const Tensor ones_row = Tensor::full({1, b}, 1.0);
  const Tensor mask = off_diagonal_mask(b);

  const Tensor diag = ops::mul(s, eye);
  const Tensor pos_by_row = ops::matmul(ops::row_sum(diag), ones_row);  // s_kk across row k
  const Tensor pos_by_col = ops::matmul(ones_col, ops::col_sum(diag));  // s_ll down column l

  // Image k against captions l' != k, and caption k against images k' != k.
  const Tensor cap_cost =
      ops::mul(ops::relu(ops::add_scalar(ops::sub(s, pos_by_row), margin)), mask);
  const Tensor img_cost =
      ops::mul(ops::relu(ops::add_scalar(ops::sub(s, pos_by_col), margin)), mask);
  return ops::add(ops::sum(ops::row_max(cap_cost).values),
                  ops::sum(ops::col_max(img_cost).values));
}

TopOneProbs topone_probs(const Tensor& s, double temperature) {
  require_square(s, "topone_probs");
  if (!(temperature > 0.0)) throw InvalidArgument("topone_probs: temperature must be positive");
  const Tensor scaled = temperature == 1.0 ? s : ops::scale(s, temperature);
  return {ops::softmax_rows(scaled), ops::softmax_rows(ops::transpose(scaled))};
}

Tensor distill_loss(const Tensor& alignment_scores, const Tensor& matching_scores,
                    double temperature) {
  if (alignment_scores.shape() != matching_scores.shape()) {
    throw DimensionError("distill_loss: score shapes differ: " +
                         shape_string(alignment_scores.shape()) + " vs " +
                         shape_string(matching_scores.shape()));
  }
  const std::size_t b = require_square(matching_scores, "distill_loss");
  const TopOneProbs teacher = topone_probs(ops::detach(alignment_scores), 1.0);
  if (!(temperature > 0.0)) throw InvalidArgument("distill_loss: temperature must be positive");
  const Tensor student = ops::scale(matching_scores, temperature);
  const Tensor ce = ops::add(
      ops::sum(ops::mul(teacher.image_query, log_softmax_rows(student))),
      ops::sum(ops::mul(teacher.text_query, log_softmax_rows(ops::transpose(student)))));
  return ops::scale(ce, -1.0 / static_cast<double>(b));
}

double teacher_entropy(const Tensor& alignment_scores) {
  Tape::Pause pause;
  const std::size_t b = require_square(alignment_scores, "teacher_entropy");
  const TopOneProbs p = topone_probs(alignment_scores, 1.0);
  double h = 0.0;
  for (const Tensor* t : {&p.image_query, &p.text_query}) {
    for (double x : t->data()) {
      if (x > 0.0) h -= x * std::log(x);
    }
  }
  return h / static_cast<double>(b);
}

}  // namespace aladin::train
