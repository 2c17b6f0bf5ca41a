// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "tensor/tensor.hpp"

// Differentiable operations. Matrix ops take rank-2 tensors (rank-1 tensors
// read as a single row). Every op rejects non-finite outputs with
// NumericError and shape mismatches with DimensionError.
namespace aladin::ops {

inline constexpr double kNormFloor = 1e-12;

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
// x[m x n] + row[n], the row repeated down every row of x.
Tensor add_row(const Tensor& x, const Tensor& row);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double value);
Tensor sub(const Tensor& a, const Tensor& b);

Tensor relu(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);

Tensor softmax_rows(const Tensor& x);
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps);

// Entry (i, j) is the cosine between row i of a and row j of b. Row norms
// below kNormFloor are clamped to it (with a warning).
Tensor cosine_pairwise(const Tensor& a, const Tensor& b);

struct MaxResult {
  Tensor values;
  std::vector<std::size_t> argmax;
};

// Max within each row -> [m x 1]; gradient goes to the first maximal entry.
MaxResult row_max(const Tensor& x);
// Max within each column -> [1 x n]; same tie rule.
MaxResult col_max(const Tensor& x);

Tensor row_sum(const Tensor& x);  // [m x 1]
Tensor col_sum(const Tensor& x);  // [1 x n]
Tensor sum(const Tensor& x);      // scalar

Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end);

// Same values, cut off from gradient flow.
Tensor detach(const Tensor& x);

}  // namespace aladin::ops
