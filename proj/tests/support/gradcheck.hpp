// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "tensor/tensor.hpp"

namespace aladin::testing {

struct GradCheckResult {
  double max_rel_error = 0.0;  // max |analytic - fd| / max(1, |analytic|)
  std::size_t checked = 0;
};

// Central finite-difference check of f at `inputs`. A scalar objective is
// formed as sum(f(x) * W) with a fixed random W so every output entry
// contributes. Only inputs with requires_grad are perturbed.
GradCheckResult gradcheck(
    const std::function<Tensor(const std::vector<Tensor>&)>& f,
    std::vector<Tensor> inputs, double eps = 1e-5, std::uint64_t seed = 7);

Tensor random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                     double scale = 1.0, bool requires_grad = true);

}  // namespace aladin::testing
