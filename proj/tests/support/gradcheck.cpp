// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include "support/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "tensor/ops.hpp"

namespace aladin::testing {
namespace {

// Plain loop over raw buffers; deliberately avoids the ops under test.
double weighted_total(const Tensor& y, const std::vector<double>& w) {
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) total += y.data()[i] * w[i];
  return total;
}

}  // namespace

GradCheckResult gradcheck(
    const std::function<Tensor(const std::vector<Tensor>&)>& f,
    std::vector<Tensor> inputs, double eps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  std::vector<double> weights;
  Tensor loss;
  std::vector<std::vector<double>> analytic(inputs.size());
  {
    for (auto& t : inputs) t.clear_grad();
    Tape tape;
    Tape::Scope scope(tape);
    Tensor y = f(inputs);
    weights.resize(y.numel());
    for (double& w : weights) w = unit(rng);
    // sum(y * W) built from tape ops so backward starts at a scalar.
    Tensor w = Tensor::from_data(y.shape(), weights);
    Tensor s = ops::sum(ops::mul(y, w));
    tape.backward(s);
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      // Inputs the graph never touched have zero gradient.
      if (inputs[k].has_grad()) {
        analytic[k].assign(inputs[k].grad().begin(), inputs[k].grad().end());
      } else {
        analytic[k].assign(inputs[k].numel(), 0.0);
      }
    }
  }

  GradCheckResult result;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (!inputs[k].requires_grad()) continue;
    auto data = inputs[k].mutable_data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double orig = data[i];
      data[i] = orig + eps;
      const double plus = weighted_total(f(inputs), weights);
      data[i] = orig - eps;
      const double minus = weighted_total(f(inputs), weights);
      data[i] = orig;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double a = analytic[k][i];
      const double rel = std::abs(a - numeric) / std::max(1.0, std::abs(a));
      result.max_rel_error = std::max(result.max_rel_error, rel);
      ++result.checked;
    }
  }
  return result;
}

Tensor random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                     double scale, bool requires_grad) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> data(rows * cols);
  for (double& v : data) v = normal(rng);
  return Tensor::matrix(rows, cols, std::move(data), requires_grad);
}

}  // namespace aladin::testing
