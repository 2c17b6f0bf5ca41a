// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "common/error.hpp"
#include "support/gradcheck.hpp"
#include "tensor/ops.hpp"
#include "train/adam.hpp"
#include "train/losses.hpp"

namespace aladin::train {
namespace {

using testing::gradcheck;
using testing::random_matrix;

// Row and column softmax cross-entropy, spelled out with plain loops.
double two_loop_distill(const Tensor& sa, const Tensor& sm, double tau) {
  const std::size_t b = sa.rows();
  double total = 0.0;
  for (int dir = 0; dir < 2; ++dir) {
    for (std::size_t q = 0; q < b; ++q) {
      auto a = [&](std::size_t c) { return dir == 0 ? sa.at(q, c) : sa.at(c, q); };
      auto m = [&](std::size_t c) { return tau * (dir == 0 ? sm.at(q, c) : sm.at(c, q)); };
      double za = 0.0, zm = 0.0;
      for (std::size_t c = 0; c < b; ++c) {
        za += std::exp(a(c));
        zm += std::exp(m(c));
      }
      for (std::size_t c = 0; c < b; ++c) {
        total -= std::exp(a(c)) / za * std::log(std::exp(m(c)) / zm);
      }
    }
  }
  return total / static_cast<double>(b);
}

TEST(TripletLossTest, HandEvaluatedExamples) {
  EXPECT_EQ(triplet_loss(Tensor::matrix(2, 2, {0.9, 0.2, 0.1, 0.8}), 0.2).item(), 0.0);
  const double expected = (0.2 + 0.6 - 0.5) + (0.2 + 0.4 - 0.5) +
                          (0.2 + 0.4 - 0.5) + (0.2 + 0.6 - 0.5);
  const double got = triplet_loss(Tensor::matrix(2, 2, {0.5, 0.6, 0.4, 0.5}), 0.2).item();
  EXPECT_DOUBLE_EQ(got, expected);
  EXPECT_DOUBLE_EQ(got, 0.8);

  std::vector<double> sep(16, -1.0);
  for (int i = 0; i < 4; ++i) sep[i * 5] = 1.0;
  EXPECT_EQ(triplet_loss(Tensor::matrix(4, 4, sep), 0.2).item(), 0.0);
}

TEST(TripletLossTest, ZeroWhenEveryMarginHolds) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t b = 2 + trial % 6;
    std::vector<double> s(b * b);
    for (auto& x : s) x = u(rng);
    for (std::size_t i = 0; i < b; ++i) s[i * b + i] = 0.7 + 1e-3 + 0.3 * (u(rng) + 1.0);
    EXPECT_EQ(triplet_loss(Tensor::matrix(b, b, s), 0.2).item(), 0.0);
  }
}

TEST(TripletLossTest, OnlyHardestNegativeCounts) {
  // Row 0 has two violators; only the larger one enters the loss.
  const Tensor s = Tensor::matrix(3, 3, {0.5, 0.6, 0.55, 0.0, 0.9, 0.0, 0.0, 0.0, 0.9});
  const double expected = (0.2 + 0.6 - 0.5) + 0.0 + 0.0;
  EXPECT_NEAR(triplet_loss(s, 0.2).item(), expected, 1e-15);
}

TEST(TripletLossTest, Errors) {
  EXPECT_THROW(triplet_loss(Tensor::matrix(2, 3, std::vector<double>(6, 0.0))), DimensionError);
  EXPECT_THROW(triplet_loss(Tensor::matrix(1, 1, {0.0})), DimensionError);
  EXPECT_THROW(triplet_loss(Tensor::matrix(2, 2, std::vector<double>(4, 0.0)), 0.0),
               InvalidArgument);
}

TEST(TripletLossTest, Gradcheck) {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t b = 2 + trial % 5;
    auto r = gradcheck([](const std::vector<Tensor>& in) { return triplet_loss(in[0], 0.2); },
                       {random_matrix(rng, b, b, 0.5)});
    worst = std::max(worst, r.max_rel_error);
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(TopOneTest, Examples) {
  const auto uniform = topone_probs(Tensor::matrix(3, 3, std::vector<double>(9, 0.7)), 6.0);
  for (double p : uniform.image_query.data()) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
  for (double p : uniform.text_query.data()) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);

  const auto a = topone_probs(Tensor::matrix(2, 2, {0.0, std::log(3.0), 0.0, 0.0}), 1.0);
  EXPECT_NEAR(a.image_query.at(0, 0), 0.25, 1e-15);
  EXPECT_NEAR(a.image_query.at(0, 1), 0.75, 1e-15);

  const auto b = topone_probs(Tensor::matrix(2, 2, {1.0, 0.0, 0.0, 1.0}), 6.0);
  const double e6 = std::exp(6.0);
  EXPECT_NEAR(b.image_query.at(0, 0), e6 / (e6 + 1.0), 1e-15);
  EXPECT_NEAR(b.image_query.at(0, 1), 1.0 / (e6 + 1.0), 1e-15);
  EXPECT_NEAR(b.image_query.at(0, 0), 0.99753, 1e-5);
  EXPECT_NEAR(b.image_query.at(0, 1), 0.00247, 1e-5);
}

TEST(TopOneTest, TextQueriesNormalizeOverImages) {
  // Column l of the score matrix becomes row l of the text-query distribution.
  const Tensor s = Tensor::matrix(2, 2, {0.0, 1.0, std::log(3.0), 2.0});
  const auto p = topone_probs(s, 1.0);
  EXPECT_NEAR(p.text_query.at(0, 0), 0.25, 1e-15);
  EXPECT_NEAR(p.text_query.at(0, 1), 0.75, 1e-15);
  for (std::size_t r = 0; r < 2; ++r) {
    EXPECT_NEAR(p.text_query.at(r, 0) + p.text_query.at(r, 1), 1.0, 1e-15);
    EXPECT_NEAR(p.image_query.at(r, 0) + p.image_query.at(r, 1), 1.0, 1e-15);
  }
}

TEST(DistillLossTest, UniformIsTwoLnB) {
  const Tensor z = Tensor::matrix(4, 4, std::vector<double>(16, 0.0));
  EXPECT_NEAR(distill_loss(z, z).item(), 2.0 * std::log(4.0), 1e-12);
}

TEST(DistillLossTest, MatchesTwoLoopOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t b = 2 + trial % 6;
    const Tensor sa = random_matrix(rng, b, b, 2.0, false);
    const Tensor sm = random_matrix(rng, b, b, 0.5, false);
    EXPECT_NEAR(distill_loss(sa, sm).item(), two_loop_distill(sa, sm, 6.0), 1e-12);
  }
}

TEST(DistillLossTest, NeverBelowTeacherEntropy) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> scale(0.1, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t b = 2 + trial % 7;
    const Tensor sa = random_matrix(rng, b, b, scale(rng), false);
    const Tensor sm = random_matrix(rng, b, b, scale(rng) / 6.0, false);
    EXPECT_GE(distill_loss(sa, sm).item() - teacher_entropy(sa), -1e-9);
  }
}

TEST(DistillLossTest, EqualsEntropyForMatchingStudent) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t b = 2 + trial % 7;
    const Tensor sa = random_matrix(rng, b, b, 3.0, false);
    // A global shift leaves both softmax directions unchanged.
    const Tensor sm = ops::add_scalar(ops::scale(sa, 1.0 / 6.0), 0.3);
    EXPECT_NEAR(distill_loss(sa, sm).item(), teacher_entropy(sa), 1e-9);
  }
}

TEST(DistillLossTest, TeacherReceivesNoGradient) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t b = 2 + trial % 5;
    Tensor sa = random_matrix(rng, b, b, 2.0, true);
    Tensor sm = random_matrix(rng, b, b, 0.5, true);
    Tape tape;
    {
      Tape::Scope scope(tape);
      tape.backward(distill_loss(sa, sm));
    }
    for (double g : sa.grad()) EXPECT_EQ(g, 0.0);
    double norm = 0.0;
    for (double g : sm.grad()) norm += std::abs(g);
    EXPECT_GT(norm, 0.0);
  }
}

TEST(DistillLossTest, GradcheckStudent) {
  std::mt19937_64 rng(29);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t b = 2 + trial % 5;
    const Tensor sa = random_matrix(rng, b, b, 2.0, false);
    auto r = gradcheck([&](const std::vector<Tensor>& in) { return distill_loss(sa, in[0]); },
                       {random_matrix(rng, b, b, 0.5)});
    worst = std::max(worst, r.max_rel_error);
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(DistillLossTest, Errors) {
  const Tensor a = Tensor::matrix(2, 2, std::vector<double>(4, 0.0));
  const Tensor b = Tensor::matrix(3, 3, std::vector<double>(9, 0.0));
  EXPECT_THROW(distill_loss(a, b), DimensionError);
  EXPECT_THROW(distill_loss(a, a, 0.0), InvalidArgument);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  Tensor x = Tensor::matrix(1, 2, {1.0, -2.0}, true);
  Tensor frozen = Tensor::matrix(1, 1, {5.0}, true);
  Adam opt({x, frozen}, AdamConfig{.lr = 0.1});
  Tape tape;
  {
    Tape::Scope scope(tape);
    tape.backward(ops::sum(ops::mul(x, Tensor::matrix(1, 2, {3.0, -0.5}))));
  }
  frozen.clear_grad();
  opt.step();
  EXPECT_NEAR(x.data()[0], 1.0 - 0.1, 1e-8);
  EXPECT_NEAR(x.data()[1], -2.0 + 0.1, 1e-7);
  EXPECT_EQ(frozen.data()[0], 5.0);
  EXPECT_EQ(opt.steps(), 1u);
}

TEST(AdamTest, MinimizesQuadratic) {
  Tensor x = Tensor::matrix(1, 3, {4.0, -3.0, 0.5}, true);
  Adam opt({x}, AdamConfig{.lr = 0.05});
  for (int i = 0; i < 500; ++i) {
    Tape tape;
    {
      Tape::Scope scope(tape);
      tape.backward(ops::sum(ops::mul(x, x)));
    }
    opt.step();
  }
  for (double v : x.data()) EXPECT_LT(std::abs(v), 0.05);
}

}  // namespace
}  // namespace aladin::train
