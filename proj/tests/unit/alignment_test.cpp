// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "align/alignment.hpp"
#include "common/error.hpp"
#include "support/gradcheck.hpp"
#include "tensor/ops.hpp"

namespace aladin::align {
namespace {

using model::Modality;
using testing::random_matrix;

TokenSequence seq(Tensor tokens, Modality m) { return {std::move(tokens), m}; }

// CLS row followed by the given content rows.
TokenSequence with_cls(std::size_t d, std::vector<double> content, Modality m) {
  std::vector<double> data(d, 0.5);
  data.insert(data.end(), content.begin(), content.end());
  const std::size_t rows = data.size() / d;
  return seq(Tensor::matrix(rows, d, std::move(data)), m);
}

TokenSequence random_seq(std::mt19937_64& rng, std::size_t len, std::size_t d,
                         Modality m) {
  return seq(random_matrix(rng, len + 1, d, 1.0, false), m);
}

double nested_loop_cosine(const Tensor& a, std::size_t i, const Tensor& b, std::size_t j) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t k = 0; k < a.cols(); ++k) {
    dot += a.at(i, k) * b.at(j, k);
    na += a.at(i, k) * a.at(i, k);
    nb += b.at(j, k) * b.at(j, k);
  }
  return dot / std::sqrt(na * nb);
}

// Independent per-pair reference: explicit cosine loops, max over regions,
// sum over words.
double oracle_score(const TokenSequence& v, const TokenSequence& c) {
  double s = 0.0;
  for (std::size_t j = 1; j < c.tokens.rows(); ++j) {
    double best = -2.0;
    for (std::size_t i = 1; i < v.tokens.rows(); ++i) {
      best = std::max(best, nested_loop_cosine(v.tokens, i, c.tokens, j));
    }
    s += best;
  }
  return s;
}

TEST(AlignmentMatrixTest, Examples) {
  const auto v = with_cls(2, {1.0, 0.0}, Modality::kImage);
  const auto c = with_cls(2, {1.0, 0.0}, Modality::kText);
  const Tensor a = alignment_matrix(v, c);
  ASSERT_EQ(a.shape(), (Shape{1, 1}));
  EXPECT_DOUBLE_EQ(a.item(), 1.0);

  const auto ortho_v = with_cls(3, {1, 0, 0, 0, 2, 0}, Modality::kImage);
  const auto ortho_c = with_cls(3, {0, 0, 3, 0, 0, -1}, Modality::kText);
  const Tensor zero = alignment_matrix(ortho_v, ortho_c);
  for (double x : zero.data()) EXPECT_EQ(x, 0.0);

  std::mt19937_64 rng(1);
  const auto rv = random_seq(rng, 2, 5, Modality::kImage);
  const auto rc = random_seq(rng, 3, 5, Modality::kText);
  const Tensor ra = alignment_matrix(rv, rc);
  ASSERT_EQ(ra.shape(), (Shape{2, 3}));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      EXPECT_NEAR(ra.at(i, j), nested_loop_cosine(rv.tokens, i + 1, rc.tokens, j + 1), 1e-15);

  EXPECT_THROW(alignment_matrix(rv, random_seq(rng, 3, 4, Modality::kText)), DimensionError);
}

TEST(PoolMrswTest, Examples) {
  EXPECT_EQ(pool_mrsw(Tensor::zeros({3, 4})), 0.0);
  EXPECT_DOUBLE_EQ(pool_mrsw(Tensor::full({3, 5}, 0.3)), 5 * 0.3);
  const Tensor a = Tensor::matrix(3, 2, {0.1, 0.9, 0.5, 0.2, 0.3, 0.3});
  EXPECT_DOUBLE_EQ(pool_mrsw(a), 1.4);
  EXPECT_DOUBLE_EQ(pool_mrsw_scalar(a).item(), 1.4);
  EXPECT_THROW(pool_mrsw(Tensor::zeros({0, 2})), InvalidArgument);
}

TEST(PoolMrswTest, GradientRoutesThroughArgmaxRegions) {
  const Tensor a = Tensor::matrix(3, 2, {0.1, 0.9, 0.5, 0.2, 0.3, 0.3}, true);
  Tape tape;
  {
    Tape::Scope scope(tape);
    tape.backward(pool_mrsw_scalar(a));
  }
  const std::vector<double> expected = {0, 1, 1, 0, 0, 0};
  EXPECT_EQ(std::vector<double>(a.grad().begin(), a.grad().end()), expected);

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor x = random_matrix(rng, 2 + trial % 4, 1 + trial % 5, 1.0, true);
    EXPECT_LE(testing::gradcheck([](const std::vector<Tensor>& in) {
                return pool_mrsw_scalar(in[0]);
              }, {x}).max_rel_error,
              1e-4);
  }
}

TEST(ScoreAllTest, SinglePairMatchesPool) {
  std::mt19937_64 rng(3);
  const std::vector<TokenSequence> v = {random_seq(rng, 4, 6, Modality::kImage)};
  const std::vector<TokenSequence> c = {random_seq(rng, 5, 6, Modality::kText)};
  const Tensor s = score_all(v, c);
  ASSERT_EQ(s.shape(), (Shape{1, 1}));
  EXPECT_EQ(s.item(), pool_mrsw(alignment_matrix(v[0], c[0])));
}

TEST(ScoreAllTest, BatchedMatchesPerPairOracle) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> len(1, 9);
  std::size_t pairs = 0;
  while (pairs < 50) {
    std::vector<TokenSequence> v, c;
    for (int i = 0; i < 5; ++i) v.push_back(random_seq(rng, len(rng), 8, Modality::kImage));
    for (int i = 0; i < 2; ++i) c.push_back(random_seq(rng, len(rng), 8, Modality::kText));
    const Tensor s = score_all(v, c);
    for (std::size_t k = 0; k < v.size(); ++k) {
      for (std::size_t l = 0; l < c.size(); ++l, ++pairs) {
        EXPECT_EQ(s.at(k, l), pool_mrsw(alignment_matrix(v[k], c[l])));
        EXPECT_NEAR(s.at(k, l), oracle_score(v[k], c[l]), 1e-12);
        EXPECT_LE(std::abs(s.at(k, l)), static_cast<double>(c[l].length()));
      }
    }
  }
}

TEST(ScoreAllTest, DuplicateCaptionDuplicatesColumn) {
  std::mt19937_64 rng(5);
  std::vector<TokenSequence> v, c;
  for (int i = 0; i < 4; ++i) v.push_back(random_seq(rng, 3 + i, 6, Modality::kImage));
  for (int i = 0; i < 3; ++i) c.push_back(random_seq(rng, 2 + i, 6, Modality::kText));
  c.push_back(c[1]);
  const Tensor s = score_all(v, c);
  for (std::size_t k = 0; k < v.size(); ++k) EXPECT_EQ(s.at(k, 1), s.at(k, 3));
}

TEST(ScoreAllTest, InvariantToTokenPermutation) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const auto v = random_seq(rng, 6, 5, Modality::kImage);
    const auto c = random_seq(rng, 7, 5, Modality::kText);
    auto shuffled = [&](const TokenSequence& s) {
      std::vector<std::size_t> order(s.length());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i + 1;
      std::shuffle(order.begin(), order.end(), rng);
      std::vector<Tensor> rows = {ops::slice_rows(s.tokens, 0, 1)};
      for (auto r : order) rows.push_back(ops::slice_rows(s.tokens, r, r + 1));
      return seq(ops::concat_rows(rows), s.modality);
    };
    const double base = oracle_score(v, c);
    const std::vector<TokenSequence> pv = {shuffled(v)}, pc = {shuffled(c)};
    EXPECT_NEAR(score_all(pv, pc).item(), base, 1e-12);
  }
}

TEST(ScoreBatchTest, MatchesCollectionScoringAndGradchecks) {
  std::mt19937_64 rng(7);
  std::vector<TokenSequence> v, c;
  for (int i = 0; i < 3; ++i) v.push_back(random_seq(rng, 2 + i, 4, Modality::kImage));
  for (int i = 0; i < 3; ++i) c.push_back(random_seq(rng, 4 - i, 4, Modality::kText));
  const Tensor batched = score_batch(v, c);
  const Tensor collection = score_all(v, c);
  for (std::size_t i = 0; i < batched.numel(); ++i) {
    EXPECT_NEAR(batched.data()[i], collection.data()[i], 1e-12);
  }

  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Tensor> inputs;
    for (int i = 0; i < 4; ++i) inputs.push_back(random_matrix(rng, 2 + (trial + i) % 3, 3, 1.0, true));
    const double err = testing::gradcheck(
        [](const std::vector<Tensor>& in) {
          const std::vector<TokenSequence> iv = {seq(in[0], Modality::kImage),
                                                 seq(in[1], Modality::kImage)};
          const std::vector<TokenSequence> ic = {seq(in[2], Modality::kText),
                                                 seq(in[3], Modality::kText)};
          return score_batch(iv, ic);
        },
        inputs).max_rel_error;
    EXPECT_LE(err, 1e-4);
  }
}

}  // namespace
}  // namespace aladin::align
