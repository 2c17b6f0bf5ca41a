// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "common/error.hpp"
#include "model/model.hpp"
#include "support/gradcheck.hpp"
#include "tensor/ops.hpp"

namespace aladin::model {
namespace {

ModelConfig small_config() {
  ModelConfig c;
  c.hidden_d = 16;
  c.d_v = 8;
  c.vocab = 30;
  c.heads = 2;
  c.seed = 3;
  return c;
}

bool same_values(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() &&
         std::equal(a.data().begin(), a.data().end(), b.data().begin());
}

Tensor random_regions(Rng& rng, std::size_t n, std::size_t d_v) {
  return aladin::testing::random_matrix(rng, n, d_v, 1.0, false);
}

Tensor permute_rows(const Tensor& x, const std::vector<std::size_t>& order) {
  std::vector<double> out;
  for (auto r : order) {
    for (std::size_t c = 0; c < x.cols(); ++c) out.push_back(x.at(r, c));
  }
  return Tensor::matrix(order.size(), x.cols(), std::move(out));
}

TEST(BackboneTest, VisualShapeForEveryRegionCount) {
  const auto b = Backbone::init(small_config(), 1);
  Rng rng(2);
  for (std::size_t n = 1; n <= 10; ++n) {
    const auto seq = b.encode_visual(random_regions(rng, n, 8));
    EXPECT_EQ(seq.tokens.rows(), n + 1);
    EXPECT_EQ(seq.dim(), 16u);
    EXPECT_EQ(seq.modality, Modality::kImage);
  }
  EXPECT_THROW(b.encode_visual(Tensor::zeros({0, 8})), InvalidArgument);
  EXPECT_THROW(b.encode_visual(Tensor::zeros({2, 7})), DimensionError);
}

TEST(BackboneTest, Deterministic) {
  const auto b = Backbone::init(small_config(), 1);
  Rng rng(4);
  const Tensor regions = random_regions(rng, 5, 8);
  EXPECT_TRUE(same_values(b.encode_visual(regions).tokens,
                          b.encode_visual(regions).tokens));
  const std::vector<std::uint32_t> words = {3, 1, 4, 1, 5};
  EXPECT_TRUE(same_values(b.encode_text(words).tokens, b.encode_text(words).tokens));
}

TEST(BackboneTest, RegionPermutationEquivariance) {
  const auto b = Backbone::init(small_config(), 1);
  Rng rng(5);
  const Tensor regions = random_regions(rng, 6, 8);
  const std::vector<std::size_t> order = {3, 0, 5, 1, 4, 2};
  const Tensor base = b.encode_visual(regions).tokens;
  const Tensor perm = b.encode_visual(permute_rows(regions, order)).tokens;
  for (std::size_t c = 0; c < 16; ++c) EXPECT_NEAR(perm.at(0, c), base.at(0, c), 1e-12);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t c = 0; c < 16; ++c) {
      EXPECT_NEAR(perm.at(i + 1, c), base.at(order[i] + 1, c), 1e-12);
    }
  }
}

TEST(BackboneTest, TextShapeAndSensitivity) {
  const auto b = Backbone::init(small_config(), 1);
  for (std::size_t m = 1; m <= 12; ++m) {
    std::vector<std::uint32_t> words(m);
    std::iota(words.begin(), words.end(), 0u);
    EXPECT_EQ(b.encode_text(words).tokens.rows(), m + 1);
  }
  const std::vector<std::uint32_t> zero = {0}, one = {1};
  EXPECT_FALSE(same_values(b.encode_text(zero).tokens, b.encode_text(one).tokens));

  std::vector<std::uint32_t> words = {7, 2, 9, 4, 11};
  const Tensor fwd = ops::slice_rows(b.encode_text(words).tokens, 0, 1);
  std::reverse(words.begin(), words.end());
  const Tensor rev = ops::slice_rows(b.encode_text(words).tokens, 0, 1);
  double diff = 0.0;
  for (std::size_t c = 0; c < 16; ++c) diff = std::max(diff, std::abs(fwd.at(0, c) - rev.at(0, c)));
  EXPECT_GT(diff, 1e-9);

  const std::vector<std::uint32_t> bad = {30};
  EXPECT_THROW(b.encode_text(bad), InvalidArgument);
  EXPECT_THROW(b.encode_text(std::vector<std::uint32_t>{}), InvalidArgument);
}

TEST(BackboneTest, InitReproducibleAndCounted) {
  ModelConfig c;  // d=64, two layers, vocab 300
  const auto a = Backbone::init(c, 9);
  const auto b = Backbone::init(c, 9);
  checkpoint::NamedTensors na, nb;
  a.append_named(na);
  b.append_named(nb);
  EXPECT_EQ(checkpoint::serialize(na), checkpoint::serialize(nb));

  // visual 64*64+64, words 300*64, two CLS rows, per layer 12d^2 + 13d
  const std::size_t d = 64;
  const std::size_t expected = 64 * d + d + 300 * d + 2 * d + 2 * (12 * d * d + 13 * d);
  EXPECT_EQ(expected, 123456u);
  EXPECT_EQ(Backbone::parameter_count(c), expected);
  std::size_t counted = 0;
  for (const auto& t : a.parameters()) counted += t.numel();
  EXPECT_EQ(counted, expected);

  c.heads = 5;
  EXPECT_THROW(Backbone::init(c, 1), InvalidArgument);
}

TEST(BackboneTest, InitTokenNormsBounded) {
  ModelConfig c;
  const auto b = Backbone::init(c, 11);
  Rng rng(12);
  std::uniform_int_distribution<std::uint32_t> word(0, 299);
  for (int trial = 0; trial < 20; ++trial) {
    const auto v = b.encode_visual(random_regions(rng, 4 + trial % 7, 64));
    std::vector<std::uint32_t> words(4 + trial % 9);
    for (auto& w : words) w = word(rng);
    const auto t = b.encode_text(words);
    for (const Tensor* x : {&v.tokens, &t.tokens}) {
      for (std::size_t r = 0; r < x->rows(); ++r) {
        double n = 0.0;
        for (std::size_t k = 0; k < x->cols(); ++k) n += x->at(r, k) * x->at(r, k);
        EXPECT_GE(std::sqrt(n), 0.1);
        EXPECT_LE(std::sqrt(n), 100.0);
      }
    }
  }
}

TEST(BackboneTest, EncoderWeightsSharedAcrossModalities) {
  const auto b = Backbone::init(small_config(), 1);
  const Tensor& wq = b.layers().front().wq;
  Rng rng(6);
  const Tensor regions = random_regions(rng, 3, 8);
  const std::vector<std::uint32_t> words = {1, 2, 3};

  for (int modality = 0; modality < 2; ++modality) {
    Tape tape;
    Tape::Scope scope(tape);
    const auto seq = modality == 0 ? b.encode_visual(regions) : b.encode_text(words);
    tape.backward(ops::sum(ops::mul(seq.tokens, seq.tokens)));
    EXPECT_TRUE(wq.has_grad());
  }
  // A single parameter list backs both paths.
  const auto params = b.parameters();
  EXPECT_EQ(std::count_if(params.begin(), params.end(),
                          [&](const Tensor& t) { return t.id() == wq.id(); }),
            1);
}

TEST(BackboneTest, BatchEncodeMatchesSingleEncodes) {
  const auto b = Backbone::init(small_config(), 1);
  Rng rng(7);
  std::vector<Tensor> images = {random_regions(rng, 4, 8), random_regions(rng, 7, 8)};
  std::vector<std::vector<std::uint32_t>> captions = {{1, 2}, {5, 6, 7, 8, 9}};
  const auto batch = b.encode_batch(images, captions);
  ASSERT_EQ(batch.size(), 4u);
  // Visual output is unaffected by whatever text shares the pass.
  EXPECT_TRUE(same_values(batch[0].tokens, b.encode_visual(images[0]).tokens));
  EXPECT_TRUE(same_values(batch[1].tokens, b.encode_visual(images[1]).tokens));
  EXPECT_TRUE(same_values(batch[2].tokens, b.encode_text(captions[0]).tokens));
  EXPECT_TRUE(same_values(batch[3].tokens, b.encode_text(captions[1]).tokens));
  EXPECT_EQ(batch[3].modality, Modality::kText);
}

TEST(MatchingHeadTest, ShapeDeterminismAndSharing) {
  const auto cfg = small_config();
  const auto head = MatchingHead::init(cfg, 2);
  EXPECT_EQ(head.layers().size(), 2u);
  Rng rng(8);
  for (std::size_t len = 1; len <= 6; ++len) {
    TokenSequence s{aladin::testing::random_matrix(rng, len + 1, 16, 1.0, false),
                    Modality::kImage};
    const Tensor e = head.encode_common(s);
    EXPECT_EQ(e.rows(), 1u);
    EXPECT_EQ(e.cols(), 16u);
    EXPECT_TRUE(same_values(e, head.encode_common(s)));
    TokenSequence as_text{s.tokens, Modality::kText};
    EXPECT_TRUE(same_values(e, head.encode_common(as_text)));
  }
  TokenSequence wrong{Tensor::zeros({3, 8}), Modality::kText};
  EXPECT_THROW(head.encode_common(wrong), DimensionError);
}

TEST(MatchingHeadTest, BatchedEncodeMatchesSingle) {
  const auto head = MatchingHead::init(small_config(), 2);
  Rng rng(9);
  std::vector<TokenSequence> seqs;
  for (std::size_t len : {2, 5, 3}) {
    seqs.push_back({aladin::testing::random_matrix(rng, len + 1, 16, 1.0, false),
                    Modality::kText});
  }
  const Tensor all = head.encode(seqs);
  ASSERT_EQ(all.rows(), 3u);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    EXPECT_TRUE(same_values(ops::slice_rows(all, i, i + 1), head.encode_common(seqs[i])));
  }
}

TEST(MatchingHeadTest, ScoresAreCosines) {
  Rng rng(10);
  const Tensor a = aladin::testing::random_matrix(rng, 3, 5, 1.0, false);
  const Tensor b = aladin::testing::random_matrix(rng, 3, 5, 1.0, false);
  const Tensor s = ops::cosine_pairwise(a, b);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      double dot = 0, na = 0, nb = 0;
      for (std::size_t k = 0; k < 5; ++k) {
        dot += a.at(i, k) * b.at(j, k);
        na += a.at(i, k) * a.at(i, k);
        nb += b.at(j, k) * b.at(j, k);
      }
      EXPECT_NEAR(s.at(i, j), dot / std::sqrt(na * nb), 1e-12);
    }
  }
}

TEST(ModelTest, SaveLoadRoundTrip) {
  auto m = Model::init(small_config());
  m.alignment_steps = 42;
  const auto path = (std::filesystem::temp_directory_path() / "aladin_model_test.ckpt").string();
  m.save(path);
  const auto loaded = Model::load(path);
  EXPECT_EQ(loaded.alignment_steps, 42u);
  EXPECT_EQ(loaded.config.hidden_d, 16u);
  EXPECT_EQ(checkpoint::serialize(loaded.named()), checkpoint::serialize(m.named()));
  std::filesystem::remove(path);

  auto named = m.named();
  named.pop_back();
  EXPECT_THROW(Model::from_named(named), FormatError);
}

TEST(ModelTest, CloneIsIndependent) {
  const auto m = Model::init(small_config());
  auto c = m.clone();
  c.backbone.layers().front().wq.node()->data[0] += 1.0;
  EXPECT_NE(m.backbone.layers().front().wq.data()[0],
            c.backbone.layers().front().wq.data()[0]);
}

}  // namespace
}  // namespace aladin::model
