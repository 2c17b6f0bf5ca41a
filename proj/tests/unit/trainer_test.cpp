// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "common/error.hpp"
#include "corpus/corpus.hpp"
#include "model/model.hpp"
#include "train/trainer.hpp"

namespace aladin::train {
namespace {

corpus::PairedCorpus small_corpus() {
  corpus::CorpusConfig c;
  c.n_images = 48;
  return corpus::generate(c);
}

TrainConfig quick(std::uint64_t steps) {
  TrainConfig c;
  c.epochs = 100;
  c.max_steps = steps;
  c.batch_size = 8;
  c.validate = false;
  return c;
}

std::vector<std::vector<double>> snapshot(const checkpoint::NamedTensors& named) {
  std::vector<std::vector<double>> out;
  for (const auto& [name, t] : named) out.emplace_back(t.data().begin(), t.data().end());
  return out;
}

TEST(SchemeTest, Flags) {
  const auto a = scheme(Scheme::kAlign);
  EXPECT_TRUE(a.triplet_on_alignment && a.backbone_trainable);
  EXPECT_FALSE(a.matching_trainable || a.distill || a.needs_alignment_warmup);
  const auto d = scheme(Scheme::kDistill);
  EXPECT_TRUE(d.distill && d.matching_trainable && d.needs_alignment_warmup);
  EXPECT_FALSE(d.backbone_trainable || d.triplet_on_matching);
  const auto t = scheme(Scheme::kTriplet);
  EXPECT_TRUE(t.triplet_on_matching && !t.backbone_trainable);
  EXPECT_TRUE(scheme(Scheme::kTripletFinetune).backbone_trainable);
  const auto j = scheme(Scheme::kJoint);
  EXPECT_TRUE(j.distill && j.triplet_on_alignment && j.backbone_trainable &&
              j.matching_trainable && j.needs_alignment_warmup);
}

TEST(SchemeTest, ParseNamesAndAliases) {
  EXPECT_EQ(parse_scheme("A/ft.").id, Scheme::kAlign);
  EXPECT_EQ(parse_scheme("align").id, Scheme::kAlign);
  EXPECT_EQ(parse_scheme("D").id, Scheme::kDistill);
  EXPECT_EQ(parse_scheme("T/ft.").id, Scheme::kTripletFinetune);
  EXPECT_EQ(parse_scheme("joint").id, Scheme::kJoint);
  EXPECT_EQ(parse_scheme("A/ft.+D/ft.").id, Scheme::kJoint);
  EXPECT_THROW(parse_scheme("bogus"), InvalidArgument);
}

TEST(TrainConfigTest, BadValuesNameTheKey) {
  KeyValueConfig kv;
  kv.set("batch_size", "1");
  try {
    TrainConfig::from(kv);
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("batch_size"), std::string::npos);
  }
}

TEST(TrainerTest, WarmupRequired) {
  const auto corpus = small_corpus();
  auto m = model::Model::init({});
  EXPECT_THROW(train(m, corpus, scheme(Scheme::kJoint), quick(1)), PreconditionError);
  EXPECT_THROW(train(m, corpus, scheme(Scheme::kDistill), quick(1)), PreconditionError);
}

TEST(TrainerTest, AlignCountsWarmupSteps) {
  const auto corpus = small_corpus();
  auto m = model::Model::init({});
  const auto s = train(m, corpus, scheme(Scheme::kAlign), quick(3));
  EXPECT_EQ(s.steps, 3u);
  EXPECT_EQ(m.alignment_steps, 3u);
  EXPECT_NO_THROW(train(m, corpus, scheme(Scheme::kJoint), quick(1)));
}

TEST(TrainerTest, DistillTouchesOnlyMatchingHead) {
  const auto corpus = small_corpus();
  auto m = model::Model::init({});
  train(m, corpus, scheme(Scheme::kAlign), quick(2));
  const auto backbone = snapshot(m.backbone_named());
  const auto head = snapshot(m.matching_named());
  const auto s = train(m, corpus, scheme(Scheme::kDistill), quick(5));
  EXPECT_EQ(s.steps, 5u);
  EXPECT_EQ(snapshot(m.backbone_named()), backbone);
  EXPECT_NE(snapshot(m.matching_named()), head);
}

TEST(TrainerTest, TripletFrozenVersusFinetune) {
  const auto corpus = small_corpus();
  auto m = model::Model::init({});
  EXPECT_THROW(train(m, corpus, scheme(Scheme::kTriplet), quick(1)), PreconditionError);
  train(m, corpus, scheme(Scheme::kAlign), quick(1));
  const auto backbone = snapshot(m.backbone_named());
  train(m, corpus, scheme(Scheme::kTriplet), quick(2));
  EXPECT_EQ(snapshot(m.backbone_named()), backbone);
  train(m, corpus, scheme(Scheme::kTripletFinetune), quick(2));
  EXPECT_NE(snapshot(m.backbone_named()), backbone);
}

TEST(TrainerTest, Deterministic) {
  const auto corpus = small_corpus();
  auto a = model::Model::init({});
  auto b = model::Model::init({});
  const auto sa = train(a, corpus, scheme(Scheme::kAlign), quick(4));
  const auto sb = train(b, corpus, scheme(Scheme::kAlign), quick(4));
  EXPECT_EQ(sa.losses, sb.losses);
  EXPECT_EQ(snapshot(a.backbone_named()), snapshot(b.backbone_named()));
}

TEST(TrainerTest, MetricLinesPerStep) {
  const auto corpus = small_corpus();
  auto m = model::Model::init({});
  std::ostringstream log;
  auto cfg = quick(3);
  train(m, corpus, scheme(Scheme::kAlign), cfg, &log);
  const std::string text = log.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_NE(text.find("\"step\":3"), std::string::npos);
  EXPECT_NE(text.find("\"loss\""), std::string::npos);
}

TEST(TrainerTest, MismatchedCorpusRejected) {
  corpus::CorpusConfig c;
  c.n_images = 24;
  c.d_v = 32;
  const auto corpus = corpus::generate(c);
  auto m = model::Model::init({});
  EXPECT_THROW(train(m, corpus, scheme(Scheme::kAlign), quick(1)), InvalidArgument);
}

// Fifty steps of the alignment scheme on the default corpus lower the loss.
TEST(TrainerTest, LossFallsOverFiftySteps) {
  const auto corpus = corpus::generate({});
  std::vector<double> first, last;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    model::ModelConfig mc;
    mc.seed = seed;
    auto m = model::Model::init(mc);
    TrainConfig cfg = quick(50);
    cfg.batch_size = 32;
    cfg.seed = seed;
    const auto s = train(m, corpus, scheme(Scheme::kAlign), cfg);
    ASSERT_EQ(s.losses.size(), 50u);
    first.push_back(s.losses.front());
    last.push_back(s.losses.back());
  }
  std::sort(first.begin(), first.end());
  std::sort(last.begin(), last.end());
  EXPECT_LT(last[1], first[1]);
}

}  // namespace
}  // namespace aladin::train
