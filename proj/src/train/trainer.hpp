// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "common/config.hpp"
#include "corpus/corpus.hpp"
#include "model/model.hpp"
#include "train/losses.hpp"

namespace aladin::train {

enum class Scheme { kAlign, kDistill, kTriplet, kTripletFinetune, kJoint };

// Which losses run, what they score, and which parameters move.
struct TrainScheme {
  Scheme id = Scheme::kAlign;
  std::string name;
  bool triplet_on_alignment = false;
  bool triplet_on_matching = false;
  bool distill = false;
  bool backbone_trainable = false;
  bool matching_trainable = false;
  // Needs a backbone that has already been trained with the alignment loss.
  bool needs_alignment_warmup = false;
};

TrainScheme scheme(Scheme id);
// Accepts the short names (A/ft., D, T, T/ft., A/ft.+D/ft.) and the CLI
// aliases (align, distill, triplet, triplet-ft, joint).
TrainScheme parse_scheme(const std::string& name);

struct TrainConfig {
  std::uint64_t epochs = 10;
  std::uint64_t max_steps = 0;  // 0: no cap
  std::uint64_t batch_size = 32;
  double margin = kDefaultMargin;
  double temperature = kDefaultTemperature;
  double lr_head = 1e-3;
  double lr_backbone = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_triplet = 1.0;
  double weight_distill = 1.0;
  bool validate = true;
  std::uint64_t seed = 1;  // batch order

  static TrainConfig from(const KeyValueConfig& cfg);
  void check() const;
};

struct TrainSummary {
  std::uint64_t steps = 0;
  std::vector<double> losses;  // one per step
  double val_rsum = 0.0;       // last validation, 0 if skipped
};

// Runs the scheme over the corpus train split, updating `model` in place.
// Writes one JSON line per step and per validation to `metrics` if given.
TrainSummary train(model::Model& model, const corpus::PairedCorpus& corpus,
                   const TrainScheme& scheme, const TrainConfig& config,
                   std::ostream* metrics = nullptr);

}  // namespace aladin::train
