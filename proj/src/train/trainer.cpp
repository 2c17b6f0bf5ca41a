// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include "train/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

#include <json.hpp>

#include "align/alignment.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"
#include "retrieval/cache.hpp"
#include "retrieval/search.hpp"
#include "tensor/ops.hpp"
#include "train/adam.hpp"

namespace aladin::train {
namespace {

using model::TokenSequence;

constexpr std::size_t kEncodeChunk = 64;

const char* short_name(Scheme id) {
  switch (id) {
    case Scheme::kAlign: return "A/ft.";
    case Scheme::kDistill: return "D";
    case Scheme::kTriplet: return "T";
    case Scheme::kTripletFinetune: return "T/ft.";
    case Scheme::kJoint: return "A/ft.+D/ft.";
  }
  return "?";
}

// Backbone outputs for every train item, used when the backbone is frozen.
struct FrozenSequences {
  std::vector<std::optional<TokenSequence>> images, captions;
};

FrozenSequences precompute(const model::Model& model, const corpus::PairedCorpus& corpus,
                           const std::vector<std::uint64_t>& image_ids) {
  Tape::Pause no_grad;
  FrozenSequences f;
  f.images.resize(corpus.images.size());
  f.captions.resize(corpus.captions.size());
  std::vector<std::uint64_t> caption_ids;
  for (auto i : image_ids) {
    const auto& c = corpus.images[i].caption_ids;
    caption_ids.insert(caption_ids.end(), c.begin(), c.end());
  }
  for (std::size_t b = 0; b < image_ids.size(); b += kEncodeChunk) {
    const std::size_t e = std::min(image_ids.size(), b + kEncodeChunk);
    std::vector<Tensor> regions;
    for (std::size_t i = b; i < e; ++i) regions.push_back(corpus.regions(image_ids[i]));
    const auto seqs = model.backbone.encode_batch(regions, {});
    for (std::size_t i = b; i < e; ++i) f.images[image_ids[i]] = seqs[i - b];
  }
  for (std::size_t b = 0; b < caption_ids.size(); b += kEncodeChunk) {
    const std::size_t e = std::min(caption_ids.size(), b + kEncodeChunk);
    std::vector<std::vector<std::uint32_t>> words;
    for (std::size_t i = b; i < e; ++i) words.push_back(corpus.captions[caption_ids[i]].words);
    const auto seqs = model.backbone.encode_batch({}, words);
    for (std::size_t i = b; i < e; ++i) f.captions[caption_ids[i]] = seqs[i - b];
  }
  return f;
}

void emit(std::ostream* out, const nlohmann::ordered_json& j) {
  if (out != nullptr) *out << j.dump() << '\n';
}

double validate(const model::Model& model, const corpus::PairedCorpus& corpus,
                const TrainScheme& s, std::uint64_t epoch, std::uint64_t step,
                std::ostream* metrics) {
  const retrieval::FeatureCache cache =
      retrieval::build_cache(model, corpus, corpus::Split::kVal);
  std::vector<retrieval::ScoreSource> sources;
  if (s.triplet_on_alignment) sources.push_back(retrieval::ScoreSource::kAlignment);
  if (s.triplet_on_matching || s.distill) sources.push_back(retrieval::ScoreSource::kMatching);
  double rsum = 0.0;
  for (auto source : sources) {
    const auto r = retrieval::evaluate(cache, corpus, {.source = source});
    nlohmann::ordered_json j;
    j["epoch"] = epoch;
    j["step"] = step;
    j["split"] = "val";
    j["source"] = retrieval::source_name(source);
    for (const auto* rep : {&r.text_to_image, &r.image_to_text}) {
      j[rep->direction] = {{"r1", rep->r1}, {"r5", rep->r5}, {"r10", rep->r10}};
    }
    j["rsum"] = r.rsum();
    emit(metrics, j);
    rsum = r.rsum();
  }
  return rsum;
}

}  // namespace

TrainScheme scheme(Scheme id) {
  TrainScheme s;
  s.id = id;
  s.name = short_name(id);
  switch (id) {
    case Scheme::kAlign:
      s.triplet_on_alignment = s.backbone_trainable = true;
      break;
    case Scheme::kDistill:
      s.distill = s.matching_trainable = s.needs_alignment_warmup = true;
      break;
    case Scheme::kTriplet:
      s.triplet_on_matching = s.matching_trainable = s.needs_alignment_warmup = true;
      break;
    case Scheme::kTripletFinetune:
      s.triplet_on_matching = s.matching_trainable = s.backbone_trainable = true;
      break;
    case Scheme::kJoint:
      s.triplet_on_alignment = s.distill = true;
      s.backbone_trainable = s.matching_trainable = s.needs_alignment_warmup = true;
      break;
  }
  return s;
}

TrainScheme parse_scheme(const std::string& name) {
  const std::pair<const char*, Scheme> aliases[] = {
      {"align", Scheme::kAlign},     {"distill", Scheme::kDistill},
      {"triplet", Scheme::kTriplet}, {"triplet-ft", Scheme::kTripletFinetune},
      {"joint", Scheme::kJoint}};
  for (const auto& [alias, id] : aliases) {
    if (name == alias || name == short_name(id)) return scheme(id);
  }
  throw InvalidArgument("unknown training scheme '" + name + "'");
}

TrainConfig TrainConfig::from(const KeyValueConfig& cfg) {
  TrainConfig c;
  c.epochs = cfg.get_u64("epochs", c.epochs);
  c.max_steps = cfg.get_u64("max_steps", c.max_steps);
  c.batch_size = cfg.get_u64("batch_size", c.batch_size);
  c.margin = cfg.get_double("margin", c.margin);
  c.temperature = cfg.get_double("temperature", c.temperature);
  c.lr_head = cfg.get_double("lr_head", c.lr_head);
  c.lr_backbone = cfg.get_double("lr_backbone", c.lr_backbone);
  c.beta1 = cfg.get_double("beta1", c.beta1);
  c.beta2 = cfg.get_double("beta2", c.beta2);
  c.adam_eps = cfg.get_double("adam_eps", c.adam_eps);
  c.weight_triplet = cfg.get_double("weight_triplet", c.weight_triplet);
  c.weight_distill = cfg.get_double("weight_distill", c.weight_distill);
  c.validate = cfg.get_bool("validate", c.validate);
  c.seed = cfg.get_u64("seed", c.seed);
  c.check();
  return c;
}

void TrainConfig::check() const {
  auto fail = [](const char* key, const char* why) {
    throw InvalidArgument(std::string("config key '") + key + "': " + why);
  };
  if (epochs == 0 && max_steps == 0) fail("epochs", "must be >= 1");
  if (batch_size < 2) fail("batch_size", "must be >= 2");
  if (!(margin > 0.0)) fail("margin", "must be positive");
  if (!(temperature > 0.0)) fail("temperature", "must be positive");
  if (!(lr_head > 0.0)) fail("lr_head", "must be positive");
  if (!(lr_backbone > 0.0)) fail("lr_backbone", "must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) fail("beta1", "must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) fail("beta2", "must be in [0, 1)");
  if (!(adam_eps > 0.0)) fail("adam_eps", "must be positive");
  if (!(weight_triplet >= 0.0)) fail("weight_triplet", "must be >= 0");
  if (!(weight_distill >= 0.0)) fail("weight_distill", "must be >= 0");
}

TrainSummary train(model::Model& model, const corpus::PairedCorpus& corpus,
                   const TrainScheme& s, const TrainConfig& cfg, std::ostream* metrics) {
  cfg.check();
  if (s.needs_alignment_warmup && model.alignment_steps == 0) {
    throw PreconditionError("scheme " + s.name +
                            " needs an alignment-trained backbone checkpoint; run "
                            "train-align first");
  }
  if (corpus.config.vocab_size() > model.config.vocab) {
    throw InvalidArgument("config key 'vocab': model vocabulary " +
                          std::to_string(model.config.vocab) + " is smaller than corpus vocabulary " +
                          std::to_string(corpus.config.vocab_size()));
  }
  if (corpus.config.d_v != model.config.d_v) {
    throw InvalidArgument("config key 'd_v': model expects " + std::to_string(model.config.d_v) +
                          ", corpus has " + std::to_string(corpus.config.d_v));
  }
  std::vector<std::uint64_t> order = corpus.images_in(corpus::Split::kTrain);
  if (order.size() < 2) throw InvalidArgument("train: need at least 2 training images");

  const auto backbone_params = model.backbone.parameters();
  const auto matching_params = model.matching.parameters();
  std::optional<Adam> backbone_opt, matching_opt;
  if (s.backbone_trainable) {
    backbone_opt.emplace(backbone_params,
                         AdamConfig{cfg.lr_backbone, cfg.beta1, cfg.beta2, cfg.adam_eps});
  }
  if (s.matching_trainable) {
    matching_opt.emplace(matching_params,
                         AdamConfig{cfg.lr_head, cfg.beta1, cfg.beta2, cfg.adam_eps});
  }
  std::optional<FrozenSequences> frozen;
  if (!s.backbone_trainable) frozen = precompute(model, corpus, order);

  Rng rng(derive_seed(cfg.seed, "shuffle"));
  const std::uint64_t r = corpus.config.captions_per_image;
  const std::uint64_t epochs =
      cfg.epochs == 0 ? std::numeric_limits<std::uint64_t>::max() : cfg.epochs;
  TrainSummary summary;
  bool done = false;
  for (std::uint64_t epoch = 0; epoch < epochs && !done; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t b = 0; b + 2 <= order.size() && !done; b += cfg.batch_size) {
      const std::size_t e = std::min<std::size_t>(order.size(), b + cfg.batch_size);
      std::vector<TokenSequence> img_seqs, cap_seqs;
      Tape tape;
      Tape::Scope scope(tape);
      if (frozen) {
        for (std::size_t i = b; i < e; ++i) {
          const auto& img = corpus.images[order[i]];
          img_seqs.push_back(*frozen->images[order[i]]);
          cap_seqs.push_back(*frozen->captions[img.caption_ids[(epoch + order[i]) % r]]);
        }
      } else {
        std::vector<Tensor> regions;
        std::vector<std::vector<std::uint32_t>> words;
        for (std::size_t i = b; i < e; ++i) {
          const auto& img = corpus.images[order[i]];
          regions.push_back(corpus.regions(order[i]));
          words.push_back(corpus.captions[img.caption_ids[(epoch + order[i]) % r]].words);
        }
        auto seqs = model.backbone.encode_batch(regions, words);
        img_seqs.assign(seqs.begin(), seqs.begin() + static_cast<std::ptrdiff_t>(e - b));
        cap_seqs.assign(seqs.begin() + static_cast<std::ptrdiff_t>(e - b), seqs.end());
      }

      Tensor s_a, s_m;
      if (s.triplet_on_alignment) {
        s_a = align::score_batch(img_seqs, cap_seqs);
      } else if (s.distill) {
        s_a = align::score_all(img_seqs, cap_seqs);
      }
      if (s.triplet_on_matching || s.distill) {
        s_m = ops::cosine_pairwise(model.matching.encode(img_seqs),
                                   model.matching.encode(cap_seqs));
      }
      std::vector<Tensor> terms;
      double triplet_value = 0.0, distill_value = 0.0;
      if (s.triplet_on_alignment || s.triplet_on_matching) {
        const Tensor t = triplet_loss(s.triplet_on_alignment ? s_a : s_m, cfg.margin);
        triplet_value = t.item();
        terms.push_back(s.distill ? ops::scale(t, cfg.weight_triplet) : t);
      }
      if (s.distill) {
        const Tensor d = distill_loss(s_a, s_m, cfg.temperature);
        distill_value = d.item();
        terms.push_back(s.triplet_on_alignment ? ops::scale(d, cfg.weight_distill) : d);
      }
      const Tensor loss = terms.size() == 1 ? terms.front() : ops::add(terms[0], terms[1]);
      tape.backward(loss);
      if (backbone_opt) backbone_opt->step();
      if (matching_opt) matching_opt->step();
      for (auto p : backbone_params) p.clear_grad();
      for (auto p : matching_params) p.clear_grad();

      ++summary.steps;
      summary.losses.push_back(loss.item());
      nlohmann::ordered_json j;
      j["step"] = summary.steps;
      j["epoch"] = epoch;
      j["scheme"] = s.name;
      j["loss"] = loss.item();
      if (s.triplet_on_alignment || s.triplet_on_matching) j["triplet"] = triplet_value;
      if (s.distill) j["distill"] = distill_value;
      emit(metrics, j);
      if (cfg.max_steps != 0 && summary.steps >= cfg.max_steps) done = true;
    }
    if (cfg.validate && !corpus.images_in(corpus::Split::kVal).empty()) {
      summary.val_rsum = validate(model, corpus, s, epoch, summary.steps, metrics);
    }
  }
  if (s.triplet_on_alignment && s.backbone_trainable) model.alignment_steps += summary.steps;
  return summary;
}

}  // namespace aladin::train
