// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include "corpus/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"

namespace aladin::corpus {
namespace {

constexpr double kFillerProbability = 0.7;

std::uint64_t uniform_in(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
  return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

void require(bool ok, const std::string& key, const std::string& why) {
  if (!ok) throw InvalidArgument("config key '" + key + "': " + why);
}

}  // namespace

const char* split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw InvalidArgument("unknown split '" + name + "' (train|val|test)");
}

CorpusConfig CorpusConfig::from(const KeyValueConfig& cfg) {
  CorpusConfig c;
  c.n_images = cfg.get_u64("n_images", c.n_images);
  c.captions_per_image = cfg.get_u64("captions_per_image", c.captions_per_image);
  c.concepts = cfg.get_u64("concepts", c.concepts);
  c.d_v = cfg.get_u64("d_v", c.d_v);
  c.d_c = cfg.get_u64("d_c", c.d_c);
  c.regions_min = cfg.get_u64("regions_min", c.regions_min);
  c.regions_max = cfg.get_u64("regions_max", c.regions_max);
  c.words_min = cfg.get_u64("words_min", c.words_min);
  c.words_max = cfg.get_u64("words_max", c.words_max);
  c.concepts_min = cfg.get_u64("concepts_min", c.concepts_min);
  c.concepts_max = cfg.get_u64("concepts_max", c.concepts_max);
  c.filler_words = cfg.get_u64("filler_words", c.filler_words);
  c.noise_sigma = cfg.get_double("noise_sigma", c.noise_sigma);
  c.seed = cfg.get_u64("seed", c.seed);
  c.split_fractions = {cfg.get_double("split_train", c.split_fractions[0]),
                       cfg.get_double("split_val", c.split_fractions[1]),
                       cfg.get_double("split_test", c.split_fractions[2])};
  c.validate();
  return c;
}

void CorpusConfig::validate() const {
  require(n_images >= 1, "n_images", "must be >= 1");
  require(captions_per_image >= 1, "captions_per_image", "must be >= 1");
  require(concepts >= 1, "concepts", "must be >= 1");
  require(d_v >= 1, "d_v", "must be >= 1");
  require(d_c >= 1, "d_c", "must be >= 1");
  require(regions_min >= 1 && regions_min <= regions_max, "regions_min",
          "range [regions_min, regions_max] must be nonempty and start at >= 1");
  require(words_min >= 1 && words_min <= words_max, "words_min",
          "range [words_min, words_max] must be nonempty and start at >= 1");
  require(concepts_min >= 1 && concepts_min <= concepts_max, "concepts_min",
          "range [concepts_min, concepts_max] must be nonempty and start at >= 1");
  require(concepts_max <= concepts, "concepts_max", "exceeds concept count");
  require(concepts_max <= regions_min, "concepts_max",
          "must not exceed regions_min (every concept needs a region)");
  require(concepts_max <= words_min, "concepts_max",
          "must not exceed words_min (every concept needs a word)");
  require(noise_sigma >= 0.0, "noise_sigma", "must be >= 0");
  for (double f : split_fractions) {
    require(f >= 0.0 && f <= 1.0, "split_train", "fractions must lie in [0, 1]");
  }
  const double total =
      split_fractions[0] + split_fractions[1] + split_fractions[2];
  require(std::abs(total - 1.0) <= 1e-9, "split_train",
          "split fractions must sum to 1");
}

std::vector<double> ConceptVocabulary::project(std::uint32_t concept_id,
                                               std::uint64_t d_v) const {
  std::vector<double> out(d_v, 0.0);
  const double* c = vectors.data() + concept_id * dim;
  for (std::uint64_t i = 0; i < dim; ++i) {
    for (std::uint64_t j = 0; j < d_v; ++j) out[j] += c[i] * projection[i * d_v + j];
  }
  return out;
}

ConceptVocabulary make_vocabulary(const CorpusConfig& config) {
  ConceptVocabulary v;
  v.count = config.concepts;
  v.dim = config.d_c;
  v.seed = derive_seed(config.seed, "concepts");
  Rng rng(v.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  v.vectors.resize(v.count * v.dim);
  for (std::uint64_t k = 0; k < v.count; ++k) {
    double* row = v.vectors.data() + k * v.dim;
    double norm = 0.0;
    do {
      norm = 0.0;
      for (std::uint64_t i = 0; i < v.dim; ++i) {
        row[i] = normal(rng);
        norm += row[i] * row[i];
      }
      norm = std::sqrt(norm);
    } while (norm < 1e-6);
    for (std::uint64_t i = 0; i < v.dim; ++i) row[i] /= norm;
  }
  const double proj_std = 1.0 / std::sqrt(static_cast<double>(v.dim));
  std::normal_distribution<double> proj(0.0, proj_std);
  v.projection.resize(v.dim * config.d_v);
  for (double& p : v.projection) p = proj(rng);
  return v;
}

Tensor PairedCorpus::regions(std::uint64_t image_id) const {
  const Image& img = images.at(image_id);
  return Tensor::matrix(img.n_regions, config.d_v, img.regions);
}

std::vector<std::uint64_t> PairedCorpus::images_in(Split s) const {
  std::vector<std::uint64_t> out;
  for (std::uint64_t i = 0; i < images.size(); ++i) {
    if (images[i].split == s) out.push_back(i);
  }
  return out;
}

std::vector<std::uint64_t> PairedCorpus::captions_in(Split s) const {
  std::vector<std::uint64_t> out;
  for (std::uint64_t i : images_in(s)) {
    out.insert(out.end(), images[i].caption_ids.begin(), images[i].caption_ids.end());
  }
  return out;
}

PairedCorpus generate(const CorpusConfig& config) {
  config.validate();
  const ConceptVocabulary vocab = make_vocabulary(config);
  Rng rng(derive_seed(config.seed, "corpus"));
  std::normal_distribution<double> noise(0.0, 1.0);
  std::bernoulli_distribution filler(kFillerProbability);

  PairedCorpus corpus;
  corpus.config = config;
  corpus.images.resize(config.n_images);
  std::vector<std::uint32_t> all_concepts(config.concepts);
  std::iota(all_concepts.begin(), all_concepts.end(), 0u);

  for (std::uint64_t i = 0; i < config.n_images; ++i) {
    Image& img = corpus.images[i];
    const auto n_c = uniform_in(rng, config.concepts_min, config.concepts_max);
    // Partial Fisher-Yates for a distinct concept subset.
    for (std::uint64_t k = 0; k < n_c; ++k) {
      const auto j = uniform_in(rng, k, config.concepts - 1);
      std::swap(all_concepts[k], all_concepts[j]);
    }
    img.concepts.assign(all_concepts.begin(), all_concepts.begin() + n_c);
    std::sort(img.concepts.begin(), img.concepts.end());

    img.n_regions = uniform_in(rng, config.regions_min, config.regions_max);
    std::vector<std::uint32_t> region_concepts(img.concepts);
    while (region_concepts.size() < img.n_regions) {
      region_concepts.push_back(img.concepts[uniform_in(rng, 0, n_c - 1)]);
    }
    std::shuffle(region_concepts.begin(), region_concepts.end(), rng);
    img.regions.reserve(img.n_regions * config.d_v);
    for (std::uint32_t c : region_concepts) {
      for (double v : vocab.project(c, config.d_v)) {
        img.regions.push_back(v + config.noise_sigma * noise(rng));
      }
    }

    for (std::uint64_t r = 0; r < config.captions_per_image; ++r) {
      Caption cap;
      cap.image = i;
      const auto m = uniform_in(rng, config.words_min, config.words_max);
      cap.words.assign(img.concepts.begin(), img.concepts.end());
      while (cap.words.size() < m) {
        if (filler(rng)) {
          cap.words.push_back(static_cast<std::uint32_t>(
              config.concepts + uniform_in(rng, 0, config.filler_words - 1)));
        } else {
          cap.words.push_back(img.concepts[uniform_in(rng, 0, n_c - 1)]);
        }
      }
      std::shuffle(cap.words.begin(), cap.words.end(), rng);
      img.caption_ids.push_back(corpus.captions.size());
      corpus.captions.push_back(std::move(cap));
    }
  }
  return split(std::move(corpus), config.split_fractions,
               derive_seed(config.seed, "split"));
}

PairedCorpus split(PairedCorpus corpus, const std::array<double, 3>& fractions,
                   std::uint64_t seed) {
  const double total = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(total - 1.0) > 1e-9 ||
      std::any_of(fractions.begin(), fractions.end(),
                  [](double f) { return f < 0.0; })) {
    throw InvalidArgument("split fractions must be nonnegative and sum to 1");
  }
  const std::uint64_t n = corpus.images.size();
  const auto n_val = static_cast<std::uint64_t>(std::llround(fractions[1] * n));
  const auto n_test = static_cast<std::uint64_t>(std::llround(fractions[2] * n));
  if (n_val + n_test > n) {
    throw InvalidArgument("split fractions leave no room for rounding");
  }
  std::vector<std::uint64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::uint64_t n_train = n - n_val - n_test;
  for (std::uint64_t k = 0; k < n; ++k) {
    corpus.images[order[k]].split =
        k < n_train ? Split::kTrain
                    : (k < n_train + n_val ? Split::kVal : Split::kTest);
  }
  corpus.config.split_fractions = fractions;
  return corpus;
}

std::string serialize(const PairedCorpus& corpus) {
  const CorpusConfig& c = corpus.config;
  io::Writer w;
  w.magic(kMagic);
  w.u32(kVersion);
  for (std::uint64_t v :
       {c.n_images, c.captions_per_image, c.concepts, c.d_v, c.d_c,
        c.regions_min, c.regions_max, c.words_min, c.words_max, c.concepts_min,
        c.concepts_max, c.filler_words}) {
    w.u64(v);
  }
  w.f64(c.noise_sigma);
  w.u64(c.seed);
  for (double f : c.split_fractions) w.f64(f);

  w.u64(corpus.images.size());
  w.u64(corpus.captions.size());
  for (const Image& img : corpus.images) {
    w.u8(static_cast<std::uint8_t>(img.split));
    w.u32(static_cast<std::uint32_t>(img.concepts.size()));
    for (auto k : img.concepts) w.u32(k);
    w.u64(img.n_regions);
    w.f64s(img.regions);
  }
  for (const Caption& cap : corpus.captions) {
    w.u64(cap.image);
    w.u64(cap.words.size());
    for (auto id : cap.words) w.u32(id);
  }
  return w.take();
}

PairedCorpus deserialize(const std::string& bytes, const std::string& context) {
  io::Reader r(bytes, context);
  r.expect_magic(kMagic);
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw FormatError(context + ": unsupported corpus version " +
                      std::to_string(version));
  }
  PairedCorpus corpus;
  CorpusConfig& c = corpus.config;
  for (std::uint64_t* v :
       {&c.n_images, &c.captions_per_image, &c.concepts, &c.d_v, &c.d_c,
        &c.regions_min, &c.regions_max, &c.words_min, &c.words_max,
        &c.concepts_min, &c.concepts_max, &c.filler_words}) {
    *v = r.u64();
  }
  c.noise_sigma = r.f64();
  c.seed = r.u64();
  for (double& f : c.split_fractions) f = r.f64();

  const std::uint64_t n_images = r.u64();
  const std::uint64_t n_captions = r.u64();
  if (n_images != c.n_images || n_captions != c.n_images * c.captions_per_image) {
    throw FormatError(context + ": item counts disagree with config echo");
  }
  corpus.images.resize(n_images);
  for (std::uint64_t i = 0; i < n_images; ++i) {
    Image& img = corpus.images[i];
    const std::uint8_t s = r.u8();
    if (s > 2) throw FormatError(context + ": bad split tag");
    img.split = static_cast<Split>(s);
    const std::uint32_t n_c = r.u32();
    r.need(std::size_t{n_c} * 4);
    img.concepts.resize(n_c);
    for (auto& k : img.concepts) k = r.u32();
    img.n_regions = r.u64();
    r.need(img.n_regions * c.d_v * 8);
    img.regions.resize(img.n_regions * c.d_v);
    r.f64s(img.regions);
  }
  corpus.captions.resize(n_captions);
  for (std::uint64_t j = 0; j < n_captions; ++j) {
    Caption& cap = corpus.captions[j];
    cap.image = r.u64();
    if (cap.image >= n_images) throw FormatError(context + ": caption image id out of range");
    const std::uint64_t m = r.u64();
    r.need(m * 4);
    cap.words.resize(m);
    for (auto& id : cap.words) id = r.u32();
    corpus.images[cap.image].caption_ids.push_back(j);
  }
  if (!r.at_end()) throw FormatError(context + ": trailing bytes");
  return corpus;
}

void write(const PairedCorpus& corpus, const std::string& path) {
  io::write_file(path, serialize(corpus));
}

PairedCorpus read(const std::string& path) {
  return deserialize(io::read_file(path), path);
}

}  // namespace aladin::corpus
