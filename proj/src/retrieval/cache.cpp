// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include "retrieval/cache.hpp"

#include <algorithm>
#include <cmath>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "common/log.hpp"
#include "tensor/ops.hpp"

namespace aladin::retrieval {
namespace {

constexpr std::size_t kEncodeChunk = 64;

std::vector<TokenSequence> sequences_of(std::span<const CachedItem> items) {
  std::vector<TokenSequence> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.sequence);
  return out;
}

bool same_tensor(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() &&
         std::equal(a.data().begin(), a.data().end(), b.data().begin());
}

void append_embeddings(const Tensor& rows, std::vector<CachedItem>& items,
                       std::size_t first) {
  const std::size_t d = rows.cols();
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const auto row = rows.data().subspan(i * d, d);
    items[first + i].embedding.assign(row.begin(), row.end());
  }
}

}  // namespace

std::vector<double> unit_vector(std::span<const double> v) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  double n = std::sqrt(ss);
  if (n < ops::kNormFloor) {
    n = ops::kNormFloor;
    log_warning("cosine: zero-norm embedding, applying norm floor");
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

SideIndex::SideIndex(std::span<const CachedItem> items)
    : tokens(sequences_of(items)), dim(items.front().embedding.size()) {
  unit_embeddings.reserve(items.size() * dim);
  for (const auto& it : items) {
    if (it.embedding.size() != dim) throw FormatError("cache: embedding sizes differ");
    const auto u = unit_vector(it.embedding);
    unit_embeddings.insert(unit_embeddings.end(), u.begin(), u.end());
  }
}

FeatureCache::FeatureCache(std::vector<CachedItem> images, std::vector<CachedItem> captions)
    : images_(std::move(images)), captions_(std::move(captions)) {
  if (images_.empty() || captions_.empty()) {
    throw InvalidArgument("cache: need at least one image and one caption");
  }
  auto by_id = [](const CachedItem& a, const CachedItem& b) { return a.id < b.id; };
  std::sort(images_.begin(), images_.end(), by_id);
  std::sort(captions_.begin(), captions_.end(), by_id);
  image_index_ = std::make_shared<SideIndex>(images_);
  caption_index_ = std::make_shared<SideIndex>(captions_);
  if (image_index_->dim != caption_index_->dim) {
    throw FormatError("cache: image and caption embeddings differ in size");
  }
}

bool operator==(const FeatureCache& a, const FeatureCache& b) {
  auto same = [](const std::vector<CachedItem>& x, const std::vector<CachedItem>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].id != y[i].id || x[i].sequence.modality != y[i].sequence.modality ||
          x[i].embedding != y[i].embedding ||
          !same_tensor(x[i].sequence.tokens, y[i].sequence.tokens)) {
        return false;
      }
    }
    return true;
  };
  return same(a.images_, b.images_) && same(a.captions_, b.captions_);
}

FeatureCache build_cache(const model::Model& model, const corpus::PairedCorpus& corpus,
                         std::span<const std::uint64_t> image_ids) {
  if (image_ids.empty()) throw InvalidArgument("build_cache: empty image set");
  Tape::Pause no_grad;
  std::vector<std::uint64_t> caption_ids;
  for (auto i : image_ids) {
    const auto& caps = corpus.images.at(i).caption_ids;
    caption_ids.insert(caption_ids.end(), caps.begin(), caps.end());
  }

  std::vector<CachedItem> images, captions;
  for (std::size_t b = 0; b < image_ids.size(); b += kEncodeChunk) {
    const std::size_t e = std::min(image_ids.size(), b + kEncodeChunk);
    std::vector<Tensor> regions;
    for (std::size_t i = b; i < e; ++i) regions.push_back(corpus.regions(image_ids[i]));
    const auto seqs = model.backbone.encode_batch(regions, {});
    for (std::size_t i = b; i < e; ++i) images.push_back({image_ids[i], seqs[i - b], {}});
    append_embeddings(model.matching.encode(seqs), images, b);
  }
  for (std::size_t b = 0; b < caption_ids.size(); b += kEncodeChunk) {
    const std::size_t e = std::min(caption_ids.size(), b + kEncodeChunk);
    std::vector<std::vector<std::uint32_t>> words;
    for (std::size_t i = b; i < e; ++i) words.push_back(corpus.captions.at(caption_ids[i]).words);
    const auto seqs = model.backbone.encode_batch({}, words);
    for (std::size_t i = b; i < e; ++i) captions.push_back({caption_ids[i], seqs[i - b], {}});
    append_embeddings(model.matching.encode(seqs), captions, b);
  }
  return FeatureCache(std::move(images), std::move(captions));
}

FeatureCache build_cache(const model::Model& model, const corpus::PairedCorpus& corpus,
                         corpus::Split split) {
  const auto ids = corpus.images_in(split);
  if (ids.empty()) {
    throw InvalidArgument(std::string("build_cache: split '") + corpus::split_name(split) +
                          "' is empty");
  }
  return build_cache(model, corpus, ids);
}

std::string serialize(const FeatureCache& cache) {
  io::Writer w;
  w.magic(kCacheMagic);
  w.u32(kCacheVersion);
  const auto& images = cache.items(Modality::kImage);
  const auto& captions = cache.items(Modality::kText);
  w.u64(images.size() + captions.size());
  w.u64(cache.dim());
  for (const auto* side : {&images, &captions}) {
    for (const auto& it : *side) {
      w.u64(it.id);
      w.u8(static_cast<std::uint8_t>(it.sequence.modality));
      w.u64(it.sequence.tokens.rows());
      w.u64(it.sequence.tokens.cols());
      w.f64s(it.sequence.tokens.data());
      w.f64s(it.embedding);
    }
  }
  return w.take();
}

FeatureCache deserialize_cache(const std::string& bytes, const std::string& context) {
  io::Reader r(bytes, context);
  r.expect_magic(kCacheMagic);
  const auto version = r.u32();
  if (version != kCacheVersion) {
    throw FormatError(context + ": unsupported cache version " + std::to_string(version));
  }
  const auto count = r.u64();
  const auto dim = r.u64();
  if (dim == 0 || dim > (1u << 16)) throw FormatError(context + ": bad embedding size");
  std::vector<CachedItem> images, captions;
  for (std::uint64_t n = 0; n < count; ++n) {
    CachedItem it;
    it.id = r.u64();
    const auto modality = r.u8();
    if (modality > 1) throw FormatError(context + ": bad modality tag");
    const auto rows = r.u64();
    const auto cols = r.u64();
    if (cols != dim || rows < 2 || rows > (1u << 20)) {
      throw FormatError(context + ": bad sequence dims");
    }
    r.need(rows * cols * 8);
    std::vector<double> tokens(rows * cols);
    r.f64s(tokens);
    it.sequence = {Tensor::matrix(rows, cols, std::move(tokens)),
                   static_cast<Modality>(modality)};
    it.embedding.resize(dim);
    r.f64s(it.embedding);
    (modality == 0 ? images : captions).push_back(std::move(it));
  }
  if (!r.at_end()) throw FormatError(context + ": trailing bytes");
  return FeatureCache(std::move(images), std::move(captions));
}

void write(const FeatureCache& cache, const std::string& path) {
  io::write_file(path, serialize(cache));
}

FeatureCache read_cache(const std::string& path) {
  return deserialize_cache(io::read_file(path), path);
}

}  // namespace aladin::retrieval
