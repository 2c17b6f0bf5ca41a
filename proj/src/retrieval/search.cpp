// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include "retrieval/search.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>

#include "common/error.hpp"

namespace aladin::retrieval {
namespace {

constexpr std::size_t kNoHit = std::numeric_limits<std::size_t>::max();

double dot(const double* a, const double* b, std::size_t d) {
  double acc = 0.0;
  for (std::size_t i = 0; i < d; ++i) acc += a[i] * b[i];
  return acc;
}

// Top k of `indices` by score descending; equal scores keep ascending index,
// which is ascending id because cache sides are id-sorted.
std::vector<std::size_t> top_indices(const std::vector<double>& scores,
                                     std::vector<std::size_t> indices, std::size_t k) {
  auto better = [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
  };
  std::partial_sort(indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(k),
                    indices.end(), better);
  indices.resize(k);
  return indices;
}

std::vector<Hit> to_hits(const FeatureCache& cache, Modality target,
                         const std::vector<std::size_t>& idx,
                         const std::vector<double>& scores) {
  std::vector<Hit> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back({cache.items(target)[i].id, scores[i]});
  return out;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

void check_k(std::size_t k, std::size_t n, const char* what) {
  if (k == 0 || k > n) {
    throw InvalidArgument(std::string(what) + ": k=" + std::to_string(k) +
                          " out of range for collection of " + std::to_string(n));
  }
}

std::vector<double> matching_row(std::span<const double> query_embedding,
                                 const FeatureCache& cache, Modality target) {
  const SideIndex& side = cache.index(target);
  if (query_embedding.size() != side.dim) {
    throw DimensionError("knn_query: query size " + std::to_string(query_embedding.size()) +
                         ", cache embeddings " + std::to_string(side.dim));
  }
  const auto u = unit_vector(query_embedding);
  const std::size_t n = cache.items(target).size();
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = dot(u.data(), side.unit_embeddings.data() + i * side.dim, side.dim);
  }
  return scores;
}

// Alignment scores for the listed target indices; others stay 0.
std::vector<double> alignment_row(const Query& query, const FeatureCache& cache,
                                  std::span<const std::size_t> candidates) {
  const Modality target = query.target();
  const std::vector<TokenSequence> one = {query.sequence};
  const align::PaddedTokens q(one);
  const auto& side = cache.index(target).tokens;
  std::vector<double> scores(cache.items(target).size(), 0.0);
  for (auto i : candidates) {
    scores[i] = target == Modality::kImage ? align::mrsw_score(side, i, q, 0)
                                           : align::mrsw_score(q, 0, side, i);
  }
  return scores;
}

std::size_t index_of(const std::vector<CachedItem>& items, std::uint64_t id) {
  auto it = std::lower_bound(items.begin(), items.end(), id,
                             [](const CachedItem& c, std::uint64_t v) { return c.id < v; });
  if (it == items.end() || it->id != id) return kNoHit;
  return static_cast<std::size_t>(it - items.begin());
}

// Best 0-based rank among `targets` under the chosen score source.
std::size_t query_rank(const Query& query, const FeatureCache& cache,
                       const EvalOptions& opt, std::span<const std::size_t> targets) {
  const std::size_t n = cache.items(query.target()).size();
  std::size_t best = kNoHit;
  if (opt.source == ScoreSource::kTwoStage) {
    const std::size_t k1 = std::min(opt.k1, n);
    const auto hits = two_stage_search(query, cache, k1, k1);
    for (auto t : targets) {
      const auto id = cache.items(query.target())[t].id;
      for (std::size_t r = 0; r < hits.size(); ++r) {
        if (hits[r].id == id) best = std::min(best, r);
      }
    }
    return best;
  }
  const auto scores = opt.source == ScoreSource::kMatching
                          ? matching_row(query.embedding, cache, query.target())
                          : alignment_row(query, cache, all_indices(n));
  for (auto t : targets) best = std::min(best, rank_of(scores, t));
  return best;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

RecallPair evaluate_one(const FeatureCache& cache, const corpus::PairedCorpus& corpus,
                        const EvalOptions& opt) {
  const auto& images = cache.items(Modality::kImage);
  const auto& captions = cache.items(Modality::kText);
  std::vector<std::size_t> owner(captions.size());
  for (std::size_t l = 0; l < captions.size(); ++l) {
    const auto image_id = corpus.captions.at(captions[l].id).image;
    owner[l] = index_of(images, image_id);
    if (owner[l] == kNoHit) {
      throw InvalidArgument("evaluate: caption " + std::to_string(captions[l].id) +
                            " has its image outside the cache");
    }
  }
  using Clock = std::chrono::steady_clock;
  std::vector<double> t2i_ms, i2t_ms;
  std::vector<std::size_t> t2i, i2t(images.size(), kNoHit);
  for (std::size_t l = 0; l < captions.size(); ++l) {
    const Query q = cached_query(cache, Modality::kText, l);
    const auto t0 = Clock::now();
    t2i.push_back(query_rank(q, cache, opt, {&owner[l], 1}));
    t2i_ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
  }
  std::vector<std::vector<std::size_t>> caps_of(images.size());
  for (std::size_t l = 0; l < captions.size(); ++l) caps_of[owner[l]].push_back(l);
  for (std::size_t k = 0; k < images.size(); ++k) {
    const Query q = cached_query(cache, Modality::kImage, k);
    const auto t0 = Clock::now();
    i2t[k] = query_rank(q, cache, opt, caps_of[k]);
    i2t_ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
  }
  RecallPair out{report_from_ranks(kTextToImage, t2i), report_from_ranks(kImageToText, i2t)};
  out.text_to_image.median_ms = median(t2i_ms);
  out.image_to_text.median_ms = median(i2t_ms);
  return out;
}

}  // namespace

Query encode_query(const model::Model& model, const Tensor& regions) {
  Tape::Pause no_grad;
  Query q{model.backbone.encode_visual(regions), {}};
  const Tensor e = model.matching.encode_common(q.sequence);
  q.embedding.assign(e.data().begin(), e.data().end());
  return q;
}

Query encode_query(const model::Model& model, std::span<const std::uint32_t> words) {
  Tape::Pause no_grad;
  Query q{model.backbone.encode_text(words), {}};
  const Tensor e = model.matching.encode_common(q.sequence);
  q.embedding.assign(e.data().begin(), e.data().end());
  return q;
}

Query cached_query(const FeatureCache& cache, Modality modality, std::size_t index) {
  const auto& item = cache.items(modality).at(index);
  return {item.sequence, item.embedding};
}

std::vector<Hit> knn_query(std::span<const double> query_embedding,
                           const FeatureCache& cache, Modality target, std::size_t k) {
  const std::size_t n = cache.items(target).size();
  check_k(k, n, "knn_query");
  const auto scores = matching_row(query_embedding, cache, target);
  return to_hits(cache, target, top_indices(scores, all_indices(n), k), scores);
}

std::vector<Hit> alignment_search(const Query& query, const FeatureCache& cache,
                                  std::size_t k, std::span<const std::size_t> candidates) {
  const Modality target = query.target();
  std::vector<std::size_t> idx = candidates.empty()
                                     ? all_indices(cache.items(target).size())
                                     : std::vector<std::size_t>(candidates.begin(), candidates.end());
  check_k(k, idx.size(), "alignment_search");
  const auto scores = alignment_row(query, cache, idx);
  return to_hits(cache, target, top_indices(scores, std::move(idx), k), scores);
}

std::vector<Hit> two_stage_search(const Query& query, const FeatureCache& cache,
                                  std::size_t k1, std::size_t k) {
  const Modality target = query.target();
  const std::size_t n = cache.items(target).size();
  check_k(k1, n, "two_stage_search");
  if (k == 0 || k > k1) {
    throw InvalidArgument("two_stage_search: need 0 < k <= k1, got k=" + std::to_string(k) +
                          ", k1=" + std::to_string(k1));
  }
  const auto sim = matching_row(query.embedding, cache, target);
  const auto candidates = top_indices(sim, all_indices(n), k1);
  return alignment_search(query, cache, k, candidates);
}

const char* source_name(ScoreSource source) {
  switch (source) {
    case ScoreSource::kAlignment: return "alignment";
    case ScoreSource::kMatching: return "matching";
    case ScoreSource::kTwoStage: return "two-stage";
  }
  return "?";
}

ScoreSource parse_source(const std::string& name) {
  for (auto s : {ScoreSource::kAlignment, ScoreSource::kMatching, ScoreSource::kTwoStage}) {
    if (name == source_name(s)) return s;
  }
  throw InvalidArgument("unknown score source '" + name +
                        "' (expected alignment, matching or two-stage)");
}

RecallPair evaluate(const FeatureCache& cache, const corpus::PairedCorpus& corpus,
                    const EvalOptions& opt) {
  if (opt.source == ScoreSource::kTwoStage && opt.k1 < 10) {
    throw InvalidArgument("evaluate: two-stage needs k1 >= 10 to report recall@10");
  }
  if (opt.folds <= 1) return evaluate_one(cache, corpus, opt);

  const auto& images = cache.items(Modality::kImage);
  const auto& captions = cache.items(Modality::kText);
  if (opt.folds > images.size()) {
    throw InvalidArgument("evaluate: more folds than images");
  }
  RecallPair sum;
  sum.text_to_image.direction = kTextToImage;
  sum.image_to_text.direction = kImageToText;
  const double f = static_cast<double>(opt.folds);
  for (std::size_t fold = 0; fold < opt.folds; ++fold) {
    const std::size_t b = fold * images.size() / opt.folds;
    const std::size_t e = (fold + 1) * images.size() / opt.folds;
    std::vector<CachedItem> fi(images.begin() + b, images.begin() + e), fc;
    for (const auto& c : captions) {
      const auto img = corpus.captions.at(c.id).image;
      if (img >= images[b].id && img <= images[e - 1].id) fc.push_back(c);
    }
    const RecallPair part = evaluate_one(FeatureCache(std::move(fi), std::move(fc)), corpus, opt);
    for (auto [acc, p] : {std::pair{&sum.text_to_image, &part.text_to_image},
                          std::pair{&sum.image_to_text, &part.image_to_text}}) {
      acc->r1 += p->r1 / f;
      acc->r5 += p->r5 / f;
      acc->r10 += p->r10 / f;
      acc->rsum += p->rsum / f;
      acc->median_ms += p->median_ms / f;
      acc->n_queries += p->n_queries;
    }
  }
  return sum;
}

Tensor alignment_scores(const FeatureCache& cache) {
  return align::score_all(cache.index(Modality::kImage).tokens,
                          cache.index(Modality::kText).tokens);
}

Tensor matching_scores(const FeatureCache& cache) {
  const auto& img = cache.index(Modality::kImage);
  const auto& cap = cache.index(Modality::kText);
  const std::size_t n = cache.items(Modality::kImage).size();
  const std::size_t m = cache.items(Modality::kText).size();
  std::vector<double> out(n * m);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < m; ++l) {
      out[k * m + l] = dot(img.unit_embeddings.data() + k * img.dim,
                           cap.unit_embeddings.data() + l * cap.dim, img.dim);
    }
  }
  return Tensor::matrix(n, m, std::move(out));
}

}  // namespace aladin::retrieval
