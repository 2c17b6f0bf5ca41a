// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include "retrieval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/error.hpp"

namespace aladin::retrieval {
namespace {

void fill(RecallReport& r, std::span<const std::size_t> ranks) {
  const double n = static_cast<double>(ranks.size());
  auto pct = [&](std::size_t k) {
    return 100.0 * static_cast<double>(std::count_if(
                       ranks.begin(), ranks.end(), [k](std::size_t x) { return x < k; })) /
           n;
  };
  r.r1 = pct(1);
  r.r5 = pct(5);
  r.r10 = pct(10);
  r.rsum = r.r1 + r.r5 + r.r10;
  r.n_queries = ranks.size();
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j);
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  const auto ra = average_ranks(a), rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

}  // namespace

RecallReport report_from_ranks(const std::string& direction,
                               std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw InvalidArgument("evaluate: no queries");
  RecallReport r;
  r.direction = direction;
  fill(r, ranks);
  return r;
}

std::size_t rank_of(std::span<const double> scores, std::size_t target) {
  const double s = scores[target];
  std::size_t rank = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > s || (scores[i] == s && i < target)) ++rank;
  }
  return rank;
}

RecallPair recall_from_scores(const Tensor& scores, std::span<const std::size_t> owner) {
  const std::size_t n = scores.rows(), m = scores.cols();
  if (n == 0 || m == 0) throw InvalidArgument("evaluate: empty split");
  if (owner.size() != m) throw DimensionError("evaluate: caption owner list does not match scores");

  std::vector<std::size_t> t2i, i2t(n, m);
  std::vector<double> column(n);
  for (std::size_t l = 0; l < m; ++l) {
    for (std::size_t k = 0; k < n; ++k) column[k] = scores.at(k, l);
    t2i.push_back(rank_of(column, owner[l]));
  }
  const auto data = scores.data();
  for (std::size_t k = 0; k < n; ++k) {
    const auto row = data.subspan(k * m, m);
    for (std::size_t l = 0; l < m; ++l) {
      if (owner[l] == k) i2t[k] = std::min(i2t[k], rank_of(row, l));
    }
  }
  return {report_from_ranks(kTextToImage, t2i), report_from_ranks(kImageToText, i2t)};
}

double matrix_spearman(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("spearman: shapes differ: " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
  return spearman(a.data(), b.data());
}

double mean_spearman(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("spearman: shapes differ: " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
  const std::size_t n = a.rows(), m = a.cols();
  double total = 0.0;
  std::vector<double> ca(n), cb(n);
  for (std::size_t k = 0; k < n; ++k) {
    total += spearman(a.data().subspan(k * m, m), b.data().subspan(k * m, m));
  }
  for (std::size_t l = 0; l < m; ++l) {
    for (std::size_t k = 0; k < n; ++k) {
      ca[k] = a.at(k, l);
      cb[k] = b.at(k, l);
    }
    total += spearman(ca, cb);
  }
  return total / static_cast<double>(n + m);
}

}  // namespace aladin::retrieval
