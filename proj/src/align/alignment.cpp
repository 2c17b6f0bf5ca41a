// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include "align/alignment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <thread>

#include "common/error.hpp"
#include "common/log.hpp"
#include "tensor/ops.hpp"

namespace aladin::align {
namespace {

Tensor content_tokens(const TokenSequence& s) {
  if (s.tokens.rows() < 2) {
    throw InvalidArgument("alignment: sequence has no tokens besides CLS");
  }
  return ops::slice_rows(s.tokens, 1, s.tokens.rows());
}

void check_dims(std::size_t a, std::size_t b) {
  if (a != b) {
    throw DimensionError("alignment: hidden sizes differ: " + std::to_string(a) +
                         " vs " + std::to_string(b));
  }
}

}  // namespace

Tensor alignment_matrix(const TokenSequence& image, const TokenSequence& caption) {
  check_dims(image.dim(), caption.dim());
  return ops::cosine_pairwise(content_tokens(image), content_tokens(caption));
}

double pool_mrsw(const Tensor& a) {
  if (a.rank() != 2 || a.rows() == 0 || a.cols() == 0) {
    throw InvalidArgument("pool_mrsw: empty alignment matrix");
  }
  double s = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double best = a.at(0, j);
    for (std::size_t i = 1; i < a.rows(); ++i) best = std::max(best, a.at(i, j));
    s += best;
  }
  return s;
}

Tensor pool_mrsw_scalar(const Tensor& a) {
  if (a.rank() != 2 || a.rows() == 0 || a.cols() == 0) {
    throw InvalidArgument("pool_mrsw: empty alignment matrix");
  }
  return ops::sum(ops::col_max(a).values);
}

PaddedTokens::PaddedTokens(std::span<const TokenSequence> sequences) {
  if (sequences.empty()) throw InvalidArgument("alignment: empty sequence list");
  dim_ = sequences.front().dim();
  for (const auto& s : sequences) {
    check_dims(dim_, s.dim());
    if (s.length() == 0) {
      throw InvalidArgument("alignment: sequence has no tokens besides CLS");
    }
    lengths_.push_back(s.length());
    max_length_ = std::max(max_length_, s.length());
  }
  units_.assign(sequences.size() * max_length_ * dim_, 0.0);
  for (std::size_t item = 0; item < sequences.size(); ++item) {
    const auto data = sequences[item].tokens.data();
    for (std::size_t t = 0; t < lengths_[item]; ++t) {
      const double* src = data.data() + (t + 1) * dim_;
      double ss = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) ss += src[j] * src[j];
      double n = std::sqrt(ss);
      if (n < ops::kNormFloor) {
        n = ops::kNormFloor;
        log_warning("alignment: zero-norm token, applying norm floor");
      }
      double* dst = units_.data() + (item * max_length_ + t) * dim_;
      for (std::size_t j = 0; j < dim_; ++j) dst[j] = src[j] / n;
    }
  }
}

double mrsw_score(const PaddedTokens& images, std::size_t k,
                  const PaddedTokens& captions, std::size_t l) {
  const std::size_t d = images.dim();
  const std::size_t n = images.length(k);
  double s = 0.0;
  for (std::size_t j = 0; j < captions.length(l); ++j) {
    const double* w = captions.token(l, j);
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* v = images.token(k, i);
      double acc = 0.0;
      for (std::size_t t = 0; t < d; ++t) acc += v[t] * w[t];
      if (i == 0 || acc > best) best = acc;
    }
    s += best;
  }
  return s;
}

std::vector<double> score_row(const PaddedTokens& images, std::size_t k,
                              const PaddedTokens& captions,
                              std::span<const std::size_t> columns) {
  check_dims(images.dim(), captions.dim());
  std::vector<double> out;
  if (columns.empty()) {
    out.reserve(captions.size());
    for (std::size_t l = 0; l < captions.size(); ++l) {
      out.push_back(mrsw_score(images, k, captions, l));
    }
  } else {
    out.reserve(columns.size());
    for (std::size_t l : columns) out.push_back(mrsw_score(images, k, captions, l));
  }
  return out;
}

Tensor score_all(const PaddedTokens& images, const PaddedTokens& captions) {
  check_dims(images.dim(), captions.dim());
  const std::size_t rows = images.size(), cols = captions.size();
  std::vector<double> out(rows * cols);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      for (std::size_t l = 0; l < cols; ++l) {
        out[k * cols + l] = mrsw_score(images, k, captions, l);
      }
    }
  };
  const std::size_t threads = std::min(scoring_threads(), rows);
  if (threads <= 1) {
    work(0, rows);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (rows + threads - 1) / threads;
    for (std::size_t b = 0; b < rows; b += chunk) {
      pool.emplace_back(work, b, std::min(rows, b + chunk));
    }
    for (auto& t : pool) t.join();
  }
  return Tensor::matrix(rows, cols, std::move(out));
}

Tensor score_all(std::span<const TokenSequence> images,
                 std::span<const TokenSequence> captions) {
  return score_all(PaddedTokens(images), PaddedTokens(captions));
}

Tensor score_batch(std::span<const TokenSequence> images,
                   std::span<const TokenSequence> captions) {
  if (images.empty() || captions.empty()) {
    throw InvalidArgument("score_batch: empty batch");
  }
  const std::size_t d = images.front().dim();
  std::vector<Tensor> regions, words;
  std::vector<std::size_t> region_offsets = {0};
  for (const auto& s : images) {
    check_dims(d, s.dim());
    regions.push_back(content_tokens(s));
    region_offsets.push_back(region_offsets.back() + s.length());
  }
  std::size_t total_words = 0;
  std::vector<std::size_t> word_owner;
  for (std::size_t l = 0; l < captions.size(); ++l) {
    check_dims(d, captions[l].dim());
    words.push_back(content_tokens(captions[l]));
    total_words += captions[l].length();
    word_owner.insert(word_owner.end(), captions[l].length(), l);
  }
  const Tensor a = ops::cosine_pairwise(ops::concat_rows(regions), ops::concat_rows(words));

  std::vector<Tensor> maxima;
  maxima.reserve(images.size());
  for (std::size_t k = 0; k < images.size(); ++k) {
    maxima.push_back(ops::col_max(
        ops::slice_rows(a, region_offsets[k], region_offsets[k + 1])).values);
  }
  const Tensor per_word = maxima.size() == 1 ? maxima.front() : ops::concat_rows(maxima);

  // 0/1 membership of each word column in its caption.
  std::vector<double> group(total_words * captions.size(), 0.0);
  for (std::size_t w = 0; w < total_words; ++w) group[w * captions.size() + word_owner[w]] = 1.0;
  return ops::matmul(per_word, Tensor::matrix(total_words, captions.size(), std::move(group)));
}

std::size_t scoring_threads() {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const char* env = std::getenv("ALDN_THREADS");
  if (env == nullptr || *env == '\0') return hw;
  std::size_t n = 0;
  const char* end = env + std::strlen(env);
  const auto [ptr, ec] = std::from_chars(env, end, n);
  if (ec != std::errc() || ptr != end || n == 0) {
    log_warning("ALDN_THREADS must be a positive integer; using 1");
    return 1;
  }
  return std::min(n, hw);
}

}  // namespace aladin::align
