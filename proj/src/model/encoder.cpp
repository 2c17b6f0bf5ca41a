// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include "model/encoder.hpp"

#include <cmath>
#include <random>

#include "common/error.hpp"
#include "tensor/ops.hpp"

namespace aladin::model {

Tensor normal_tensor(Shape shape, Rng& rng, double std, bool requires_grad) {
  std::normal_distribution<double> normal(0.0, std);
  std::vector<double> data(shape_numel(shape));
  for (double& v : data) v = normal(rng);
  return Tensor::from_data(std::move(shape), std::move(data), requires_grad);
}

namespace {

Tensor zeros_param(std::size_t n) { return Tensor::zeros({n}, true); }

Tensor ones_param(std::size_t n) {
  Tensor t = Tensor::full({n}, 1.0);
  t.set_requires_grad(true);
  return t;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  return ops::add_row(ops::matmul(x, w), b);
}

}  // namespace

EncoderLayer EncoderLayer::init(std::size_t d, std::size_t ff, Rng& rng,
                                double std) {
  EncoderLayer l;
  l.wq = normal_tensor({d, d}, rng, std);
  l.bq = zeros_param(d);
  l.wk = normal_tensor({d, d}, rng, std);
  l.bk = zeros_param(d);
  l.wv = normal_tensor({d, d}, rng, std);
  l.bv = zeros_param(d);
  l.wo = normal_tensor({d, d}, rng, std);
  l.bo = zeros_param(d);
  l.ln1_gain = ones_param(d);
  l.ln1_bias = zeros_param(d);
  l.w1 = normal_tensor({d, ff}, rng, std);
  l.b1 = zeros_param(ff);
  l.w2 = normal_tensor({ff, d}, rng, std);
  l.b2 = zeros_param(d);
  l.ln2_gain = ones_param(d);
  l.ln2_bias = zeros_param(d);
  return l;
}

std::size_t EncoderLayer::parameter_count(std::size_t d, std::size_t ff) {
  return 4 * (d * d + d) + 4 * d + (d * ff + ff) + (ff * d + d);
}

Tensor EncoderLayer::forward(const Tensor& packed,
                             std::span<const Segment> segments,
                             std::size_t heads) const {
  const std::size_t d = packed.cols();
  if (d != wq.rows()) {
    throw DimensionError("encoder layer: input width " + std::to_string(d) +
                         " does not match hidden size " +
                         std::to_string(wq.rows()));
  }
  const std::size_t dh = d / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

  const Tensor q = linear(packed, wq, bq);
  const Tensor k = linear(packed, wk, bk);
  const Tensor v = linear(packed, wv, bv);

  std::vector<Tensor> seg_out;
  seg_out.reserve(segments.size());
  for (const Segment& s : segments) {
    const std::size_t end = s.begin + s.rows;
    const Tensor qs = ops::slice_rows(q, s.begin, end);
    const Tensor ks = ops::slice_rows(k, s.begin, end);
    const Tensor vs = ops::slice_rows(v, s.begin, end);
    std::vector<Tensor> head_out;
    head_out.reserve(heads);
    for (std::size_t h = 0; h < heads; ++h) {
      const Tensor qh = ops::slice_cols(qs, h * dh, (h + 1) * dh);
      const Tensor kh = ops::slice_cols(ks, h * dh, (h + 1) * dh);
      const Tensor vh = ops::slice_cols(vs, h * dh, (h + 1) * dh);
      const Tensor att = ops::softmax_rows(
          ops::scale(ops::matmul(qh, ops::transpose(kh)), inv_sqrt));
      head_out.push_back(ops::matmul(att, vh));
    }
    seg_out.push_back(heads == 1 ? head_out.front() : ops::concat_cols(head_out));
  }
  const Tensor attended =
      seg_out.size() == 1 ? seg_out.front() : ops::concat_rows(seg_out);

  const Tensor h = ops::layer_norm(
      ops::add(packed, linear(attended, wo, bo)), ln1_gain, ln1_bias,
      kLayerNormEps);
  const Tensor f = linear(ops::relu(linear(h, w1, b1)), w2, b2);
  return ops::layer_norm(ops::add(h, f), ln2_gain, ln2_bias, kLayerNormEps);
}

void EncoderLayer::append_named(const std::string& prefix,
                                checkpoint::NamedTensors& out) const {
  const std::pair<const char*, const Tensor*> fields[] = {
      {"wq", &wq}, {"bq", &bq}, {"wk", &wk}, {"bk", &bk},
      {"wv", &wv}, {"bv", &bv}, {"wo", &wo}, {"bo", &bo},
      {"ln1_gain", &ln1_gain}, {"ln1_bias", &ln1_bias},
      {"w1", &w1}, {"b1", &b1}, {"w2", &w2}, {"b2", &b2},
      {"ln2_gain", &ln2_gain}, {"ln2_bias", &ln2_bias}};
  for (const auto& [name, t] : fields) out.emplace_back(prefix + name, *t);
}

void EncoderLayer::append_parameters(std::vector<Tensor>& out) const {
  for (const Tensor* t : {&wq, &bq, &wk, &bk, &wv, &bv, &wo, &bo, &ln1_gain,
                          &ln1_bias, &w1, &b1, &w2, &b2, &ln2_gain, &ln2_bias}) {
    out.push_back(*t);
  }
}

Tensor take_named(const checkpoint::NamedTensors& named,
                  const std::string& name, const Shape& shape) {
  for (const auto& [n, t] : named) {
    if (n != name) continue;
    if (t.shape() != shape) {
      throw FormatError("checkpoint tensor '" + name + "' has shape " +
                        shape_string(t.shape()) + ", expected " +
                        shape_string(shape));
    }
    Tensor out = t.clone();
    out.set_requires_grad(true);
    return out;
  }
  throw FormatError("checkpoint is missing tensor '" + name + "'");
}

EncoderLayer load_layer(const checkpoint::NamedTensors& named,
                        const std::string& prefix, std::size_t d,
                        std::size_t ff) {
  EncoderLayer l;
  l.wq = take_named(named, prefix + "wq", {d, d});
  l.bq = take_named(named, prefix + "bq", {d});
  l.wk = take_named(named, prefix + "wk", {d, d});
  l.bk = take_named(named, prefix + "bk", {d});
  l.wv = take_named(named, prefix + "wv", {d, d});
  l.bv = take_named(named, prefix + "bv", {d});
  l.wo = take_named(named, prefix + "wo", {d, d});
  l.bo = take_named(named, prefix + "bo", {d});
  l.ln1_gain = take_named(named, prefix + "ln1_gain", {d});
  l.ln1_bias = take_named(named, prefix + "ln1_bias", {d});
  l.w1 = take_named(named, prefix + "w1", {d, ff});
  l.b1 = take_named(named, prefix + "b1", {ff});
  l.w2 = take_named(named, prefix + "w2", {ff, d});
  l.b2 = take_named(named, prefix + "b2", {d});
  l.ln2_gain = take_named(named, prefix + "ln2_gain", {d});
  l.ln2_bias = take_named(named, prefix + "ln2_bias", {d});
  return l;
}

}  // namespace aladin::model
