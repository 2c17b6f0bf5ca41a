// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include "tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>

#include "common/error.hpp"
#include "common/log.hpp"

namespace aladin::ops {
namespace {

using NodePtr = std::shared_ptr<TensorNode>;

void require_defined(const Tensor& t, const char* op) {
  if (!t.defined()) throw InvalidArgument(std::string(op) + ": undefined tensor");
}

void require_matrix(const Tensor& t, const char* op) {
  require_defined(t, op);
  if (t.rank() > 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " +
                         shape_string(t.shape()));
  }
}

Tensor make(const char* op, Shape shape, std::vector<double> data) {
  for (double v : data) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string(op) + ": non-finite value in output");
    }
  }
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  return Tensor(std::move(node));
}

Tape* recording_tape(std::initializer_list<const Tensor*> inputs) {
  Tape* tape = Tape::active();
  if (tape == nullptr) return nullptr;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return tape;
  }
  return nullptr;
}

// C[m x n] += A[m x k] * B[k x n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[m x k] += A[m x n] * B[k x n]^T
void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += arow[j] * brow[j];
      c[i * k + p] += acc;
    }
  }
}

// C[k x n] += A[m x k]^T * B[m x n]
void gemm_tn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      double* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename Fn, typename Dfn>
Tensor unary(const char* op, const Tensor& x, Fn f, Dfn df) {
  require_defined(x, op);
  std::vector<double> out(x.numel());
  auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  Tensor y = make(op, x.shape(), std::move(out));
  if (Tape* tape = recording_tape({&x})) {
    y.set_requires_grad(true);
    tape->record({x.node()}, y.node(),
                 [xn = x.node(), yn = y.node(), df]() {
                   if (!xn->requires_grad) return;
                   for (std::size_t i = 0; i < xn->data.size(); ++i) {
                     xn->grad[i] +=
                         yn->grad[i] * df(xn->data[i], yn->data[i]);
                   }
                 });
  }
  return y;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require_defined(a, op);
  require_defined(b, op);
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions differ: " +
                         shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  gemm_nn(a.data().data(), b.data().data(), out.data(), m, k, n);
  Tensor y = make("matmul", {m, n}, std::move(out));
  if (Tape* tape = recording_tape({&a, &b})) {
    y.set_requires_grad(true);
    tape->record({a.node(), b.node()}, y.node(),
                 [an = a.node(), bn = b.node(), yn = y.node(), m, k, n]() {
                   if (an->requires_grad) {
                     gemm_nt(yn->grad.data(), bn->data.data(),
                             an->grad.data(), m, n, k);
                   }
                   if (bn->requires_grad) {
                     gemm_tn(an->data.data(), yn->grad.data(),
                             bn->grad.data(), m, k, n);
                   }
                 });
  }
  return y;
}

Tensor transpose(const Tensor& x) {
  require_matrix(x, "transpose");
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<double> out(m * n);
  auto in = x.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = in[i * n + j];
  }
  Tensor y = make("transpose", {n, m}, std::move(out));
  if (Tape* tape = recording_tape({&x})) {
    y.set_requires_grad(true);
    tape->record({x.node()}, y.node(), [xn = x.node(), yn = y.node(), m, n]() {
      if (!xn->requires_grad) return;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          xn->grad[i * n + j] += yn->grad[j * m + i];
        }
      }
    });
  }
  return y;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  Tensor y = make("add", a.shape(), std::move(out));
  if (Tape* tape = recording_tape({&a, &b})) {
    y.set_requires_grad(true);
    tape->record({a.node(), b.node()}, y.node(),
                 [an = a.node(), bn = b.node(), yn = y.node()]() {
                   for (auto* in : {an.get(), bn.get()}) {
                     if (!in->requires_grad) continue;
                     for (std::size_t i = 0; i < yn->grad.size(); ++i) {
                       in->grad[i] += yn->grad[i];
                     }
                   }
                 });
  }
  return y;
}

Tensor add_row(const Tensor& x, const Tensor& row) {
  require_matrix(x, "add_row");
  require_defined(row, "add_row");
  const std::size_t m = x.rows(), n = x.cols();
  if (row.numel() != n) {
    throw DimensionError("add_row: row " + shape_string(row.shape()) +
                         " does not fit matrix " + shape_string(x.shape()));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += row.data()[j];
  }
  Tensor y = make("add_row", x.shape(), std::move(out));
  if (Tape* tape = recording_tape({&x, &row})) {
    y.set_requires_grad(true);
    tape->record({x.node(), row.node()}, y.node(),
                 [xn = x.node(), rn = row.node(), yn = y.node(), m, n]() {
                   if (xn->requires_grad) {
                     for (std::size_t i = 0; i < m * n; ++i) {
                       xn->grad[i] += yn->grad[i];
                     }
                   }
                   if (rn->requires_grad) {
                     for (std::size_t i = 0; i < m; ++i) {
                       for (std::size_t j = 0; j < n; ++j) {
                         rn->grad[j] += yn->grad[i * n + j];
                       }
                     }
                   }
                 });
  }
  return y;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  Tensor y = make("mul", a.shape(), std::move(out));
  if (Tape* tape = recording_tape({&a, &b})) {
    y.set_requires_grad(true);
    tape->record({a.node(), b.node()}, y.node(),
                 [an = a.node(), bn = b.node(), yn = y.node()]() {
                   for (std::size_t i = 0; i < yn->grad.size(); ++i) {
                     if (an->requires_grad) an->grad[i] += yn->grad[i] * bn->data[i];
                     if (bn->requires_grad) bn->grad[i] += yn->grad[i] * an->data[i];
                   }
                 });
  }
  return y;
}

Tensor scale(const Tensor& x, double factor) {
  return unary(
      "scale", x, [factor](double v) { return v * factor; },
      [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& x, double value) {
  return unary(
      "add_scalar", x, [value](double v) { return v + value; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) { return add(a, scale(b, -1.0)); }

Tensor relu(const Tensor& x) {
  return unary(
      "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double in, double) { return in > 0.0 ? 1.0 : 0.0; });
}

Tensor exp(const Tensor& x) {
  return unary(
      "exp", x, [](double v) { return std::exp(v); },
      [](double, double out) { return out; });
}

Tensor log(const Tensor& x) {
  return unary(
      "log", x, [](double v) { return std::log(v); },
      [](double in, double) { return 1.0 / in; });
}

Tensor softmax_rows(const Tensor& x) {
  require_matrix(x, "softmax_rows");
  const std::size_t m = x.rows(), n = x.cols();
  auto in = x.data();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = in.data() + i * n;
    double* o = out.data() + i * n;
    const double mx = *std::max_element(row, row + n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      o[j] = std::exp(row[j] - mx);
      total += o[j];
    }
    for (std::size_t j = 0; j < n; ++j) o[j] /= total;
  }
  Tensor y = make("softmax_rows", x.shape(), std::move(out));
  if (Tape* tape = recording_tape({&x})) {
    y.set_requires_grad(true);
    tape->record({x.node()}, y.node(), [xn = x.node(), yn = y.node(), m, n]() {
      if (!xn->requires_grad) return;
      for (std::size_t i = 0; i < m; ++i) {
        const double* yr = yn->data.data() + i * n;
        const double* gr = yn->grad.data() + i * n;
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += gr[j] * yr[j];
        for (std::size_t j = 0; j < n; ++j) {
          xn->grad[i * n + j] += yr[j] * (gr[j] - dot);
        }
      }
    });
  }
  return y;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps) {
  require_matrix(x, "layer_norm");
  require_defined(gain, "layer_norm");
  require_defined(bias, "layer_norm");
  const std::size_t m = x.rows(), d = x.cols();
  if (d < 2) throw DimensionError("layer_norm: feature size must be >= 2");
  if (gain.numel() != d || bias.numel() != d) {
    throw DimensionError("layer_norm: gain " + shape_string(gain.shape()) +
                         " / bias " + shape_string(bias.shape()) +
                         " do not match feature size " + std::to_string(d));
  }
  auto in = x.data();
  auto g = gain.data();
  auto b = bias.data();
  std::vector<double> xhat(m * d);
  std::vector<double> rstd(m);
  std::vector<double> out(m * d);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = in.data() + i * d;
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += row[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<double>(d);
    rstd[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      xhat[i * d + j] = (row[j] - mean) * rstd[i];
      out[i * d + j] = xhat[i * d + j] * g[j] + b[j];
    }
  }
  Tensor y = make("layer_norm", x.shape(), std::move(out));
  if (Tape* tape = recording_tape({&x, &gain, &bias})) {
    y.set_requires_grad(true);
    tape->record(
        {x.node(), gain.node(), bias.node()}, y.node(),
        [xn = x.node(), gn = gain.node(), bn = bias.node(), yn = y.node(),
         xhat = std::move(xhat), rstd = std::move(rstd), m, d]() {
          const double inv_d = 1.0 / static_cast<double>(d);
          std::vector<double> dxhat(d);
          for (std::size_t i = 0; i < m; ++i) {
            const double* gy = yn->grad.data() + i * d;
            const double* xh = xhat.data() + i * d;
            if (gn->requires_grad || bn->requires_grad) {
              for (std::size_t j = 0; j < d; ++j) {
                if (gn->requires_grad) gn->grad[j] += gy[j] * xh[j];
                if (bn->requires_grad) bn->grad[j] += gy[j];
              }
            }
            if (!xn->requires_grad) continue;
            double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
              dxhat[j] = gy[j] * gn->data[j];
              mean_dxhat += dxhat[j];
              mean_dxhat_xhat += dxhat[j] * xh[j];
            }
            mean_dxhat *= inv_d;
            mean_dxhat_xhat *= inv_d;
            for (std::size_t j = 0; j < d; ++j) {
              xn->grad[i * d + j] +=
                  rstd[i] * (dxhat[j] - mean_dxhat - xh[j] * mean_dxhat_xhat);
            }
          }
        });
  }
  return y;
}

Tensor cosine_pairwise(const Tensor& a, const Tensor& b) {
  require_matrix(a, "cosine_pairwise");
  require_matrix(b, "cosine_pairwise");
  const std::size_t p = a.rows(), q = b.rows(), d = a.cols();
  if (b.cols() != d) {
    throw DimensionError("cosine_pairwise: feature sizes differ: " +
                         shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
  // Unit rows of each side plus the norms used to produce them.
  auto normalize = [d](std::span<const double> src, std::size_t rows,
                       std::vector<double>& unit, std::vector<double>& norm,
                       std::vector<bool>& floored) {
    unit.resize(rows * d);
    norm.resize(rows);
    floored.assign(rows, false);
    for (std::size_t i = 0; i < rows; ++i) {
      double ss = 0.0;
      for (std::size_t j = 0; j < d; ++j) ss += src[i * d + j] * src[i * d + j];
      double n = std::sqrt(ss);
      if (n < kNormFloor) {
        n = kNormFloor;
        floored[i] = true;
        log_warning("cosine_pairwise: zero-norm row, applying norm floor");
      }
      norm[i] = n;
      for (std::size_t j = 0; j < d; ++j) unit[i * d + j] = src[i * d + j] / n;
    }
  };
  std::vector<double> ua, na, ub, nb;
  std::vector<bool> fa, fb;
  normalize(a.data(), p, ua, na, fa);
  normalize(b.data(), q, ub, nb, fb);

  std::vector<double> out(p * q, 0.0);
  gemm_nt(ua.data(), ub.data(), out.data(), p, d, q);
  Tensor y = make("cosine_pairwise", {p, q}, std::move(out));
  if (Tape* tape = recording_tape({&a, &b})) {
    y.set_requires_grad(true);
    tape->record(
        {a.node(), b.node()}, y.node(),
        [an = a.node(), bn = b.node(), yn = y.node(), ua = std::move(ua),
         na = std::move(na), fa = std::move(fa), ub = std::move(ub),
         nb = std::move(nb), fb = std::move(fb), p, q, d]() {
          // d(unit_i)/d(x_i) = (I - u u^T) / |x_i|; constant when floored.
          auto project = [d](const std::vector<double>& unit_self,
                             const std::vector<double>& norm_self,
                             const std::vector<bool>& floored,
                             std::vector<double>& dunit, std::size_t rows,
                             std::vector<double>& grad) {
            for (std::size_t i = 0; i < rows; ++i) {
              const double* u = unit_self.data() + i * d;
              double* du = dunit.data() + i * d;
              double radial = 0.0;
              if (!floored[i]) {
                for (std::size_t j = 0; j < d; ++j) radial += du[j] * u[j];
              }
              for (std::size_t j = 0; j < d; ++j) {
                grad[i * d + j] += (du[j] - radial * u[j]) / norm_self[i];
              }
            }
          };
          if (an->requires_grad) {
            std::vector<double> dua(p * d, 0.0);
            gemm_nn(yn->grad.data(), ub.data(), dua.data(), p, q, d);
            project(ua, na, fa, dua, p, an->grad);
          }
          if (bn->requires_grad) {
            std::vector<double> dub(q * d, 0.0);
            gemm_tn(yn->grad.data(), ua.data(), dub.data(), p, q, d);
            project(ub, nb, fb, dub, q, bn->grad);
          }
        });
  }
  return y;
}

MaxResult row_max(const Tensor& x) {
  require_matrix(x, "row_max");
  const std::size_t m = x.rows(), n = x.cols();
  if (n == 0) throw DimensionError("row_max: empty rows");
  auto in = x.data();
  std::vector<double> out(m);
  std::vector<std::size_t> arg(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < n; ++j) {
      if (in[i * n + j] > in[i * n + best]) best = j;
    }
    arg[i] = best;
    out[i] = in[i * n + best];
  }
  Tensor y = make("row_max", {m, 1}, std::move(out));
  if (Tape* tape = recording_tape({&x})) {
    y.set_requires_grad(true);
    tape->record({x.node()}, y.node(),
                 [xn = x.node(), yn = y.node(), arg, n]() {
                   if (!xn->requires_grad) return;
                   for (std::size_t i = 0; i < arg.size(); ++i) {
                     xn->grad[i * n + arg[i]] += yn->grad[i];
                   }
                 });
  }
  return {std::move(y), std::move(arg)};
}

MaxResult col_max(const Tensor& x) {
  require_matrix(x, "col_max");
  const std::size_t m = x.rows(), n = x.cols();
  if (m == 0) throw DimensionError("col_max: empty columns");
  auto in = x.data();
  std::vector<double> out(in.begin(), in.begin() + n);
  std::vector<std::size_t> arg(n, 0);
  for (std::size_t i = 1; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (in[i * n + j] > out[j]) {
        out[j] = in[i * n + j];
        arg[j] = i;
      }
    }
  }
  Tensor y = make("col_max", {1, n}, std::move(out));
  if (Tape* tape = recording_tape({&x})) {
    y.set_requires_grad(true);
    tape->record({x.node()}, y.node(),
                 [xn = x.node(), yn = y.node(), arg, n]() {
                   if (!xn->requires_grad) return;
                   for (std::size_t j = 0; j < n; ++j) {
                     xn->grad[arg[j] * n + j] += yn->grad[j];
                   }
                 });
  }
  return {std::move(y), std::move(arg)};
}

Tensor row_sum(const Tensor& x) {
  require_matrix(x, "row_sum");
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i] += x.data()[i * n + j];
  }
  Tensor y = make("row_sum", {m, 1}, std::move(out));
  if (Tape* tape = recording_tape({&x})) {
    y.set_requires_grad(true);
    tape->record({x.node()}, y.node(), [xn = x.node(), yn = y.node(), m, n]() {
      if (!xn->requires_grad) return;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) xn->grad[i * n + j] += yn->grad[i];
      }
    });
  }
  return y;
}

Tensor col_sum(const Tensor& x) {
  require_matrix(x, "col_sum");
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j] += x.data()[i * n + j];
  }
  Tensor y = make("col_sum", {1, n}, std::move(out));
  if (Tape* tape = recording_tape({&x})) {
    y.set_requires_grad(true);
    tape->record({x.node()}, y.node(), [xn = x.node(), yn = y.node(), m, n]() {
      if (!xn->requires_grad) return;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) xn->grad[i * n + j] += yn->grad[j];
      }
    });
  }
  return y;
}

Tensor sum(const Tensor& x) {
  require_defined(x, "sum");
  double total = 0.0;
  for (double v : x.data()) total += v;
  Tensor y = make("sum", {}, {total});
  if (Tape* tape = recording_tape({&x})) {
    y.set_requires_grad(true);
    tape->record({x.node()}, y.node(), [xn = x.node(), yn = y.node()]() {
      if (!xn->requires_grad) return;
      for (double& g : xn->grad) g += yn->grad[0];
    });
  }
  return y;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw InvalidArgument("concat_rows: no inputs");
  const std::size_t n = parts.front().cols();
  std::size_t m = 0;
  bool any_grad = false;
  for (const auto& t : parts) {
    require_matrix(t, "concat_rows");
    if (t.cols() != n) {
      throw DimensionError("concat_rows: column count mismatch " +
                           shape_string(parts.front().shape()) + " vs " +
                           shape_string(t.shape()));
    }
    m += t.rows();
    any_grad = any_grad || t.requires_grad();
  }
  std::vector<double> out;
  out.reserve(m * n);
  for (const auto& t : parts) out.insert(out.end(), t.data().begin(), t.data().end());
  Tensor y = make("concat_rows", {m, n}, std::move(out));
  Tape* tape = Tape::active();
  if (tape != nullptr && any_grad) {
    y.set_requires_grad(true);
    std::vector<NodePtr> inputs;
    inputs.reserve(parts.size());
    for (const auto& t : parts) inputs.push_back(t.node());
    tape->record(inputs, y.node(), [inputs, yn = y.node()]() {
      std::size_t offset = 0;
      for (const auto& in : inputs) {
        const std::size_t len = in->data.size();
        if (in->requires_grad) {
          for (std::size_t i = 0; i < len; ++i) in->grad[i] += yn->grad[offset + i];
        }
        offset += len;
      }
    });
  }
  return y;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw InvalidArgument("concat_cols: no inputs");
  const std::size_t m = parts.front().rows();
  std::size_t n = 0;
  bool any_grad = false;
  for (const auto& t : parts) {
    require_matrix(t, "concat_cols");
    if (t.rows() != m) {
      throw DimensionError("concat_cols: row count mismatch " +
                           shape_string(parts.front().shape()) + " vs " +
                           shape_string(t.shape()));
    }
    n += t.cols();
    any_grad = any_grad || t.requires_grad();
  }
  std::vector<double> out(m * n);
  std::size_t col = 0;
  for (const auto& t : parts) {
    const std::size_t w = t.cols();
    for (std::size_t i = 0; i < m; ++i) {
      std::copy_n(t.data().data() + i * w, w, out.data() + i * n + col);
    }
    col += w;
  }
  Tensor y = make("concat_cols", {m, n}, std::move(out));
  Tape* tape = Tape::active();
  if (tape != nullptr && any_grad) {
    y.set_requires_grad(true);
    std::vector<NodePtr> inputs;
    std::vector<std::size_t> widths;
    for (const auto& t : parts) {
      inputs.push_back(t.node());
      widths.push_back(t.cols());
    }
    tape->record(inputs, y.node(), [inputs, widths, yn = y.node(), m, n]() {
      std::size_t c0 = 0;
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        const std::size_t w = widths[k];
        if (inputs[k]->requires_grad) {
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < w; ++j) {
              inputs[k]->grad[i * w + j] += yn->grad[i * n + c0 + j];
            }
          }
        }
        c0 += w;
      }
    });
  }
  return y;
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end) {
  require_matrix(x, "slice_rows");
  const std::size_t n = x.cols();
  if (begin >= end || end > x.rows()) {
    throw DimensionError("slice_rows: range [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") invalid for " +
                         shape_string(x.shape()));
  }
  std::vector<double> out(x.data().begin() + begin * n, x.data().begin() + end * n);
  Tensor y = make("slice_rows", {end - begin, n}, std::move(out));
  if (Tape* tape = recording_tape({&x})) {
    y.set_requires_grad(true);
    tape->record({x.node()}, y.node(),
                 [xn = x.node(), yn = y.node(), offset = begin * n]() {
                   if (!xn->requires_grad) return;
                   for (std::size_t i = 0; i < yn->grad.size(); ++i) {
                     xn->grad[offset + i] += yn->grad[i];
                   }
                 });
  }
  return y;
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end) {
  require_matrix(x, "slice_cols");
  const std::size_t m = x.rows(), n = x.cols();
  if (begin >= end || end > n) {
    throw DimensionError("slice_cols: range [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") invalid for " +
                         shape_string(x.shape()));
  }
  const std::size_t w = end - begin;
  std::vector<double> out(m * w);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(x.data().data() + i * n + begin, w, out.data() + i * w);
  }
  Tensor y = make("slice_cols", {m, w}, std::move(out));
  if (Tape* tape = recording_tape({&x})) {
    y.set_requires_grad(true);
    tape->record({x.node()}, y.node(),
                 [xn = x.node(), yn = y.node(), m, n, w, begin]() {
                   if (!xn->requires_grad) return;
                   for (std::size_t i = 0; i < m; ++i) {
                     for (std::size_t j = 0; j < w; ++j) {
                       xn->grad[i * n + begin + j] += yn->grad[i * w + j];
                     }
                   }
                 });
  }
  return y;
}

Tensor detach(const Tensor& x) {
  require_defined(x, "detach");
  auto node = std::make_shared<TensorNode>();
  node->shape = x.shape();
  node->data.assign(x.data().begin(), x.data().end());
  return Tensor(std::move(node));
}

}  // namespace aladin::ops
