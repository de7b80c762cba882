// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include "react/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "react/errors.hpp"

namespace react {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Broadcast bookkeeping: for every output element, the flat source index in a and b.
struct Broadcast {
  Shape out;
  bool same = false;
  std::vector<std::size_t> ia, ib;
};

Broadcast broadcast(const Shape& a, const Shape& b) {
  Broadcast bc;
  if (a == b) {
    bc.out = a;
    bc.same = true;
    return bc;
  }
  const std::size_t rank = std::max(a.size(), b.size());
  Shape pa(rank, 1), pb(rank, 1);
  std::copy(a.begin(), a.end(), pa.begin() + (rank - a.size()));
  std::copy(b.begin(), b.end(), pb.begin() + (rank - b.size()));
  bc.out.resize(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    if (pa[i] != pb[i] && pa[i] != 1 && pb[i] != 1)
      throw DimensionError("cannot broadcast " + shape_str(a) + " with " + shape_str(b));
    bc.out[i] = std::max(pa[i], pb[i]);
  }
  std::vector<std::size_t> sa(rank), sb(rank);
  std::size_t ra = 1, rb = 1;
  for (std::size_t i = rank; i-- > 0;) {
    sa[i] = pa[i] == 1 ? 0 : ra;
    sb[i] = pb[i] == 1 ? 0 : rb;
    ra *= pa[i];
    rb *= pb[i];
  }
  const std::size_t n = shape_numel(bc.out);
  bc.ia.resize(n);
  bc.ib.resize(n);
  std::vector<std::size_t> idx(rank, 0);
  std::size_t oa = 0, ob = 0;
  for (std::size_t flat = 0; flat < n; ++flat) {
    bc.ia[flat] = oa;
    bc.ib[flat] = ob;
    for (std::size_t ax = rank; ax-- > 0;) {
      ++idx[ax];
      oa += sa[ax];
      ob += sb[ax];
      if (idx[ax] < bc.out[ax]) break;
      oa -= sa[ax] * idx[ax];
      ob -= sb[ax] * idx[ax];
      idx[ax] = 0;
    }
  }
  return bc;
}

// Generic binary op: f(a, b) and partials (da, db) evaluated pointwise.
template <typename F, typename Dfa, typename Dfb>
Tensor binary(const Tensor& a, const Tensor& b, F f, Dfa dfa, Dfb dfb) {
  auto bc = std::make_shared<Broadcast>(broadcast(a.shape(), b.shape()));
  const auto av = a.data();
  const auto bv = b.data();
  const std::size_t n = shape_numel(bc->out);
  std::vector<double> out(n);
  if (bc->same) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(av[i], bv[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(av[bc->ia[i]], bv[bc->ib[i]]);
  }
  return make_op_result(bc->out, std::move(out), {a, b},
                        [a, b, bc, dfa, dfb](std::span<const double> g, std::span<std::span<double>> gin) {
                          const auto av = a.data();
                          const auto bv = b.data();
                          const std::size_t n = g.size();
                          for (std::size_t i = 0; i < n; ++i) {
                            const std::size_t ja = bc->same ? i : bc->ia[i];
                            const std::size_t jb = bc->same ? i : bc->ib[i];
                            if (!gin[0].empty()) gin[0][ja] += g[i] * dfa(av[ja], bv[jb]);
                            if (!gin[1].empty()) gin[1][jb] += g[i] * dfb(av[ja], bv[jb]);
                          }
                        });
}

// Generic unary op; the derivative sees both input and output values.
template <typename F, typename Df>
Tensor unary(const Tensor& x, F f, Df df) {
  const auto xv = x.data();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  auto y = std::make_shared<std::vector<double>>(out);
  return make_op_result(x.shape(), std::move(out), {x},
                        [x, y, df](std::span<const double> g, std::span<std::span<double>> gin) {
                          const auto xv = x.data();
                          for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += g[i] * df(xv[i], (*y)[i]);
                        });
}

// outer x axis x inner decomposition of a shape around one axis.
struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_axis(const Shape& s, std::size_t axis) {
  if (axis >= s.size()) throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_str(s));
  AxisSplit r;
  for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
  r.extent = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
  return r;
}

struct AttnDims {
  std::size_t batch, lq, lk, d, heads, dh;
};

AttnDims attention_dims(const Tensor& q, const Tensor& k, const Tensor* v, std::size_t heads) {
  auto dims3 = [](const Tensor& t) -> std::array<std::size_t, 3> {
    if (t.rank() == 2) return {1, t.dim(0), t.dim(1)};
    if (t.rank() == 3) return {t.dim(0), t.dim(1), t.dim(2)};
    throw DimensionError("attention expects rank 2 or 3 inputs, got " + shape_str(t.shape()));
  };
  auto qd = dims3(q), kd = dims3(k);
  if (qd[0] != kd[0] || qd[2] != kd[2])
    throw DimensionError("attention query " + shape_str(q.shape()) + " incompatible with key " + shape_str(k.shape()));
  if (v && v->shape() != k.shape())
    throw DimensionError("attention value " + shape_str(v->shape()) + " must match key " + shape_str(k.shape()));
  if (heads == 0 || qd[2] % heads != 0)
    throw DimensionError("width " + std::to_string(qd[2]) + " not divisible by " + std::to_string(heads) + " heads");
  return {qd[0], qd[1], kd[1], qd[2], heads, qd[2] / heads};
}

void check_mask(const AttentionMask* mask, const AttnDims& dm) {
  if (!mask) return;
  if (mask->rows != dm.lq || mask->cols != dm.lk || mask->allowed.size() != dm.lq * dm.lk)
    throw DimensionError("attention mask must be [" + std::to_string(dm.lq) + "x" + std::to_string(dm.lk) + "]");
  for (std::size_t i = 0; i < dm.lq; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < dm.lk; ++j) any = any || mask->allowed[i * dm.lk + j];
    if (!any) throw ContractError("attention mask row " + std::to_string(i) + " admits no key");
  }
}

// Probabilities laid out [B][H][Lq][Lk].
std::vector<double> attention_probs(std::span<const double> qv, std::span<const double> kv, const AttnDims& dm,
                                    const AttentionMask* mask) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(dm.dh));
  std::vector<double> p(dm.batch * dm.heads * dm.lq * dm.lk);
  std::vector<double> row(dm.lk);
  for (std::size_t b = 0; b < dm.batch; ++b) {
    for (std::size_t h = 0; h < dm.heads; ++h) {
      for (std::size_t i = 0; i < dm.lq; ++i) {
        const double* qi = qv.data() + (b * dm.lq + i) * dm.d + h * dm.dh;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < dm.lk; ++j) {
          if (mask && !mask->allowed[i * dm.lk + j]) {
            row[j] = -std::numeric_limits<double>::infinity();
            continue;
          }
          const double* kj = kv.data() + (b * dm.lk + j) * dm.d + h * dm.dh;
          double s = 0.0;
          for (std::size_t c = 0; c < dm.dh; ++c) s += qi[c] * kj[c];
          row[j] = s * scale;
          mx = std::max(mx, row[j]);
        }
        double z = 0.0;
        for (std::size_t j = 0; j < dm.lk; ++j) {
          row[j] = std::isinf(row[j]) ? 0.0 : std::exp(row[j] - mx);
          z += row[j];
        }
        double* out = p.data() + ((b * dm.heads + h) * dm.lq + i) * dm.lk;
        for (std::size_t j = 0; j < dm.lk; ++j) out[j] = row[j] / z;
      }
    }
  }
  return p;
}

}  // namespace

// ---- linear algebra -------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() < 2 || b.rank() != 2 || a.shape().back() != b.dim(0))
    throw DimensionError("matmul shape mismatch: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  const std::size_t k = b.dim(0), n = b.dim(1), m = a.numel() / k;
  Shape out_shape = a.shape();
  out_shape.back() = n;
  std::vector<double> out(m * n);
  MatMap(out.data(), m, n).noalias() = ConstMatMap(a.data().data(), m, k) * ConstMatMap(b.data().data(), k, n);
  return make_op_result(std::move(out_shape), std::move(out), {a, b},
                        [a, b, m, k, n](std::span<const double> g, std::span<std::span<double>> gin) {
                          ConstMatMap G(g.data(), m, n);
                          if (!gin[0].empty())
                            MatMap(gin[0].data(), m, k).noalias() += G * ConstMatMap(b.data().data(), k, n).transpose();
                          if (!gin[1].empty())
                            MatMap(gin[1].data(), k, n).noalias() += ConstMatMap(a.data().data(), m, k).transpose() * G;
                        });
}

// ---- elementwise ----------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, [](double x, double y) { return x / y; }, [](double, double y) { return 1.0 / y; },
      [](double x, double y) { return -x / (y * y); });
}

// Ties route the gradient to the first operand.
Tensor minimum(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, [](double x, double y) { return std::min(x, y); }, [](double x, double y) { return x <= y ? 1.0 : 0.0; },
      [](double x, double y) { return x <= y ? 0.0 : 1.0; });
}

Tensor maximum(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, [](double x, double y) { return std::max(x, y); }, [](double x, double y) { return x >= y ? 1.0 : 0.0; },
      [](double x, double y) { return x >= y ? 0.0 : 1.0; });
}

Tensor affine(const Tensor& x, double scale, double shift) {
  return unary(
      x, [=](double v) { return scale * v + shift; }, [=](double, double) { return scale; });
}

Tensor neg(const Tensor& x) { return affine(x, -1.0, 0.0); }

Tensor relu(const Tensor& x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor gelu(const Tensor& x) {
  return unary(
      x, [](double v) { return 0.5 * v * (1.0 + std::erf(v * kInvSqrt2)); },
      [](double v, double) {
        return 0.5 * (1.0 + std::erf(v * kInvSqrt2)) + v * kInvSqrt2Pi * std::exp(-0.5 * v * v);
      });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& x) {
  return unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sin(const Tensor& x) {
  return unary(
      x, [](double v) { return std::sin(v); }, [](double v, double) { return std::cos(v); });
}

Tensor cos(const Tensor& x) {
  return unary(
      x, [](double v) { return std::cos(v); }, [](double v, double) { return -std::sin(v); });
}

Tensor exp(const Tensor& x) {
  return unary(
      x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  for (double v : x.data())
    if (!(v > 0.0)) throw ContractError("log of non-positive value");
  return unary(
      x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor abs(const Tensor& x) {
  return unary(
      x, [](double v) { return std::fabs(v); },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Tensor clamp(const Tensor& x, double lo, double hi) {
  if (!(lo <= hi)) throw ContractError("clamp bounds out of order");
  return unary(
      x, [=](double v) { return std::clamp(v, lo, hi); },
      [=](double v, double) { return (v > lo && v < hi) ? 1.0 : 0.0; });
}

Tensor inverse_sigmoid(const Tensor& x, double eps) {
  return unary(
      x,
      [=](double v) {
        const double c = std::clamp(v, eps, 1.0 - eps);
        return std::log(c / (1.0 - c));
      },
      [=](double v, double) { return (v > eps && v < 1.0 - eps) ? 1.0 / (v * (1.0 - v)) : 0.0; });
}

// ---- reductions -----------------------------------------------------------

Tensor sum(const Tensor& x) {
  const auto xv = x.data();
  const double s = std::accumulate(xv.begin(), xv.end(), 0.0);
  return make_op_result({1}, {s}, {x}, [](std::span<const double> g, std::span<std::span<double>> gin) {
    for (double& v : gin[0]) v += g[0];
  });
}

Tensor mean(const Tensor& x) { return affine(sum(x), 1.0 / static_cast<double>(x.numel()), 0.0); }

Tensor sum_axis(const Tensor& x, std::size_t axis) {
  const AxisSplit sp = split_axis(x.shape(), axis);
  Shape out_shape = x.shape();
  out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
  if (out_shape.empty()) out_shape = {1};
  const auto xv = x.data();
  std::vector<double> out(sp.outer * sp.inner, 0.0);
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t e = 0; e < sp.extent; ++e) {
      const double* src = xv.data() + (o * sp.extent + e) * sp.inner;
      double* dst = out.data() + o * sp.inner;
      for (std::size_t i = 0; i < sp.inner; ++i) dst[i] += src[i];
    }
  return make_op_result(std::move(out_shape), std::move(out), {x},
                        [sp](std::span<const double> g, std::span<std::span<double>> gin) {
                          for (std::size_t o = 0; o < sp.outer; ++o)
                            for (std::size_t e = 0; e < sp.extent; ++e) {
                              double* dst = gin[0].data() + (o * sp.extent + e) * sp.inner;
                              const double* src = g.data() + o * sp.inner;
                              for (std::size_t i = 0; i < sp.inner; ++i) dst[i] += src[i];
                            }
                        });
}

Tensor mean_axis(const Tensor& x, std::size_t axis) {
  return affine(sum_axis(x, axis), 1.0 / static_cast<double>(x.dim(axis)), 0.0);
}

// ---- normalizers ------------------------------------------------------------

Tensor softmax(const Tensor& x, std::size_t axis) {
  const AxisSplit sp = split_axis(x.shape(), axis);
  const auto xv = x.data();
  std::vector<double> out(xv.size());
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t i = 0; i < sp.inner; ++i) {
      const std::size_t base = o * sp.extent * sp.inner + i;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t e = 0; e < sp.extent; ++e) mx = std::max(mx, xv[base + e * sp.inner]);
      double z = 0.0;
      for (std::size_t e = 0; e < sp.extent; ++e) {
        const double v = std::exp(xv[base + e * sp.inner] - mx);
        out[base + e * sp.inner] = v;
        z += v;
      }
      for (std::size_t e = 0; e < sp.extent; ++e) out[base + e * sp.inner] /= z;
    }
  auto y = std::make_shared<std::vector<double>>(out);
  return make_op_result(x.shape(), std::move(out), {x},
                        [sp, y](std::span<const double> g, std::span<std::span<double>> gin) {
                          for (std::size_t o = 0; o < sp.outer; ++o)
                            for (std::size_t i = 0; i < sp.inner; ++i) {
                              const std::size_t base = o * sp.extent * sp.inner + i;
                              double dot = 0.0;
                              for (std::size_t e = 0; e < sp.extent; ++e)
                                dot += g[base + e * sp.inner] * (*y)[base + e * sp.inner];
                              for (std::size_t e = 0; e < sp.extent; ++e) {
                                const std::size_t j = base + e * sp.inner;
                                gin[0][j] += (*y)[j] * (g[j] - dot);
                              }
                            }
                        });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  const std::size_t d = x.shape().back();
  if (gamma.numel() != d || beta.numel() != d)
    throw DimensionError("layer_norm affine params must have width " + std::to_string(d));
  const std::size_t rows = x.numel() / d;
  const auto xv = x.data();
  const auto gv = gamma.data();
  const auto bv = beta.data();
  auto xhat = std::make_shared<std::vector<double>>(xv.size());
  auto rstd = std::make_shared<std::vector<double>>(rows);
  std::vector<double> out(xv.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = xv.data() + r * d;
    double mu = 0.0;
    for (std::size_t c = 0; c < d; ++c) mu += xr[c];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) var += (xr[c] - mu) * (xr[c] - mu);
    var /= static_cast<double>(d);
    const double rs = 1.0 / std::sqrt(var + eps);
    (*rstd)[r] = rs;
    for (std::size_t c = 0; c < d; ++c) {
      const double h = (xr[c] - mu) * rs;
      (*xhat)[r * d + c] = h;
      out[r * d + c] = h * gv[c] + bv[c];
    }
  }
  return make_op_result(x.shape(), std::move(out), {x, gamma, beta},
                        [gamma, xhat, rstd, d, rows](std::span<const double> g, std::span<std::span<double>> gin) {
                          const auto gv = gamma.data();
                          std::vector<double> dxhat(d);
                          for (std::size_t r = 0; r < rows; ++r) {
                            const double* gr = g.data() + r * d;
                            const double* hr = xhat->data() + r * d;
                            if (!gin[1].empty())
                              for (std::size_t c = 0; c < d; ++c) gin[1][c] += gr[c] * hr[c];
                            if (!gin[2].empty())
                              for (std::size_t c = 0; c < d; ++c) gin[2][c] += gr[c];
                            if (gin[0].empty()) continue;
                            double m1 = 0.0, m2 = 0.0;
                            for (std::size_t c = 0; c < d; ++c) {
                              dxhat[c] = gr[c] * gv[c];
                              m1 += dxhat[c];
                              m2 += dxhat[c] * hr[c];
                            }
                            m1 /= static_cast<double>(d);
                            m2 /= static_cast<double>(d);
                            for (std::size_t c = 0; c < d; ++c)
                              gin[0][r * d + c] += (*rstd)[r] * (dxhat[c] - m1 - hr[c] * m2);
                          }
                        });
}

// ---- shape ------------------------------------------------------------------

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel())
    throw DimensionError("cannot reshape " + shape_str(x.shape()) + " to " + shape_str(shape));
  return make_op_result(std::move(shape), x.to_vector(), {x},
                        [](std::span<const double> g, std::span<std::span<double>> gin) {
                          for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += g[i];
                        });
}

Tensor permute(const Tensor& x, const std::vector<std::size_t>& axes) {
  const Shape& in = x.shape();
  const std::size_t rank = in.size();
  if (axes.size() != rank) throw DimensionError("permute needs one axis per dimension of " + shape_str(in));
  std::vector<bool> seen(rank, false);
  for (std::size_t a : axes) {
    if (a >= rank || seen[a]) throw DimensionError("permute axes are not a permutation");
    seen[a] = true;
  }
  std::vector<std::size_t> in_stride(rank);
  std::size_t s = 1;
  for (std::size_t i = rank; i-- > 0;) {
    in_stride[i] = s;
    s *= in[i];
  }
  Shape out_shape(rank);
  for (std::size_t i = 0; i < rank; ++i) out_shape[i] = in[axes[i]];
  const std::size_t n = x.numel();
  auto src = std::make_shared<std::vector<std::size_t>>(n);
  std::vector<std::size_t> idx(rank, 0);
  std::size_t off = 0;
  for (std::size_t flat = 0; flat < n; ++flat) {
    (*src)[flat] = off;
    for (std::size_t ax = rank; ax-- > 0;) {
      ++idx[ax];
      off += in_stride[axes[ax]];
      if (idx[ax] < out_shape[ax]) break;
      off -= in_stride[axes[ax]] * idx[ax];
      idx[ax] = 0;
    }
  }
  const auto xv = x.data();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = xv[(*src)[i]];
  return make_op_result(std::move(out_shape), std::move(out), {x},
                        [src](std::span<const double> g, std::span<std::span<double>> gin) {
                          for (std::size_t i = 0; i < g.size(); ++i) gin[0][(*src)[i]] += g[i];
                        });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end) {
  const AxisSplit sp = split_axis(x.shape(), axis);
  if (begin >= end || end > sp.extent)
    throw DimensionError("slice [" + std::to_string(begin) + "," + std::to_string(end) + ") out of range for axis " +
                         std::to_string(axis) + " of " + shape_str(x.shape()));
  Shape out_shape = x.shape();
  out_shape[axis] = end - begin;
  const std::size_t len = end - begin;
  const auto xv = x.data();
  std::vector<double> out(sp.outer * len * sp.inner);
  for (std::size_t o = 0; o < sp.outer; ++o)
    std::copy_n(xv.data() + (o * sp.extent + begin) * sp.inner, len * sp.inner, out.data() + o * len * sp.inner);
  return make_op_result(std::move(out_shape), std::move(out), {x},
                        [sp, begin, len](std::span<const double> g, std::span<std::span<double>> gin) {
                          for (std::size_t o = 0; o < sp.outer; ++o) {
                            double* dst = gin[0].data() + (o * sp.extent + begin) * sp.inner;
                            const double* src = g.data() + o * len * sp.inner;
                            for (std::size_t i = 0; i < len * sp.inner; ++i) dst[i] += src[i];
                          }
                        });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw ContractError("concat of zero tensors");
  const Shape& ref = parts.front().shape();
  std::size_t total = 0;
  std::vector<std::size_t> extents;
  for (const Tensor& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == ref.size() && axis < s.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = i == axis || s[i] == ref[i];
    if (!ok) throw DimensionError("concat along axis " + std::to_string(axis) + ": " + shape_str(ref) + " vs " + shape_str(s));
    extents.push_back(s[axis]);
    total += s[axis];
  }
  Shape out_shape = ref;
  out_shape[axis] = total;
  const AxisSplit sp = split_axis(out_shape, axis);
  std::vector<double> out(shape_numel(out_shape));
  std::size_t offset = 0;
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    const auto pv = parts[pi].data();
    const std::size_t chunk = extents[pi] * sp.inner;
    for (std::size_t o = 0; o < sp.outer; ++o)
      std::copy_n(pv.data() + o * chunk, chunk, out.data() + (o * total + offset) * sp.inner);
    offset += extents[pi];
  }
  return make_op_result(std::move(out_shape), std::move(out), parts,
                        [sp, extents, total](std::span<const double> g, std::span<std::span<double>> gin) {
                          std::size_t offset = 0;
                          for (std::size_t pi = 0; pi < extents.size(); ++pi) {
                            const std::size_t chunk = extents[pi] * sp.inner;
                            if (!gin[pi].empty())
                              for (std::size_t o = 0; o < sp.outer; ++o) {
                                const double* src = g.data() + (o * total + offset) * sp.inner;
                                double* dst = gin[pi].data() + o * chunk;
                                for (std::size_t i = 0; i < chunk; ++i) dst[i] += src[i];
                              }
                            offset += extents[pi];
                          }
                        });
}

Tensor index_select(const Tensor& x, const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw ContractError("index_select with no indices");
  const std::size_t rows = x.dim(0);
  const std::size_t width = x.numel() / rows;
  for (std::size_t i : indices)
    if (i >= rows) throw DataError("index " + std::to_string(i) + " out of range for " + shape_str(x.shape()));
  Shape out_shape = x.shape();
  out_shape[0] = indices.size();
  const auto xv = x.data();
  std::vector<double> out(indices.size() * width);
  for (std::size_t r = 0; r < indices.size(); ++r)
    std::copy_n(xv.data() + indices[r] * width, width, out.data() + r * width);
  return make_op_result(std::move(out_shape), std::move(out), {x},
                        [indices, width](std::span<const double> g, std::span<std::span<double>> gin) {
                          for (std::size_t r = 0; r < indices.size(); ++r)
                            for (std::size_t c = 0; c < width; ++c) gin[0][indices[r] * width + c] += g[r * width + c];
                        });
}

Tensor tile_leading(const Tensor& x, std::size_t count) {
  if (count == 0) throw ContractError("tile_leading count must be positive");
  Shape out_shape = x.shape();
  out_shape.insert(out_shape.begin(), count);
  const auto xv = x.data();
  const std::size_t n = xv.size();
  std::vector<double> out(count * n);
  for (std::size_t c = 0; c < count; ++c) std::copy(xv.begin(), xv.end(), out.begin() + static_cast<std::ptrdiff_t>(c * n));
  return make_op_result(std::move(out_shape), std::move(out), {x},
                        [count, n](std::span<const double> g, std::span<std::span<double>> gin) {
                          for (std::size_t c = 0; c < count; ++c)
                            for (std::size_t i = 0; i < n; ++i) gin[0][i] += g[c * n + i];
                        });
}

// ---- neural primitives ------------------------------------------------------

Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t heads,
                            const AttentionMask* mask) {
  const AttnDims dm = attention_dims(q, k, &v, heads);
  check_mask(mask, dm);
  auto probs = std::make_shared<std::vector<double>>(attention_probs(q.data(), k.data(), dm, mask));
  const auto vv = v.data();
  std::vector<double> out(dm.batch * dm.lq * dm.d, 0.0);
  for (std::size_t b = 0; b < dm.batch; ++b)
    for (std::size_t h = 0; h < dm.heads; ++h)
      for (std::size_t i = 0; i < dm.lq; ++i) {
        const double* p = probs->data() + ((b * dm.heads + h) * dm.lq + i) * dm.lk;
        double* o = out.data() + (b * dm.lq + i) * dm.d + h * dm.dh;
        for (std::size_t j = 0; j < dm.lk; ++j) {
          if (p[j] == 0.0) continue;
          const double* vj = vv.data() + (b * dm.lk + j) * dm.d + h * dm.dh;
          for (std::size_t c = 0; c < dm.dh; ++c) o[c] += p[j] * vj[c];
        }
      }
  Shape out_shape = q.shape();
  return make_op_result(
      std::move(out_shape), std::move(out), {q, k, v},
      [q, k, v, dm, probs](std::span<const double> g, std::span<std::span<double>> gin) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(dm.dh));
        const auto qv = q.data();
        const auto kv = k.data();
        const auto vv = v.data();
        std::vector<double> dp(dm.lk);
        for (std::size_t b = 0; b < dm.batch; ++b)
          for (std::size_t h = 0; h < dm.heads; ++h)
            for (std::size_t i = 0; i < dm.lq; ++i) {
              const double* p = probs->data() + ((b * dm.heads + h) * dm.lq + i) * dm.lk;
              const double* go = g.data() + (b * dm.lq + i) * dm.d + h * dm.dh;
              double dot = 0.0;
              for (std::size_t j = 0; j < dm.lk; ++j) {
                const std::size_t vo = (b * dm.lk + j) * dm.d + h * dm.dh;
                double s = 0.0;
                for (std::size_t c = 0; c < dm.dh; ++c) s += go[c] * vv[vo + c];
                dp[j] = s;
                dot += s * p[j];
                if (!gin[2].empty())
                  for (std::size_t c = 0; c < dm.dh; ++c) gin[2][vo + c] += p[j] * go[c];
              }
              const std::size_t qo = (b * dm.lq + i) * dm.d + h * dm.dh;
              for (std::size_t j = 0; j < dm.lk; ++j) {
                const double ds = p[j] * (dp[j] - dot) * scale;
                if (ds == 0.0) continue;
                const std::size_t ko = (b * dm.lk + j) * dm.d + h * dm.dh;
                if (!gin[0].empty())
                  for (std::size_t c = 0; c < dm.dh; ++c) gin[0][qo + c] += ds * kv[ko + c];
                if (!gin[1].empty())
                  for (std::size_t c = 0; c < dm.dh; ++c) gin[1][ko + c] += ds * qv[qo + c];
              }
            }
      });
}

std::vector<double> attention_probabilities(const Tensor& q, const Tensor& k, std::size_t heads,
                                            const AttentionMask* mask) {
  const AttnDims dm = attention_dims(q, k, nullptr, heads);
  check_mask(mask, dm);
  return attention_probs(q.data(), k.data(), dm, mask);
}

Tensor conv1d(const Tensor& x, const Tensor& kernel, const Tensor& bias) {
  if (kernel.rank() != 3) throw DimensionError("conv1d kernel must be [k x c_in x c_out], got " + shape_str(kernel.shape()));
  const std::size_t ks = kernel.dim(0), cin = kernel.dim(1), cout = kernel.dim(2);
  if (ks % 2 == 0) throw ConfigError("conv1d kernel size must be odd, got " + std::to_string(ks));
  if (x.rank() != 2 || x.dim(1) != cin)
    throw DimensionError("conv1d input " + shape_str(x.shape()) + " does not match kernel " + shape_str(kernel.shape()));
  if (bias.defined() && bias.numel() != cout) throw DimensionError("conv1d bias must have " + std::to_string(cout) + " entries");
  const std::size_t len = x.dim(0);
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(ks / 2);
  const auto xv = x.data();
  const auto wv = kernel.data();
  std::vector<double> out(len * cout, 0.0);
  for (std::size_t l = 0; l < len; ++l) {
    double* o = out.data() + l * cout;
    if (bias.defined())
      for (std::size_t c = 0; c < cout; ++c) o[c] = bias[c];
    for (std::size_t j = 0; j < ks; ++j) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(l) + static_cast<std::ptrdiff_t>(j) - half;
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(len)) continue;
      const double* xr = xv.data() + static_cast<std::size_t>(src) * cin;
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const double* w = wv.data() + (j * cin + ci) * cout;
        for (std::size_t c = 0; c < cout; ++c) o[c] += xr[ci] * w[c];
      }
    }
  }
  std::vector<Tensor> inputs{x, kernel};
  if (bias.defined()) inputs.push_back(bias);
  return make_op_result({len, cout}, std::move(out), std::move(inputs),
                        [x, kernel, len, ks, cin, cout, half](std::span<const double> g, std::span<std::span<double>> gin) {
                          const auto xv = x.data();
                          const auto wv = kernel.data();
                          for (std::size_t l = 0; l < len; ++l) {
                            const double* go = g.data() + l * cout;
                            if (gin.size() > 2 && !gin[2].empty())
                              for (std::size_t c = 0; c < cout; ++c) gin[2][c] += go[c];
                            for (std::size_t j = 0; j < ks; ++j) {
                              const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(l) + static_cast<std::ptrdiff_t>(j) - half;
                              if (src < 0 || src >= static_cast<std::ptrdiff_t>(len)) continue;
                              const std::size_t s = static_cast<std::size_t>(src);
                              for (std::size_t ci = 0; ci < cin; ++ci) {
                                const std::size_t wo = (j * cin + ci) * cout;
                                double acc = 0.0;
                                for (std::size_t c = 0; c < cout; ++c) {
                                  acc += go[c] * wv[wo + c];
                                  if (!gin[1].empty()) gin[1][wo + c] += go[c] * xv[s * cin + ci];
                                }
                                if (!gin[0].empty()) gin[0][s * cin + ci] += acc;
                              }
                            }
                          }
                        });
}

Tensor dropout(const Tensor& x, double p, std::mt19937_64& rng) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("dropout rate must lie in [0, 1)");
  if (p == 0.0) return x;
  std::bernoulli_distribution keep(1.0 - p);
  std::vector<double> m(x.numel());
  for (double& v : m) v = keep(rng) ? 1.0 / (1.0 - p) : 0.0;
  return mul(x, Tensor::from(x.shape(), std::move(m)));
}

// ---- losses -----------------------------------------------------------------

Tensor cross_entropy(const Tensor& logits, const std::vector<std::size_t>& targets) {
  const std::size_t classes = logits.shape().back();
  const std::size_t rows = logits.numel() / classes;
  if (targets.size() != rows)
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets for " + std::to_string(rows) + " rows");
  for (std::size_t t : targets)
    if (t >= classes) throw DataError("cross_entropy target " + std::to_string(t) + " out of range");
  const auto lv = logits.data();
  auto probs = std::make_shared<std::vector<double>>(lv.size());
  double loss = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* l = lv.data() + r * classes;
    const double mx = *std::max_element(l, l + classes);
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(l[c] - mx);
    for (std::size_t c = 0; c < classes; ++c) (*probs)[r * classes + c] = std::exp(l[c] - mx) / z;
    loss += -(l[targets[r]] - mx - std::log(z));
  }
  loss /= static_cast<double>(rows);
  return make_op_result({1}, {loss}, {logits},
                        [probs, targets, rows, classes](std::span<const double> g, std::span<std::span<double>> gin) {
                          const double s = g[0] / static_cast<double>(rows);
                          for (std::size_t r = 0; r < rows; ++r)
                            for (std::size_t c = 0; c < classes; ++c)
                              gin[0][r * classes + c] +=
                                  s * ((*probs)[r * classes + c] - (c == targets[r] ? 1.0 : 0.0));
                        });
}

Tensor bce_with_logits(const Tensor& logits, const std::vector<double>& targets) {
  if (targets.size() != logits.numel())
    throw DimensionError("bce_with_logits: " + std::to_string(targets.size()) + " targets for " +
                         shape_str(logits.shape()));
  const auto lv = logits.data();
  const double n = static_cast<double>(lv.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    const double x = lv[i];
    loss += std::max(x, 0.0) - x * targets[i] + std::log1p(std::exp(-std::fabs(x)));
  }
  return make_op_result({1}, {loss / n}, {logits},
                        [logits, targets, n](std::span<const double> g, std::span<std::span<double>> gin) {
                          const auto lv = logits.data();
                          for (std::size_t i = 0; i < lv.size(); ++i) {
                            const double x = lv[i];
                            const double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
                            gin[0][i] += g[0] * (s - targets[i]) / n;
                          }
                        });
}

}  // namespace react
