// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0
//
// Differentiable ops over Graph<T>. Matrix arguments are row major;
// sequence features are [feature x time].

#ifndef WSEP_OPS_HPP_
#define WSEP_OPS_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "wsep/graph.hpp"
#include "wsep/kernels.hpp"

namespace wsep::ops {

using wsep::Graph;
using wsep::Node;
using wsep::Tensor;

// ---------------------------------------------------------------------------
// Basic algebra

template <typename T>
Node<T>* matmul(Graph<T>& g, Node<T>* a, Node<T>* b) {
  WSEP_CHECK(a->val.rank() == 2 && b->val.rank() == 2 &&
                 a->val.dim(1) == b->val.dim(0),
             "matmul shape mismatch " << a->val.shape_str() << " x "
                                      << b->val.shape_str());
  const int m = a->val.dim(0), k = a->val.dim(1), n = b->val.dim(1);
  Tensor<T> out({m, n});
  kernels::gemm_nn(m, n, k, a->val.ptr(), b->val.ptr(), out.ptr());
  Node<T>* r = g.make(std::move(out), {a, b}, nullptr);
  r->backfn = [=]() {
    if (a->needs_grad)
      kernels::gemm_nt(m, k, n, r->grad.ptr(), b->val.ptr(), a->grad.ptr());
    if (b->needs_grad)
      kernels::gemm_tn(k, n, m, a->val.ptr(), r->grad.ptr(), b->grad.ptr());
  };
  return r;
}

// y = a*x + b broadcast over columns: x [M x T], bias b [M].
template <typename T>
Node<T>* bias_rows(Graph<T>& g, Node<T>* x, Node<T>* b) {
  const int m = x->val.dim(0), t = x->val.dim(1);
  WSEP_CHECK(b->val.numel() == m, "bias_rows shape mismatch");
  Tensor<T> out = x->val;
  for (int i = 0; i < m; ++i) {
    T bi = b->val.data[i];
    T* row = out.ptr() + static_cast<std::size_t>(i) * t;
    for (int j = 0; j < t; ++j) row[j] += bi;
  }
  Node<T>* r = g.make(std::move(out), {x, b}, nullptr);
  r->backfn = [=]() {
    if (x->needs_grad)
      kernels::axpy(r->grad.data.size(), T(1), r->grad.ptr(), x->grad.ptr());
    if (b->needs_grad) {
      for (int i = 0; i < m; ++i) {
        T s = 0;
        const T* row = r->grad.ptr() + static_cast<std::size_t>(i) * t;
        for (int j = 0; j < t; ++j) s += row[j];
        b->grad.data[i] += s;
      }
    }
  };
  return r;
}

// W x + b; W [M x D], x [D x T], b [M].
template <typename T>
Node<T>* linear(Graph<T>& g, Node<T>* w, Node<T>* x, Node<T>* b) {
  return bias_rows(g, matmul(g, w, x), b);
}

template <typename T>
Node<T>* add(Graph<T>& g, Node<T>* a, Node<T>* b) {
  WSEP_CHECK(a->val.same_shape(b->val), "add shape mismatch");
  Tensor<T> out = a->val;
  kernels::axpy(out.data.size(), T(1), b->val.ptr(), out.ptr());
  Node<T>* r = g.make(std::move(out), {a, b}, nullptr);
  r->backfn = [=]() {
    if (a->needs_grad)
      kernels::axpy(r->grad.data.size(), T(1), r->grad.ptr(), a->grad.ptr());
    if (b->needs_grad)
      kernels::axpy(r->grad.data.size(), T(1), r->grad.ptr(), b->grad.ptr());
  };
  return r;
}

template <typename T>
Node<T>* mul_elem(Graph<T>& g, Node<T>* a, Node<T>* b) {
  WSEP_CHECK(a->val.same_shape(b->val), "mul_elem shape mismatch");
  Tensor<T> out = a->val;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b->val.data[i];
  Node<T>* r = g.make(std::move(out), {a, b}, nullptr);
  r->backfn = [=]() {
    const std::size_t n = r->val.data.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (a->needs_grad) a->grad.data[i] += r->grad.data[i] * b->val.data[i];
      if (b->needs_grad) b->grad.data[i] += r->grad.data[i] * a->val.data[i];
    }
  };
  return r;
}

template <typename T>
Node<T>* scale(Graph<T>& g, Node<T>* a, T c) {
  Tensor<T> out = a->val;
  for (auto& v : out.data) v *= c;
  Node<T>* r = g.make(std::move(out), {a}, nullptr);
  r->backfn = [=]() {
    if (a->needs_grad)
      kernels::axpy(r->grad.data.size(), c, r->grad.ptr(), a->grad.ptr());
  };
  return r;
}

// ---------------------------------------------------------------------------
// Elementwise nonlinearities

template <typename T>
Node<T>* sigmoid(Graph<T>& g, Node<T>* a) {
  Tensor<T> out = a->val;
  for (auto& v : out.data) v = T(1) / (T(1) + std::exp(-v));
  Node<T>* r = g.make(std::move(out), {a}, nullptr);
  r->backfn = [=]() {
    if (!a->needs_grad) return;
    const std::size_t n = r->val.data.size();
    for (std::size_t i = 0; i < n; ++i) {
      T y = r->val.data[i];
      a->grad.data[i] += r->grad.data[i] * y * (T(1) - y);
    }
  };
  return r;
}

template <typename T>
Node<T>* tanh_act(Graph<T>& g, Node<T>* a) {
  Tensor<T> out = a->val;
  for (auto& v : out.data) v = std::tanh(v);
  Node<T>* r = g.make(std::move(out), {a}, nullptr);
  r->backfn = [=]() {
    if (!a->needs_grad) return;
    const std::size_t n = r->val.data.size();
    for (std::size_t i = 0; i < n; ++i) {
      T y = r->val.data[i];
      a->grad.data[i] += r->grad.data[i] * (T(1) - y * y);
    }
  };
  return r;
}

template <typename T>
Node<T>* relu(Graph<T>& g, Node<T>* a) {
  Tensor<T> out = a->val;
  for (auto& v : out.data) v = v > T(0) ? v : T(0);
  Node<T>* r = g.make(std::move(out), {a}, nullptr);
  r->backfn = [=]() {
    if (!a->needs_grad) return;
    const std::size_t n = r->val.data.size();
    for (std::size_t i = 0; i < n; ++i)
      if (a->val.data[i] > T(0)) a->grad.data[i] += r->grad.data[i];
  };
  return r;
}

// log(x + floor); the floor keeps the argument positive.
template <typename T>
Node<T>* log_floored(Graph<T>& g, Node<T>* a, T floor) {
  Tensor<T> out = a->val;
  for (auto& v : out.data) v = std::log(v + floor);
  Node<T>* r = g.make(std::move(out), {a}, nullptr);
  r->backfn = [=]() {
    if (!a->needs_grad) return;
    const std::size_t n = r->val.data.size();
    for (std::size_t i = 0; i < n; ++i)
      a->grad.data[i] += r->grad.data[i] / (a->val.data[i] + floor);
  };
  return r;
}

// ---------------------------------------------------------------------------
// Shape ops

template <typename T>
Node<T>* reshape(Graph<T>& g, Node<T>* a, std::vector<int> shape) {
  WSEP_CHECK(Tensor<T>::numel_of(shape) == a->val.numel(),
             "reshape element count mismatch");
  Tensor<T> out(std::move(shape), a->val.data);
  Node<T>* r = g.make(std::move(out), {a}, nullptr);
  r->backfn = [=]() {
    if (a->needs_grad)
      kernels::axpy(r->grad.data.size(), T(1), r->grad.ptr(), a->grad.ptr());
  };
  return r;
}

template <typename T>
Node<T>* concat_rows(Graph<T>& g, Node<T>* a, Node<T>* b) {
  WSEP_CHECK(a->val.rank() == 2 && b->val.rank() == 2 &&
                 a->val.dim(1) == b->val.dim(1),
             "concat_rows column mismatch");
  const int ma = a->val.dim(0), mb = b->val.dim(0), t = a->val.dim(1);
  Tensor<T> out({ma + mb, t});
  std::copy(a->val.data.begin(), a->val.data.end(), out.data.begin());
  std::copy(b->val.data.begin(), b->val.data.end(),
            out.data.begin() + a->val.numel());
  Node<T>* r = g.make(std::move(out), {a, b}, nullptr);
  r->backfn = [=]() {
    if (a->needs_grad)
      kernels::axpy(a->grad.data.size(), T(1), r->grad.ptr(), a->grad.ptr());
    if (b->needs_grad)
      kernels::axpy(b->grad.data.size(), T(1),
                    r->grad.ptr() + a->val.numel(), b->grad.ptr());
  };
  return r;
}

// Rows [r0, r1) of a 2-D node.
template <typename T>
Node<T>* slice_rows(Graph<T>& g, Node<T>* a, int r0, int r1) {
  WSEP_CHECK(a->val.rank() == 2 && 0 <= r0 && r0 < r1 && r1 <= a->val.dim(0),
             "slice_rows out of range");
  const int t = a->val.dim(1);
  Tensor<T> out({r1 - r0, t});
  std::copy(a->val.data.begin() + static_cast<std::size_t>(r0) * t,
            a->val.data.begin() + static_cast<std::size_t>(r1) * t,
            out.data.begin());
  Node<T>* r = g.make(std::move(out), {a}, nullptr);
  r->backfn = [=]() {
    if (a->needs_grad)
      kernels::axpy(r->grad.data.size(), T(1), r->grad.ptr(),
                    a->grad.ptr() + static_cast<std::size_t>(r0) * t);
  };
  return r;
}

// ---------------------------------------------------------------------------
// Reductions / pooling

template <typename T>
Node<T>* sum_all(Graph<T>& g, Node<T>* a) {
  T s = 0;
  for (T v : a->val.data) s += v;
  Node<T>* r = g.make(Tensor<T>({1}, {s}), {a}, nullptr);
  r->backfn = [=]() {
    if (!a->needs_grad) return;
    T gr = r->grad.data[0];
    for (auto& v : a->grad.data) v += gr;
  };
  return r;
}

// Per-row max over columns: [n x T] -> [n x 1].
template <typename T>
Node<T>* max_over_cols(Graph<T>& g, Node<T>* a) {
  const int n = a->val.dim(0), t = a->val.dim(1);
  WSEP_CHECK(t >= 1, "max_over_cols: empty time axis");
  Tensor<T> out({n, 1});
  auto argmax = std::make_shared<std::vector<int>>(n);
  for (int i = 0; i < n; ++i) {
    const T* row = a->val.ptr() + static_cast<std::size_t>(i) * t;
    int best = 0;
    for (int j = 1; j < t; ++j)
      if (row[j] > row[best]) best = j;
    (*argmax)[i] = best;
    out.data[i] = row[best];
  }
  Node<T>* r = g.make(std::move(out), {a}, nullptr);
  r->backfn = [=]() {
    if (!a->needs_grad) return;
    for (int i = 0; i < n; ++i)
      a->grad.data[static_cast<std::size_t>(i) * t + (*argmax)[i]] +=
          r->grad.data[i];
  };
  return r;
}

template <typename T>
Node<T>* mean_over_cols(Graph<T>& g, Node<T>* a) {
  const int n = a->val.dim(0), t = a->val.dim(1);
  WSEP_CHECK(t >= 1, "mean_over_cols: empty time axis");
  Tensor<T> out({n, 1});
  for (int i = 0; i < n; ++i) {
    const T* row = a->val.ptr() + static_cast<std::size_t>(i) * t;
    T s = 0;
    for (int j = 0; j < t; ++j) s += row[j];
    out.data[i] = s / T(t);
  }
  Node<T>* r = g.make(std::move(out), {a}, nullptr);
  r->backfn = [=]() {
    if (!a->needs_grad) return;
    for (int i = 0; i < n; ++i) {
      T gr = r->grad.data[i] / T(t);
      T* row = a->grad.ptr() + static_cast<std::size_t>(i) * t;
      for (int j = 0; j < t; ++j) row[j] += gr;
    }
  };
  return r;
}

// ---------------------------------------------------------------------------
// Normalization over rows: x [M x L], per-row statistics, learnable
// gain/bias [M]. Used both for separator input normalization (rows =
// frequency features) and for conv feature maps (rows = channels with
// L = H*W).
template <typename T>
Node<T>* norm_rows(Graph<T>& g, Node<T>* x, Node<T>* gain, Node<T>* bias) {
  const int m = x->val.dim(0);
  const int l = static_cast<int>(x->val.numel()) / m;
  WSEP_CHECK(gain->val.numel() == m && bias->val.numel() == m,
             "norm_rows parameter shape mismatch");
  const T eps = T(1e-5);
  Tensor<T> out(x->val.shape);
  auto inv_sigma = std::make_shared<std::vector<T>>(m);
  auto xhat = std::make_shared<Tensor<T>>(x->val.shape);
  for (int i = 0; i < m; ++i) {
    const T* row = x->val.ptr() + static_cast<std::size_t>(i) * l;
    T mu = 0;
    for (int j = 0; j < l; ++j) mu += row[j];
    mu /= T(l);
    T var = 0;
    for (int j = 0; j < l; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= T(l);
    T is = T(1) / std::sqrt(var + eps);
    (*inv_sigma)[i] = is;
    T gi = gain->val.data[i], bi = bias->val.data[i];
    T* xh = xhat->ptr() + static_cast<std::size_t>(i) * l;
    T* o = out.ptr() + static_cast<std::size_t>(i) * l;
    for (int j = 0; j < l; ++j) {
      xh[j] = (row[j] - mu) * is;
      o[j] = gi * xh[j] + bi;
    }
  }
  Node<T>* r = g.make(std::move(out), {x, gain, bias}, nullptr);
  r->backfn = [=]() {
    for (int i = 0; i < m; ++i) {
      const T* dy = r->grad.ptr() + static_cast<std::size_t>(i) * l;
      const T* xh = xhat->ptr() + static_cast<std::size_t>(i) * l;
      T sum_dy = 0, sum_dy_xh = 0;
      for (int j = 0; j < l; ++j) {
        sum_dy += dy[j];
        sum_dy_xh += dy[j] * xh[j];
      }
      if (gain->needs_grad) gain->grad.data[i] += sum_dy_xh;
      if (bias->needs_grad) bias->grad.data[i] += sum_dy;
      if (x->needs_grad) {
        T gi = gain->val.data[i];
        T is = (*inv_sigma)[i];
        T mean_dy = sum_dy / T(l), mean_dy_xh = sum_dy_xh / T(l);
        T* dx = x->grad.ptr() + static_cast<std::size_t>(i) * l;
        for (int j = 0; j < l; ++j)
          dx[j] += gi * is * (dy[j] - mean_dy - xh[j] * mean_dy_xh);
      }
    }
  };
  return r;
}

// ---------------------------------------------------------------------------
// Fused LSTM over a [D x T] sequence. Gate order in the stacked weight
// matrices is (input, forget, cell, output). Initial hidden/cell state is
// zero; `reverse` runs the recurrence from the last frame backwards.
template <typename T>
Node<T>* lstm(Graph<T>& g, Node<T>* x, Node<T>* wx, Node<T>* wh, Node<T>* b,
              bool reverse) {
  const int d = x->val.dim(0), t = x->val.dim(1);
  const int h4 = wx->val.dim(0), h = h4 / 4;
  WSEP_CHECK(h4 == 4 * h && wx->val.dim(1) == d && wh->val.dim(0) == h4 &&
                 wh->val.dim(1) == h && b->val.numel() == h4,
             "lstm parameter shapes inconsistent");

  // Input contribution for all frames at once: [4H x T].
  Tensor<T> pre_ft({h4, t});
  kernels::gemm_nn(h4, t, d, wx->val.ptr(), x->val.ptr(), pre_ft.ptr());

  // Time-major work buffers.
  auto gates = std::make_shared<Tensor<T>>(std::vector<int>{t, h4});
  auto cells = std::make_shared<Tensor<T>>(std::vector<int>{t, h});
  Tensor<T> out({h, t});
  std::vector<T> hprev(h, T(0)), cprev(h, T(0)), acc(h4);
  for (int step = 0; step < t; ++step) {
    const int tau = reverse ? t - 1 - step : step;
    for (int r = 0; r < h4; ++r) acc[r] = pre_ft.at(r, tau) + b->val.data[r];
    // acc += Wh * hprev (dot per row, contiguous over H).
    kernels::gemm_nt(h4, 1, h, wh->val.ptr(), hprev.data(), acc.data());
    T* gt = gates->ptr() + static_cast<std::size_t>(step) * h4;
    T* ct = cells->ptr() + static_cast<std::size_t>(step) * h;
    for (int j = 0; j < h; ++j) {
      T gi = T(1) / (T(1) + std::exp(-acc[j]));
      T gf = T(1) / (T(1) + std::exp(-acc[h + j]));
      T gc = std::tanh(acc[2 * h + j]);
      T go = T(1) / (T(1) + std::exp(-acc[3 * h + j]));
      T c = gf * cprev[j] + gi * gc;
      gt[j] = gi;
      gt[h + j] = gf;
      gt[2 * h + j] = gc;
      gt[3 * h + j] = go;
      ct[j] = c;
      T hv = go * std::tanh(c);
      out.at(j, tau) = hv;
      hprev[j] = hv;
      cprev[j] = c;
    }
  }

  Node<T>* r = g.make(std::move(out), {x, wx, wh, b}, nullptr);
  r->backfn = [=]() {
    Tensor<T> dpre({h4, t});  // gradient w.r.t. Wx*X contribution
    std::vector<T> dh(h, T(0)), dc(h, T(0)), da(h4), dh_rec(h);
    for (int step = t - 1; step >= 0; --step) {
      const int tau = reverse ? t - 1 - step : step;
      const T* gt = gates->ptr() + static_cast<std::size_t>(step) * h4;
      const T* ct = cells->ptr() + static_cast<std::size_t>(step) * h;
      const T* ct_prev =
          step > 0 ? cells->ptr() + static_cast<std::size_t>(step - 1) * h
                   : nullptr;
      for (int j = 0; j < h; ++j) {
        T dhj = dh[j] + r->grad.at(j, tau);
        T gi = gt[j], gf = gt[h + j], gc = gt[2 * h + j], go = gt[3 * h + j];
        T tc = std::tanh(ct[j]);
        T dcj = dc[j] + dhj * go * (T(1) - tc * tc);
        T cp = ct_prev ? ct_prev[j] : T(0);
        da[j] = dcj * gc * gi * (T(1) - gi);
        da[h + j] = dcj * cp * gf * (T(1) - gf);
        da[2 * h + j] = dcj * gi * (T(1) - gc * gc);
        da[3 * h + j] = dhj * tc * go * (T(1) - go);
        dc[j] = dcj * gf;
      }
      for (int rr = 0; rr < h4; ++rr) dpre.at(rr, tau) = da[rr];
      // dh_prev = Wh^T da, and dWh += da (outer) h_prev.
      std::fill(dh_rec.begin(), dh_rec.end(), T(0));
      const T* hp = nullptr;
      std::vector<T> hprev_buf;
      if (step > 0) {
        const int tau_prev = reverse ? t - 1 - (step - 1) : step - 1;
        hprev_buf.resize(h);
        for (int j = 0; j < h; ++j) hprev_buf[j] = r->val.at(j, tau_prev);
        hp = hprev_buf.data();
      }
      for (int rr = 0; rr < h4; ++rr) {
        kernels::axpy(h, da[rr], wh->val.ptr() + static_cast<std::size_t>(rr) * h,
                      dh_rec.data());
        if (hp && wh->needs_grad)
          kernels::axpy(h, da[rr], hp,
                        wh->grad.ptr() + static_cast<std::size_t>(rr) * h);
      }
      dh = dh_rec;
      if (b->needs_grad)
        for (int rr = 0; rr < h4; ++rr) b->grad.data[rr] += da[rr];
    }
    if (wx->needs_grad)
      kernels::gemm_nt(h4, d, t, dpre.ptr(), x->val.ptr(), wx->grad.ptr());
    if (x->needs_grad)
      kernels::gemm_tn(d, t, h4, wx->val.ptr(), dpre.ptr(), x->grad.ptr());
  };
  return r;
}

// ---------------------------------------------------------------------------
// 2-D convolution: x [Ci x H x W], w [Co x Ci x kh x kw], bias [Co],
// stride 1, zero padding kh/2, kw/2 (shape-preserving for odd kernels).
template <typename T>
Node<T>* conv2d(Graph<T>& g, Node<T>* x, Node<T>* w, Node<T>* b) {
  WSEP_CHECK(x->val.rank() == 3 && w->val.rank() == 4 &&
                 w->val.dim(1) == x->val.dim(0),
             "conv2d shape mismatch");
  const int ci = x->val.dim(0), hh = x->val.dim(1), ww = x->val.dim(2);
  const int co = w->val.dim(0), kh = w->val.dim(2), kw = w->val.dim(3);
  const int ph = kh / 2, pw = kw / 2;
  WSEP_CHECK(b->val.numel() == co, "conv2d bias mismatch");

  auto xrow = [hh, ww](const Tensor<T>& tns, int c, int y) {
    return tns.ptr() + (static_cast<std::size_t>(c) * hh + y) * ww;
  };
  Tensor<T> out({co, hh, ww});
  for (int oc = 0; oc < co; ++oc) {
    T* obase = out.ptr() + static_cast<std::size_t>(oc) * hh * ww;
    T bv = b->val.data[oc];
    for (std::size_t i = 0; i < static_cast<std::size_t>(hh) * ww; ++i)
      obase[i] = bv;
    for (int icch = 0; icch < ci; ++icch) {
      for (int dy = 0; dy < kh; ++dy) {
        for (int dx = 0; dx < kw; ++dx) {
          T wv = w->val.data[((static_cast<std::size_t>(oc) * ci + icch) * kh +
                              dy) * kw + dx];
          if (wv == T(0)) continue;
          const int x0 = std::max(0, pw - dx);
          const int x1 = std::min(ww, ww + pw - dx);
          if (x1 <= x0) continue;
          for (int y = 0; y < hh; ++y) {
            const int yi = y + dy - ph;
            if (yi < 0 || yi >= hh) continue;
            kernels::axpy(static_cast<std::size_t>(x1 - x0), wv,
                          xrow(x->val, icch, yi) + (x0 + dx - pw),
                          obase + static_cast<std::size_t>(y) * ww + x0);
          }
        }
      }
    }
  }
  Node<T>* r = g.make(std::move(out), {x, w, b}, nullptr);
  r->backfn = [=]() {
    for (int oc = 0; oc < co; ++oc) {
      const T* dobase = r->grad.ptr() + static_cast<std::size_t>(oc) * hh * ww;
      if (b->needs_grad) {
        T s = 0;
        for (std::size_t i = 0; i < static_cast<std::size_t>(hh) * ww; ++i)
          s += dobase[i];
        b->grad.data[oc] += s;
      }
      for (int icch = 0; icch < ci; ++icch) {
        for (int dy = 0; dy < kh; ++dy) {
          for (int dx = 0; dx < kw; ++dx) {
            const std::size_t widx =
                ((static_cast<std::size_t>(oc) * ci + icch) * kh + dy) * kw +
                dx;
            const int x0 = std::max(0, pw - dx);
            const int x1 = std::min(ww, ww + pw - dx);
            if (x1 <= x0) continue;
            T wv = w->val.data[widx];
            T dw = 0;
            for (int y = 0; y < hh; ++y) {
              const int yi = y + dy - ph;
              if (yi < 0 || yi >= hh) continue;
              const T* drow = dobase + static_cast<std::size_t>(y) * ww + x0;
              const T* xr = xrow(x->val, icch, yi) + (x0 + dx - pw);
              if (w->needs_grad)
                dw += kernels::dot(static_cast<std::size_t>(x1 - x0), drow, xr);
              if (x->needs_grad)
                kernels::axpy(static_cast<std::size_t>(x1 - x0), wv, drow,
                              x->grad.ptr() +
                                  (static_cast<std::size_t>(icch) * hh + yi) *
                                      ww +
                                  (x0 + dx - pw));
            }
            if (w->needs_grad) w->grad.data[widx] += dw;
          }
        }
      }
    }
  };
  return r;
}

// Max pooling over [C x H x W], ceil mode (short final blocks allowed).
template <typename T>
Node<T>* maxpool2d(Graph<T>& g, Node<T>* x, int ph, int pw) {
  WSEP_CHECK(x->val.rank() == 3 && ph >= 1 && pw >= 1, "maxpool2d bad args");
  const int c = x->val.dim(0), hh = x->val.dim(1), ww = x->val.dim(2);
  const int oh = (hh + ph - 1) / ph, ow = (ww + pw - 1) / pw;
  Tensor<T> out({c, oh, ow});
  auto argmax = std::make_shared<std::vector<std::size_t>>(
      static_cast<std::size_t>(c) * oh * ow);
  std::size_t oidx = 0;
  for (int ch = 0; ch < c; ++ch) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox, ++oidx) {
        const int y1 = std::min(hh, (oy + 1) * ph);
        const int x1 = std::min(ww, (ox + 1) * pw);
        std::size_t best = 0;
        T bv = -std::numeric_limits<T>::infinity();
        for (int y = oy * ph; y < y1; ++y) {
          for (int xx = ox * pw; xx < x1; ++xx) {
            std::size_t idx = (static_cast<std::size_t>(ch) * hh + y) * ww + xx;
            if (x->val.data[idx] > bv) {
              bv = x->val.data[idx];
              best = idx;
            }
          }
        }
        out.data[oidx] = bv;
        (*argmax)[oidx] = best;
      }
    }
  }
  Node<T>* r = g.make(std::move(out), {x}, nullptr);
  r->backfn = [=]() {
    if (!x->needs_grad) return;
    for (std::size_t i = 0; i < argmax->size(); ++i)
      x->grad.data[(*argmax)[i]] += r->grad.data[i];
  };
  return r;
}

}  // namespace wsep::ops

#endif  // WSEP_OPS_HPP_
