// Copyright 2026 The percep Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "percep/nn/graph.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "percep/core/imageops.hpp"

namespace percep::nn {

namespace {

std::atomic<std::uint64_t> g_next_id{1};

Var make_node(Tensor val, std::vector<Var> parents, std::function<void(Node&)> bp) {
  auto n = std::make_shared<Node>();
  n->val = std::move(val);
  n->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  bool rg = false;
  for (const auto& p : parents) rg = rg || p->requires_grad;
  n->requires_grad = rg;
  if (rg) {
    n->parents = std::move(parents);
    n->backprop = std::move(bp);
  }
  return n;
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (!a->val.same_shape(b->val))
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + a->val.shape_str() +
                                " vs " + b->val.shape_str());
}

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatRM>;
using CMapRM = Eigen::Map<const MatRM>;

std::vector<double>& scratch_col() {
  thread_local std::vector<double> buf;
  return buf;
}
std::vector<double>& scratch_dcol() {
  thread_local std::vector<double> buf;
  return buf;
}

// im2col for zero-padded strided conv: out is [Cin*kh*kw, Ho*Wo] row-major.
void im2col(const Tensor& x, int kh, int kw, int stride, int pad, int ho, int wo,
            std::vector<double>& col) {
  const int ci = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::int64_t cols = static_cast<std::int64_t>(ho) * wo;
  col.assign(static_cast<size_t>(ci) * kh * kw * cols, 0.0);
  for (int c = 0; c < ci; ++c)
    for (int ky = 0; ky < kh; ++ky)
      for (int kx = 0; kx < kw; ++kx) {
        const std::int64_t row = (static_cast<std::int64_t>(c) * kh + ky) * kw + kx;
        double* dst = col.data() + row * cols;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          const double* src = x.data() + (static_cast<std::int64_t>(c) * h + iy) * w;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < w) dst[static_cast<std::int64_t>(oy) * wo + ox] = src[ix];
          }
        }
      }
}

void col2im_accumulate(const std::vector<double>& col, int ci, int h, int w, int kh, int kw,
                       int stride, int pad, int ho, int wo, Tensor& dx) {
  const std::int64_t cols = static_cast<std::int64_t>(ho) * wo;
  for (int c = 0; c < ci; ++c)
    for (int ky = 0; ky < kh; ++ky)
      for (int kx = 0; kx < kw; ++kx) {
        const std::int64_t row = (static_cast<std::int64_t>(c) * kh + ky) * kw + kx;
        const double* src = col.data() + row * cols;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          double* dst = dx.data() + (static_cast<std::int64_t>(c) * h + iy) * w;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < w) dst[ix] += src[static_cast<std::int64_t>(oy) * wo + ox];
          }
        }
      }
}

}  // namespace

Var leaf(Tensor v, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->val = std::move(v);
  n->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  n->requires_grad = requires_grad;
  return n;
}

Var constant(Tensor v) { return leaf(std::move(v), false); }
Var constant_scalar(double v) { return leaf(Tensor::scalar(v), false); }

void backward(const Var& root) {
  if (root->val.numel() != 1) throw std::invalid_argument("backward: root must be scalar");
  // Collect the reachable subgraph.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{root.get()};
  seen.insert(root.get());
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (const auto& p : n->parents)
      if (seen.insert(p.get()).second) stack.push_back(p.get());
  }
  std::sort(order.begin(), order.end(), [](Node* a, Node* b) { return a->id > b->id; });
  for (Node* n : order) {
    if (!n->requires_grad) continue;
    n->g();
    n->zero_grad();
  }
  if (!root->requires_grad) return;  // graph of constants: nothing to do
  root->g()[0] = 1.0;
  for (Node* n : order)
    if (n->backprop && n->requires_grad) n->backprop(*n);
}

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  Tensor out = a->val;
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] += b->val[i];
  return make_node(std::move(out), {a, b}, [](Node& n) {
    for (int s = 0; s < 2; ++s) {
      auto& p = n.parents[static_cast<size_t>(s)];
      if (!p->requires_grad) continue;
      auto& g = p->g();
      for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i];
    }
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  Tensor out = a->val;
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] -= b->val[i];
  return make_node(std::move(out), {a, b}, [](Node& n) {
    if (n.parents[0]->requires_grad) {
      auto& g = n.parents[0]->g();
      for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i];
    }
    if (n.parents[1]->requires_grad) {
      auto& g = n.parents[1]->g();
      for (std::int64_t i = 0; i < g.numel(); ++i) g[i] -= n.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a, b, "mul");
  Tensor out = a->val;
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] *= b->val[i];
  return make_node(std::move(out), {a, b}, [](Node& n) {
    const Tensor& av = n.parents[0]->val;
    const Tensor& bv = n.parents[1]->val;
    if (n.parents[0]->requires_grad) {
      auto& g = n.parents[0]->g();
      for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * bv[i];
    }
    if (n.parents[1]->requires_grad) {
      auto& g = n.parents[1]->g();
      for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * av[i];
    }
  });
}

Var scale(const Var& a, double c) {
  Tensor out = a->val;
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] *= c;
  return make_node(std::move(out), {a}, [c](Node& n) {
    auto& g = n.parents[0]->g();
    for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += c * n.grad[i];
  });
}

Var add_scalar(const Var& a, double c) {
  Tensor out = a->val;
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] += c;
  return make_node(std::move(out), {a}, [](Node& n) {
    auto& g = n.parents[0]->g();
    for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i];
  });
}

Var silu(const Var& x) {
  Tensor out = x->val;
  for (std::int64_t i = 0; i < out.numel(); ++i) {
    const double s = 1.0 / (1.0 + std::exp(-out[i]));
    out[i] = out[i] * s;
  }
  return make_node(std::move(out), {x}, [](Node& n) {
    const Tensor& xv = n.parents[0]->val;
    auto& g = n.parents[0]->g();
    for (std::int64_t i = 0; i < g.numel(); ++i) {
      const double s = 1.0 / (1.0 + std::exp(-xv[i]));
      g[i] += n.grad[i] * (s + xv[i] * s * (1.0 - s));
    }
  });
}

Var sigmoid(const Var& x) {
  Tensor out = x->val;
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
  return make_node(std::move(out), {x}, [](Node& n) {
    const Tensor& y = n.val;
    auto& g = n.parents[0]->g();
    for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * y[i] * (1.0 - y[i]);
  });
}

Var clamp_vals(const Var& x, double lo, double hi) {
  Tensor out = x->val;
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] = std::clamp(out[i], lo, hi);
  return make_node(std::move(out), {x}, [lo, hi](Node& n) {
    const Tensor& xv = n.parents[0]->val;
    auto& g = n.parents[0]->g();
    for (std::int64_t i = 0; i < g.numel(); ++i)
      if (xv[i] > lo && xv[i] < hi) g[i] += n.grad[i];
  });
}

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
  if (x->val.rank() != 3 || w->val.rank() != 4 || b->val.rank() != 1)
    throw std::invalid_argument("conv2d: bad ranks");
  const int ci = x->val.dim(0), h = x->val.dim(1), wd = x->val.dim(2);
  const int co = w->val.dim(0), kh = w->val.dim(2), kw = w->val.dim(3);
  if (w->val.dim(1) != ci) throw std::invalid_argument("conv2d: channel mismatch");
  if (b->val.dim(0) != co) throw std::invalid_argument("conv2d: bias size mismatch");
  if (stride < 1) throw std::invalid_argument("conv2d: bad stride");
  const int ho = (h + 2 * pad - kh) / stride + 1;
  const int wo = (wd + 2 * pad - kw) / stride + 1;
  if (ho < 1 || wo < 1) throw std::invalid_argument("conv2d: output collapses to zero size");

  const std::int64_t k = static_cast<std::int64_t>(ci) * kh * kw;
  const std::int64_t m = static_cast<std::int64_t>(ho) * wo;
  std::vector<double>& col = scratch_col();
  im2col(x->val, kh, kw, stride, pad, ho, wo, col);

  Tensor out({co, ho, wo});
  {
    CMapRM W(w->val.data(), co, k);
    CMapRM X(col.data(), k, m);
    MapRM Y(out.data(), co, m);
    Y.noalias() = W * X;
    for (int c = 0; c < co; ++c) Y.row(c).array() += b->val[c];
  }

  const int params[6] = {stride, pad, kh, kw, ho, wo};
  return make_node(std::move(out), {x, w, b},
                   [p0 = params[0], p1 = params[1], p2 = params[2], p3 = params[3], p4 = params[4],
                    p5 = params[5]](Node& n) {
                     const Var& xp = n.parents[0];
                     const Var& wp = n.parents[1];
                     const Var& bp = n.parents[2];
                     const int stride = p0, pad = p1, kh = p2, kw = p3, ho = p4, wo = p5;
                     const int ci = xp->val.dim(0), h = xp->val.dim(1), wd = xp->val.dim(2);
                     const int co = wp->val.dim(0);
                     const std::int64_t k = static_cast<std::int64_t>(ci) * kh * kw;
                     const std::int64_t m = static_cast<std::int64_t>(ho) * wo;
                     CMapRM dY(n.grad.data(), co, m);
                     if (bp->requires_grad) {
                       auto& gb = bp->g();
                       for (int c = 0; c < co; ++c) gb[c] += dY.row(c).sum();
                     }
                     if (wp->requires_grad) {
                       std::vector<double>& col = scratch_col();
                       im2col(xp->val, kh, kw, stride, pad, ho, wo, col);
                       CMapRM X(col.data(), k, m);
                       MapRM dW(wp->g().data(), co, k);
                       dW.noalias() += dY * X.transpose();
                     }
                     if (xp->requires_grad) {
                       std::vector<double>& dcol = scratch_dcol();
                       dcol.assign(static_cast<size_t>(k) * m, 0.0);
                       MapRM dX(dcol.data(), k, m);
                       CMapRM W(wp->val.data(), co, k);
                       dX.noalias() = W.transpose() * dY;
                       col2im_accumulate(dcol, ci, h, wd, kh, kw, stride, pad, ho, wo, xp->g());
                     }
                   });
}

Var linear(const Var& x, const Var& w, const Var& b) {
  if (x->val.rank() != 1 || w->val.rank() != 2 || b->val.rank() != 1)
    throw std::invalid_argument("linear: bad ranks");
  const int din = x->val.dim(0), dout = w->val.dim(0);
  if (w->val.dim(1) != din || b->val.dim(0) != dout)
    throw std::invalid_argument("linear: dimension mismatch");
  Tensor out({dout});
  for (int o = 0; o < dout; ++o) {
    double acc = b->val[o];
    const double* wr = w->val.data() + static_cast<std::int64_t>(o) * din;
    for (int i = 0; i < din; ++i) acc += wr[i] * x->val[i];
    out[o] = acc;
  }
  return make_node(std::move(out), {x, w, b}, [](Node& n) {
    const Var& xp = n.parents[0];
    const Var& wp = n.parents[1];
    const Var& bp = n.parents[2];
    const int din = xp->val.dim(0), dout = wp->val.dim(0);
    if (bp->requires_grad) {
      auto& gb = bp->g();
      for (int o = 0; o < dout; ++o) gb[o] += n.grad[o];
    }
    if (wp->requires_grad) {
      auto& gw = wp->g();
      for (int o = 0; o < dout; ++o)
        for (int i = 0; i < din; ++i)
          gw[static_cast<std::int64_t>(o) * din + i] += n.grad[o] * xp->val[i];
    }
    if (xp->requires_grad) {
      auto& gx = xp->g();
      for (int o = 0; o < dout; ++o) {
        const double* wr = wp->val.data() + static_cast<std::int64_t>(o) * din;
        for (int i = 0; i < din; ++i) gx[i] += n.grad[o] * wr[i];
      }
    }
  });
}

Var concat_ch(const Var& a, const Var& b) {
  if (a->val.rank() != 3 || b->val.rank() != 3 || a->val.dim(1) != b->val.dim(1) ||
      a->val.dim(2) != b->val.dim(2))
    throw std::invalid_argument("concat_ch: incompatible shapes");
  const int ca = a->val.dim(0), cb = b->val.dim(0), h = a->val.dim(1), w = a->val.dim(2);
  Tensor out({ca + cb, h, w});
  std::copy(a->val.data(), a->val.data() + a->val.numel(), out.data());
  std::copy(b->val.data(), b->val.data() + b->val.numel(), out.data() + a->val.numel());
  return make_node(std::move(out), {a, b}, [](Node& n) {
    const auto na = n.parents[0]->val.numel();
    if (n.parents[0]->requires_grad) {
      auto& g = n.parents[0]->g();
      for (std::int64_t i = 0; i < na; ++i) g[i] += n.grad[i];
    }
    if (n.parents[1]->requires_grad) {
      auto& g = n.parents[1]->g();
      for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[na + i];
    }
  });
}

Var global_avg_pool(const Var& x) {
  if (x->val.rank() != 3) throw std::invalid_argument("global_avg_pool: expected CHW");
  const int c = x->val.dim(0), h = x->val.dim(1), w = x->val.dim(2);
  const double inv = 1.0 / (static_cast<double>(h) * w);
  Tensor out({c});
  for (int ci = 0; ci < c; ++ci) {
    double acc = 0.0;
    const double* p = x->val.data() + static_cast<std::int64_t>(ci) * h * w;
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(h) * w; ++i) acc += p[i];
    out[ci] = acc * inv;
  }
  return make_node(std::move(out), {x}, [inv, h, w](Node& n) {
    auto& g = n.parents[0]->g();
    const int c = n.parents[0]->val.dim(0);
    for (int ci = 0; ci < c; ++ci) {
      double* p = g.data() + static_cast<std::int64_t>(ci) * h * w;
      const double d = n.grad[ci] * inv;
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(h) * w; ++i) p[i] += d;
    }
  });
}

Var resize_bilinear(const Var& x, int out_h, int out_w) {
  if (x->val.rank() != 3) throw std::invalid_argument("resize_bilinear: expected CHW");
  Tensor out = core::resize_bilinear(x->val, out_h, out_w);
  const int in_h = x->val.dim(1), in_w = x->val.dim(2);
  return make_node(std::move(out), {x}, [in_h, in_w, out_h, out_w](Node& n) {
    const auto ty = core::bilinear_taps(in_h, out_h);
    const auto tx = core::bilinear_taps(in_w, out_w);
    auto& g = n.parents[0]->g();
    const int c = n.parents[0]->val.dim(0);
    for (int ci = 0; ci < c; ++ci)
      for (int y = 0; y < out_h; ++y) {
        const auto& a = ty[static_cast<size_t>(y)];
        for (int x2 = 0; x2 < out_w; ++x2) {
          const auto& b = tx[static_cast<size_t>(x2)];
          const double d = n.grad.at(ci, y, x2);
          g.at(ci, a.i0, b.i0) += d * (1 - a.w1) * (1 - b.w1);
          g.at(ci, a.i0, b.i1) += d * (1 - a.w1) * b.w1;
          g.at(ci, a.i1, b.i0) += d * a.w1 * (1 - b.w1);
          g.at(ci, a.i1, b.i1) += d * a.w1 * b.w1;
        }
      }
  });
}

Var pixel_shuffle(const Var& x, int r) {
  if (x->val.rank() != 3) throw std::invalid_argument("pixel_shuffle: expected CHW");
  const int c_in = x->val.dim(0), h = x->val.dim(1), w = x->val.dim(2);
  if (r < 1 || c_in % (r * r) != 0)
    throw std::invalid_argument("pixel_shuffle: channels not divisible by r^2");
  const int c = c_in / (r * r);
  Tensor out({c, h * r, w * r});
  for (int co = 0; co < c; ++co)
    for (int oy = 0; oy < h * r; ++oy)
      for (int ox = 0; ox < w * r; ++ox)
        out.at(co, oy, ox) = x->val.at(co * r * r + (oy % r) * r + (ox % r), oy / r, ox / r);
  return make_node(std::move(out), {x}, [c, h, w, r](Node& n) {
    auto& g = n.parents[0]->g();
    for (int co = 0; co < c; ++co)
      for (int oy = 0; oy < h * r; ++oy)
        for (int ox = 0; ox < w * r; ++ox)
          g.at(co * r * r + (oy % r) * r + (ox % r), oy / r, ox / r) += n.grad.at(co, oy, ox);
  });
}

Var mul_bcast_ch(const Var& x, const Var& m) {
  if (x->val.rank() != 3 || m->val.rank() != 3 || m->val.dim(0) != 1 ||
      m->val.dim(1) != x->val.dim(1) || m->val.dim(2) != x->val.dim(2))
    throw std::invalid_argument("mul_bcast_ch: incompatible shapes");
  const int c = x->val.dim(0), h = x->val.dim(1), w = x->val.dim(2);
  Tensor out = x->val;
  for (int ci = 0; ci < c; ++ci)
    for (int y = 0; y < h; ++y)
      for (int xx = 0; xx < w; ++xx) out.at(ci, y, xx) *= m->val.at(0, y, xx);
  return make_node(std::move(out), {x, m}, [c, h, w](Node& n) {
    const Tensor& xv = n.parents[0]->val;
    const Tensor& mv = n.parents[1]->val;
    if (n.parents[0]->requires_grad) {
      auto& g = n.parents[0]->g();
      for (int ci = 0; ci < c; ++ci)
        for (int y = 0; y < h; ++y)
          for (int xx = 0; xx < w; ++xx) g.at(ci, y, xx) += n.grad.at(ci, y, xx) * mv.at(0, y, xx);
    }
    if (n.parents[1]->requires_grad) {
      auto& g = n.parents[1]->g();
      for (int ci = 0; ci < c; ++ci)
        for (int y = 0; y < h; ++y)
          for (int xx = 0; xx < w; ++xx) g.at(0, y, xx) += n.grad.at(ci, y, xx) * xv.at(ci, y, xx);
    }
  });
}

Var mean_all(const Var& x) {
  const double inv = 1.0 / static_cast<double>(x->val.numel());
  double acc = 0.0;
  for (std::int64_t i = 0; i < x->val.numel(); ++i) acc += x->val[i];
  return make_node(Tensor::scalar(acc * inv), {x}, [inv](Node& n) {
    auto& g = n.parents[0]->g();
    const double d = n.grad[0] * inv;
    for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += d;
  });
}

Var max_all(const Var& x) {
  std::int64_t arg = 0;
  double m = x->val[0];
  for (std::int64_t i = 1; i < x->val.numel(); ++i)
    if (x->val[i] > m) {
      m = x->val[i];
      arg = i;
    }
  return make_node(Tensor::scalar(m), {x}, [arg](Node& n) { n.parents[0]->g()[arg] += n.grad[0]; });
}

Var l1_loss(const Var& a, const Var& b) {
  check_same_shape(a, b, "l1_loss");
  const double inv = 1.0 / static_cast<double>(a->val.numel());
  double acc = 0.0;
  for (std::int64_t i = 0; i < a->val.numel(); ++i) acc += std::abs(a->val[i] - b->val[i]);
  return make_node(Tensor::scalar(acc * inv), {a, b}, [inv](Node& n) {
    const Tensor& av = n.parents[0]->val;
    const Tensor& bv = n.parents[1]->val;
    const double d = n.grad[0] * inv;
    for (std::int64_t i = 0; i < av.numel(); ++i) {
      const double diff = av[i] - bv[i];
      const double s = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
      if (n.parents[0]->requires_grad) n.parents[0]->g()[i] += d * s;
      if (n.parents[1]->requires_grad) n.parents[1]->g()[i] -= d * s;
    }
  });
}

Var mse_loss(const Var& a, const Var& b) {
  check_same_shape(a, b, "mse_loss");
  const double inv = 1.0 / static_cast<double>(a->val.numel());
  double acc = 0.0;
  for (std::int64_t i = 0; i < a->val.numel(); ++i) {
    const double d = a->val[i] - b->val[i];
    acc += d * d;
  }
  return make_node(Tensor::scalar(acc * inv), {a, b}, [inv](Node& n) {
    const Tensor& av = n.parents[0]->val;
    const Tensor& bv = n.parents[1]->val;
    const double d = n.grad[0] * inv * 2.0;
    for (std::int64_t i = 0; i < av.numel(); ++i) {
      const double diff = av[i] - bv[i];
      if (n.parents[0]->requires_grad) n.parents[0]->g()[i] += d * diff;
      if (n.parents[1]->requires_grad) n.parents[1]->g()[i] -= d * diff;
    }
  });
}

Var hinge(double margin, const Var& d) {
  if (d->val.numel() != 1) throw std::invalid_argument("hinge: expected scalar");
  const double arg = margin - d->val[0];
  const double out = arg > 0.0 ? arg : 0.0;
  return make_node(Tensor::scalar(out), {d}, [arg](Node& n) {
    // Tie-break: zero gradient exactly at the kink.
    if (arg > 0.0) n.parents[0]->g()[0] -= n.grad[0];
  });
}

Var abs_diff(const Var& a, const Var& b) {
  if (a->val.numel() != 1 || b->val.numel() != 1)
    throw std::invalid_argument("abs_diff: expected scalars");
  const double diff = a->val[0] - b->val[0];
  return make_node(Tensor::scalar(std::abs(diff)), {a, b}, [diff](Node& n) {
    const double s = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    if (n.parents[0]->requires_grad) n.parents[0]->g()[0] += n.grad[0] * s;
    if (n.parents[1]->requires_grad) n.parents[1]->g()[0] -= n.grad[0] * s;
  });
}

Var weighted_sum(const std::vector<Var>& terms, const std::vector<double>& coeffs) {
  if (terms.empty() || terms.size() != coeffs.size())
    throw std::invalid_argument("weighted_sum: bad inputs");
  double acc = 0.0;
  for (size_t i = 0; i < terms.size(); ++i) {
    if (terms[i]->val.numel() != 1) throw std::invalid_argument("weighted_sum: non-scalar term");
    acc += coeffs[i] * terms[i]->val[0];
  }
  return make_node(Tensor::scalar(acc), terms, [coeffs](Node& n) {
    for (size_t i = 0; i < n.parents.size(); ++i)
      if (n.parents[i]->requires_grad) n.parents[i]->g()[0] += coeffs[i] * n.grad[0];
  });
}

Var mean_of(const std::vector<Var>& terms) {
  std::vector<double> c(terms.size(), 1.0 / static_cast<double>(terms.size()));
  return weighted_sum(terms, c);
}

}  // namespace percep::nn
