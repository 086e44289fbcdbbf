#ifndef JSCC_OPS_HPP_
#define JSCC_OPS_HPP_

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "jscc/graph.hpp"
#include "jscc/kernels.hpp"
#include "jscc/tensor.hpp"

namespace jscc {
namespace ops {

namespace detail {

inline void expect(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

template <typename S>
bool any_grad(const Graph<S>& g, std::initializer_list<int> ids) {
  for (int id : ids) {
    if (g.requires_grad(id)) return true;
  }
  return false;
}

}  // namespace detail

/// Convolution over (N,H,W,C) with "same" padding. Kernel tensor shape is
/// (f, f, in_c, out_c); bias is (out_c).
template <typename S>
int conv2d(Graph<S>& g, int x, int w, int b, int stride) {
  const Tensor<S>& xv = g.val(x);
  const Tensor<S>& wv = g.val(w);
  const Tensor<S>& bv = g.val(b);
  detail::expect(xv.rank() == 4, "conv2d input must be rank-4 (N,H,W,C)");
  detail::expect(wv.rank() == 4 && wv.dim(0) == wv.dim(1),
                 "conv2d kernel must be (f,f,in,out)");
  detail::expect(wv.dim(2) == xv.dim(3), "conv2d kernel in-channels mismatch");
  detail::expect(bv.numel() == wv.dim(3), "conv2d bias size mismatch");

  kernels::ConvGeom geom = kernels::make_conv_geom(xv.dim(0), xv.dim(1), xv.dim(2), xv.dim(3),
                                                   wv.dim(3), wv.dim(0), stride);
  Tensor<S> y({geom.batch, geom.out_h, geom.out_w, geom.out_c});
  const bool needs = detail::any_grad(g, {x, w, b});
  auto cols = std::make_shared<std::vector<S>>(static_cast<size_t>(geom.rows() * geom.cols()));
  kernels::conv_forward(xv.data(), wv.data(), bv.data(), geom, cols->data(), y.data());
  if (!needs) return g.add_op(std::move(y), false, {});

  const int out = g.size();
  auto back = [x, w, b, out, geom, cols](Graph<S>& gg) {
    const Tensor<S>& gy = gg.grad(out);
    if (gg.requires_grad(x)) {
      std::vector<S> gcols(static_cast<size_t>(geom.rows() * geom.cols()));
      kernels::conv_backward_data(gy.data(), gg.val(w).data(), geom, gcols.data(),
                                  gg.grad(x).data());
    }
    if (gg.requires_grad(w) || gg.requires_grad(b)) {
      S* gw = gg.requires_grad(w) ? gg.grad(w).data() : nullptr;
      S* gb = gg.requires_grad(b) ? gg.grad(b).data() : nullptr;
      if (gw != nullptr) {
        kernels::conv_backward_weights(cols->data(), gy.data(), geom, gw, gb);
      } else if (gb != nullptr) {
        const int64_t rows = geom.rows();
        for (int64_t r = 0; r < rows; ++r) {
          const S* gyr = gy.data() + r * geom.out_c;
          for (int c = 0; c < geom.out_c; ++c) gb[c] += gyr[c];
        }
      }
    }
  };
  return g.add_op(std::move(y), true, back);
}

/// Transposed convolution (upsampling by `stride`), the adjoint of conv2d's
/// data path. Kernel tensor shape is (f, f, out_c, in_c); bias is (out_c).
template <typename S>
int tconv2d(Graph<S>& g, int x, int w, int b, int stride) {
  const Tensor<S>& xv = g.val(x);
  const Tensor<S>& wv = g.val(w);
  const Tensor<S>& bv = g.val(b);
  detail::expect(xv.rank() == 4, "tconv2d input must be rank-4 (N,H,W,C)");
  detail::expect(wv.rank() == 4 && wv.dim(0) == wv.dim(1),
                 "tconv2d kernel must be (f,f,out,in)");
  detail::expect(wv.dim(3) == xv.dim(3), "tconv2d kernel in-channels mismatch");
  detail::expect(bv.numel() == wv.dim(2), "tconv2d bias size mismatch");

  const int out_c = wv.dim(2);
  const int out_h = xv.dim(1) * stride;
  const int out_w = xv.dim(2) * stride;
  // Geometry of the underlying down-conv (output space -> input space).
  kernels::ConvGeom geom = kernels::make_conv_geom(xv.dim(0), out_h, out_w, out_c, xv.dim(3),
                                                   wv.dim(0), stride);
  Tensor<S> y({geom.batch, out_h, out_w, out_c});
  {
    std::vector<S> gcols(static_cast<size_t>(geom.rows() * geom.cols()));
    kernels::conv_backward_data(xv.data(), wv.data(), geom, gcols.data(), y.data());
  }
  const S* bias = bv.data();
  const int64_t positions = static_cast<int64_t>(geom.batch) * out_h * out_w;
  for (int64_t p = 0; p < positions; ++p) {
    S* yp = y.data() + p * out_c;
    for (int c = 0; c < out_c; ++c) yp[c] += bias[c];
  }

  const bool needs = detail::any_grad(g, {x, w, b});
  if (!needs) return g.add_op(std::move(y), false, {});

  const int out = g.size();
  auto back = [x, w, b, out, geom, out_c](Graph<S>& gg) {
    const Tensor<S>& gy = gg.grad(out);
    const bool need_x = gg.requires_grad(x);
    const bool need_w = gg.requires_grad(w);
    if (need_x || need_w) {
      std::vector<S> cols(static_cast<size_t>(geom.rows() * geom.cols()));
      kernels::im2col(gy.data(), geom, cols.data());
      if (need_x) {
        kernels::gemm(cols.data(), gg.val(w).data(), gg.grad(x).data(), geom.rows(),
                      geom.cols(), geom.out_c, /*accumulate=*/true);
      }
      if (need_w) {
        kernels::gemm_at(cols.data(), gg.val(x).data(), gg.grad(w).data(), geom.rows(),
                         geom.cols(), geom.out_c, /*accumulate=*/true);
      }
    }
    if (gg.requires_grad(b)) {
      S* gb = gg.grad(b).data();
      const int64_t positions = gy.numel() / out_c;
      for (int64_t p = 0; p < positions; ++p) {
        const S* gyp = gy.data() + p * out_c;
        for (int c = 0; c < out_c; ++c) gb[c] += gyp[c];
      }
    }
  };
  return g.add_op(std::move(y), true, back);
}

/// Fully connected layer: x (N, din) * w (din, dout) + b.
template <typename S>
int dense(Graph<S>& g, int x, int w, int b) {
  const Tensor<S>& xv = g.val(x);
  const Tensor<S>& wv = g.val(w);
  const Tensor<S>& bv = g.val(b);
  detail::expect(xv.rank() == 2 && wv.rank() == 2, "dense expects rank-2 operands");
  detail::expect(xv.dim(1) == wv.dim(0), "dense dimension mismatch: input width " +
                                             std::to_string(xv.dim(1)) + " vs weight rows " +
                                             std::to_string(wv.dim(0)));
  detail::expect(bv.numel() == wv.dim(1), "dense bias size mismatch");
  const int n = xv.dim(0), din = xv.dim(1), dout = wv.dim(1);
  Tensor<S> y({n, dout});
  kernels::gemm(xv.data(), wv.data(), y.data(), n, din, dout);
  for (int r = 0; r < n; ++r) {
    S* yr = y.data() + static_cast<int64_t>(r) * dout;
    for (int c = 0; c < dout; ++c) yr[c] += bv[c];
  }
  if (!detail::any_grad(g, {x, w, b})) return g.add_op(std::move(y), false, {});

  const int out = g.size();
  auto back = [x, w, b, out, n, din, dout](Graph<S>& gg) {
    const Tensor<S>& gy = gg.grad(out);
    if (gg.requires_grad(x)) {
      kernels::gemm_bt(gy.data(), gg.val(w).data(), gg.grad(x).data(), n, dout, din,
                       /*accumulate=*/true);
    }
    if (gg.requires_grad(w)) {
      kernels::gemm_at(gg.val(x).data(), gy.data(), gg.grad(w).data(), n, din, dout,
                       /*accumulate=*/true);
    }
    if (gg.requires_grad(b)) {
      S* gb = gg.grad(b).data();
      for (int r = 0; r < n; ++r) {
        const S* gyr = gy.data() + static_cast<int64_t>(r) * dout;
        for (int c = 0; c < dout; ++c) gb[c] += gyr[c];
      }
    }
  };
  return g.add_op(std::move(y), true, back);
}

/// Generalized divisive normalization (or its inverse) over the trailing
/// channel dimension of a rank-3/4 map. beta (c) must be positive, gamma (c,c)
/// nonnegative.
template <typename S>
int gdn(Graph<S>& g, int x, int beta, int gamma, bool inverse) {
  const Tensor<S>& xv = g.val(x);
  const Tensor<S>& betav = g.val(beta);
  const Tensor<S>& gammav = g.val(gamma);
  detail::expect(xv.rank() >= 3, "gdn expects a feature map");
  const int c = xv.dim(xv.rank() - 1);
  detail::expect(betav.numel() == c, "gdn beta size mismatch");
  detail::expect(gammav.numel() == static_cast<int64_t>(c) * c, "gdn gamma size mismatch");
  for (int64_t i = 0; i < betav.numel(); ++i) {
    if (!(betav[i] > S(0))) throw std::domain_error("gdn beta must be positive");
  }
  const int64_t m = xv.numel() / c;
  Tensor<S> y(xv.shape());
  kernels::gdn_forward(xv.data(), betav.data(), gammav.data(), m, c, inverse, y.data());
  if (!detail::any_grad(g, {x, beta, gamma})) return g.add_op(std::move(y), false, {});

  const int out = g.size();
  auto back = [x, beta, gamma, out, m, c, inverse](Graph<S>& gg) {
    const Tensor<S>& gy = gg.grad(out);
    S* gx = gg.requires_grad(x) ? gg.grad(x).data() : nullptr;
    S* gb = gg.requires_grad(beta) ? gg.grad(beta).data() : nullptr;
    S* gg_ = gg.requires_grad(gamma) ? gg.grad(gamma).data() : nullptr;
    kernels::gdn_backward(gg.val(x).data(), gg.val(beta).data(), gg.val(gamma).data(),
                          gy.data(), m, c, inverse, gx, gb, gg_);
  };
  return g.add_op(std::move(y), true, back);
}

/// PReLU with one learned slope per trailing channel.
template <typename S>
int prelu(Graph<S>& g, int x, int slopes) {
  const Tensor<S>& xv = g.val(x);
  const Tensor<S>& av = g.val(slopes);
  const int c = xv.dim(xv.rank() - 1);
  detail::expect(av.numel() == c, "prelu slope count mismatch");
  Tensor<S> y(xv.shape());
  const int64_t m = xv.numel() / c;
  for (int64_t p = 0; p < m; ++p) {
    const S* xp = xv.data() + p * c;
    S* yp = y.data() + p * c;
    for (int i = 0; i < c; ++i) yp[i] = xp[i] >= S(0) ? xp[i] : av[i] * xp[i];
  }
  if (!detail::any_grad(g, {x, slopes})) return g.add_op(std::move(y), false, {});

  const int out = g.size();
  auto back = [x, slopes, out, m, c](Graph<S>& gg) {
    const Tensor<S>& gy = gg.grad(out);
    const Tensor<S>& xv2 = gg.val(x);
    const Tensor<S>& av2 = gg.val(slopes);
    if (gg.requires_grad(x)) {
      S* gx = gg.grad(x).data();
      for (int64_t p = 0; p < m; ++p) {
        const S* xp = xv2.data() + p * c;
        const S* gyp = gy.data() + p * c;
        S* gxp = gx + p * c;
        for (int i = 0; i < c; ++i) gxp[i] += xp[i] >= S(0) ? gyp[i] : av2[i] * gyp[i];
      }
    }
    if (gg.requires_grad(slopes)) {
      S* ga = gg.grad(slopes).data();
      for (int64_t p = 0; p < m; ++p) {
        const S* xp = xv2.data() + p * c;
        const S* gyp = gy.data() + p * c;
        for (int i = 0; i < c; ++i) {
          if (xp[i] < S(0)) ga[i] += gyp[i] * xp[i];
        }
      }
    }
  };
  return g.add_op(std::move(y), true, back);
}

template <typename S>
int sigmoid(Graph<S>& g, int x) {
  const Tensor<S>& xv = g.val(x);
  Tensor<S> y(xv.shape());
  for (int64_t i = 0; i < xv.numel(); ++i) y[i] = kernels::sigmoid(xv[i]);
  if (!g.requires_grad(x)) return g.add_op(std::move(y), false, {});
  const int out = g.size();
  auto back = [x, out](Graph<S>& gg) {
    const Tensor<S>& gy = gg.grad(out);
    const Tensor<S>& yv = gg.val(out);
    S* gx = gg.grad(x).data();
    for (int64_t i = 0; i < yv.numel(); ++i) gx[i] += gy[i] * yv[i] * (S(1) - yv[i]);
  };
  return g.add_op(std::move(y), true, back);
}

template <typename S>
int relu(Graph<S>& g, int x) {
  const Tensor<S>& xv = g.val(x);
  Tensor<S> y(xv.shape());
  for (int64_t i = 0; i < xv.numel(); ++i) y[i] = xv[i] > S(0) ? xv[i] : S(0);
  if (!g.requires_grad(x)) return g.add_op(std::move(y), false, {});
  const int out = g.size();
  auto back = [x, out](Graph<S>& gg) {
    const Tensor<S>& gy = gg.grad(out);
    const Tensor<S>& xv2 = gg.val(x);
    S* gx = gg.grad(x).data();
    for (int64_t i = 0; i < xv2.numel(); ++i) {
      if (xv2[i] > S(0)) gx[i] += gy[i];
    }
  };
  return g.add_op(std::move(y), true, back);
}

/// softplus(x) + floor, the positive map for GDN parameters.
template <typename S>
int softplus_floor(Graph<S>& g, int x, S floor_value) {
  const Tensor<S>& xv = g.val(x);
  Tensor<S> y(xv.shape());
  for (int64_t i = 0; i < xv.numel(); ++i) y[i] = kernels::softplus_floor(xv[i], floor_value);
  if (!g.requires_grad(x)) return g.add_op(std::move(y), false, {});
  const int out = g.size();
  auto back = [x, out](Graph<S>& gg) {
    const Tensor<S>& gy = gg.grad(out);
    const Tensor<S>& xv2 = gg.val(x);
    S* gx = gg.grad(x).data();
    for (int64_t i = 0; i < xv2.numel(); ++i) gx[i] += gy[i] * kernels::sigmoid(xv2[i]);
  };
  return g.add_op(std::move(y), true, back);
}

/// (N,h,w,c) -> (N,c) spatial mean.
template <typename S>
int global_avg_pool(Graph<S>& g, int x) {
  const Tensor<S>& xv = g.val(x);
  detail::expect(xv.rank() == 4, "global_avg_pool expects (N,H,W,C)");
  const int n = xv.dim(0), h = xv.dim(1), w = xv.dim(2), c = xv.dim(3);
  Tensor<S> y({n, c});
  kernels::global_avg_pool(xv.data(), n, h, w, c, y.data());
  if (!g.requires_grad(x)) return g.add_op(std::move(y), false, {});
  const int out = g.size();
  auto back = [x, out, n, h, w, c](Graph<S>& gg) {
    const Tensor<S>& gy = gg.grad(out);
    S* gx = gg.grad(x).data();
    const S inv = S(1) / static_cast<S>(static_cast<int64_t>(h) * w);
    const int64_t hw = static_cast<int64_t>(h) * w;
    for (int nn = 0; nn < n; ++nn) {
      const S* gyr = gy.data() + static_cast<int64_t>(nn) * c;
      S* gxn = gx + static_cast<int64_t>(nn) * hw * c;
      for (int64_t p = 0; p < hw; ++p) {
        S* gxp = gxn + p * c;
        for (int i = 0; i < c; ++i) gxp[i] += gyr[i] * inv;
      }
    }
  };
  return g.add_op(std::move(y), true, back);
}

/// Column-wise concat of a (N,1) and b (N,c) -> (N,1+c).
template <typename S>
int concat_cols(Graph<S>& g, int a, int b) {
  const Tensor<S>& av = g.val(a);
  const Tensor<S>& bv = g.val(b);
  detail::expect(av.rank() == 2 && bv.rank() == 2 && av.dim(0) == bv.dim(0),
                 "concat_cols row mismatch");
  const int n = av.dim(0), ca = av.dim(1), cb = bv.dim(1);
  Tensor<S> y({n, ca + cb});
  for (int r = 0; r < n; ++r) {
    S* yr = y.data() + static_cast<int64_t>(r) * (ca + cb);
    const S* ar = av.data() + static_cast<int64_t>(r) * ca;
    const S* br = bv.data() + static_cast<int64_t>(r) * cb;
    std::copy(ar, ar + ca, yr);
    std::copy(br, br + cb, yr + ca);
  }
  if (!detail::any_grad(g, {a, b})) return g.add_op(std::move(y), false, {});
  const int out = g.size();
  auto back = [a, b, out, n, ca, cb](Graph<S>& gg) {
    const Tensor<S>& gy = gg.grad(out);
    if (gg.requires_grad(a)) {
      S* ga = gg.grad(a).data();
      for (int r = 0; r < n; ++r) {
        const S* gyr = gy.data() + static_cast<int64_t>(r) * (ca + cb);
        for (int i = 0; i < ca; ++i) ga[static_cast<int64_t>(r) * ca + i] += gyr[i];
      }
    }
    if (gg.requires_grad(b)) {
      S* gb = gg.grad(b).data();
      for (int r = 0; r < n; ++r) {
        const S* gyr = gy.data() + static_cast<int64_t>(r) * (ca + cb);
        for (int i = 0; i < cb; ++i) gb[static_cast<int64_t>(r) * cb + i] += gyr[ca + i];
      }
    }
  };
  return g.add_op(std::move(y), true, back);
}

/// Channel-wise recalibration: x (N,h,w,c) scaled by s (N,c).
template <typename S>
int scale_channels(Graph<S>& g, int x, int s) {
  const Tensor<S>& xv = g.val(x);
  const Tensor<S>& sv = g.val(s);
  detail::expect(xv.rank() == 4 && sv.rank() == 2, "scale_channels expects map and (N,c)");
  detail::expect(xv.dim(0) == sv.dim(0) && xv.dim(3) == sv.dim(1),
                 "scale_channels length mismatch");
  const int n = xv.dim(0), c = xv.dim(3);
  const int64_t hw = static_cast<int64_t>(xv.dim(1)) * xv.dim(2);
  Tensor<S> y(xv.shape());
  for (int nn = 0; nn < n; ++nn) {
    const S* sr = sv.data() + static_cast<int64_t>(nn) * c;
    const S* xn = xv.data() + static_cast<int64_t>(nn) * hw * c;
    S* yn = y.data() + static_cast<int64_t>(nn) * hw * c;
    for (int64_t p = 0; p < hw; ++p) {
      for (int i = 0; i < c; ++i) yn[p * c + i] = xn[p * c + i] * sr[i];
    }
  }
  if (!detail::any_grad(g, {x, s})) return g.add_op(std::move(y), false, {});
  const int out = g.size();
  auto back = [x, s, out, n, c, hw](Graph<S>& gg) {
    const Tensor<S>& gy = gg.grad(out);
    const Tensor<S>& xv2 = gg.val(x);
    const Tensor<S>& sv2 = gg.val(s);
    if (gg.requires_grad(x)) {
      S* gx = gg.grad(x).data();
      for (int nn = 0; nn < n; ++nn) {
        const S* sr = sv2.data() + static_cast<int64_t>(nn) * c;
        const S* gyn = gy.data() + static_cast<int64_t>(nn) * hw * c;
        S* gxn = gx + static_cast<int64_t>(nn) * hw * c;
        for (int64_t p = 0; p < hw; ++p) {
          for (int i = 0; i < c; ++i) gxn[p * c + i] += gyn[p * c + i] * sr[i];
        }
      }
    }
    if (gg.requires_grad(s)) {
      S* gs = gg.grad(s).data();
      for (int nn = 0; nn < n; ++nn) {
        const S* xn = xv2.data() + static_cast<int64_t>(nn) * hw * c;
        const S* gyn = gy.data() + static_cast<int64_t>(nn) * hw * c;
        S* gsr = gs + static_cast<int64_t>(nn) * c;
        for (int64_t p = 0; p < hw; ++p) {
          for (int i = 0; i < c; ++i) gsr[i] += gyn[p * c + i] * xn[p * c + i];
        }
      }
    }
  };
  return g.add_op(std::move(y), true, back);
}

/// Per-row power normalization of packed real symbol blocks (N, 2k).
template <typename S>
int power_normalize_rows(Graph<S>& g, int x) {
  const Tensor<S>& xv = g.val(x);
  detail::expect(xv.rank() == 2, "power_normalize_rows expects (N, 2k)");
  detail::expect(xv.dim(1) % 2 == 0, "odd real dimension");
  const int n = xv.dim(0);
  const int64_t len = xv.dim(1);
  Tensor<S> y(xv.shape());
  auto scales = std::make_shared<std::vector<S>>(static_cast<size_t>(n));
  kernels::power_normalize_rows(xv.data(), n, len, y.data(), scales->data());
  if (!g.requires_grad(x)) return g.add_op(std::move(y), false, {});
  const int out = g.size();
  auto back = [x, out, n, len, scales](Graph<S>& gg) {
    const Tensor<S>& gy = gg.grad(out);
    const Tensor<S>& xv2 = gg.val(x);
    S* gx = gg.grad(x).data();
    const S k = static_cast<S>(len / 2);
    for (int r = 0; r < n; ++r) {
      const S* xr = xv2.data() + static_cast<int64_t>(r) * len;
      const S* gyr = gy.data() + static_cast<int64_t>(r) * len;
      S* gxr = gx + static_cast<int64_t>(r) * len;
      const S scale = (*scales)[static_cast<size_t>(r)];
      const S sumsq = k / (scale * scale);
      S dot = S(0);
      for (int64_t i = 0; i < len; ++i) dot += gyr[i] * xr[i];
      const S coef = dot / sumsq;
      for (int64_t i = 0; i < len; ++i) gxr[i] += scale * (gyr[i] - xr[i] * coef);
    }
  };
  return g.add_op(std::move(y), true, back);
}

/// y = x + n where n is a fixed tensor (channel noise); gradient passes through.
template <typename S>
int add_constant(Graph<S>& g, int x, const Tensor<S>& n) {
  const Tensor<S>& xv = g.val(x);
  detail::expect(xv.same_shape(n), "add_constant shape mismatch");
  Tensor<S> y(xv.shape());
  for (int64_t i = 0; i < xv.numel(); ++i) y[i] = xv[i] + n[i];
  if (!g.requires_grad(x)) return g.add_op(std::move(y), false, {});
  const int out = g.size();
  auto back = [x, out](Graph<S>& gg) {
    const Tensor<S>& gy = gg.grad(out);
    S* gx = gg.grad(x).data();
    for (int64_t i = 0; i < gy.numel(); ++i) gx[i] += gy[i];
  };
  return g.add_op(std::move(y), true, back);
}

template <typename S>
int reshape(Graph<S>& g, int x, std::vector<int> shape) {
  Tensor<S> y = g.val(x).reshaped(std::move(shape));
  if (!g.requires_grad(x)) return g.add_op(std::move(y), false, {});
  const int out = g.size();
  auto back = [x, out](Graph<S>& gg) {
    const Tensor<S>& gy = gg.grad(out);
    S* gx = gg.grad(x).data();
    for (int64_t i = 0; i < gy.numel(); ++i) gx[i] += gy[i];
  };
  return g.add_op(std::move(y), true, back);
}

/// Scalar node: mean squared error against a fixed target.
template <typename S>
int mse_against(Graph<S>& g, int x, const Tensor<S>& target) {
  const Tensor<S>& xv = g.val(x);
  detail::expect(xv.same_shape(target), "mse shape mismatch");
  const int64_t n = xv.numel();
  S acc = S(0);
  for (int64_t i = 0; i < n; ++i) {
    const S d = xv[i] - target[i];
    acc += d * d;
  }
  Tensor<S> y({1});
  y[0] = acc / static_cast<S>(n);
  if (!g.requires_grad(x)) return g.add_op(std::move(y), false, {});
  auto tgt = std::make_shared<Tensor<S>>(target);
  const int out = g.size();
  auto back = [x, out, tgt, n](Graph<S>& gg) {
    const S gy = gg.grad(out)[0];
    const Tensor<S>& xv2 = gg.val(x);
    S* gx = gg.grad(x).data();
    const S coef = gy * S(2) / static_cast<S>(n);
    for (int64_t i = 0; i < n; ++i) gx[i] += coef * (xv2[i] - (*tgt)[i]);
  };
  return g.add_op(std::move(y), true, back);
}

}  // namespace ops
}  // namespace jscc

#endif  // JSCC_OPS_HPP_
