#ifndef JSCC_KERNELS_HPP_
#define JSCC_KERNELS_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "jscc/tensor.hpp"

namespace jscc {
namespace kernels {

template <typename S>
using MatMap = Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename S>
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

/// y[m x n] = x[m x k] * w[k x n], all row-major.
template <typename S>
void gemm(const S* x, const S* w, S* y, int64_t m, int64_t k, int64_t n,
          bool accumulate = false) {
  ConstMatMap<S> X(x, m, k);
  ConstMatMap<S> W(w, k, n);
  MatMap<S> Y(y, m, n);
  if (accumulate) {
    Y.noalias() += X * W;
  } else {
    Y.noalias() = X * W;
  }
}

/// y[m x n] = x[m x k] * w[n x k]^T.
template <typename S>
void gemm_bt(const S* x, const S* w, S* y, int64_t m, int64_t k, int64_t n,
             bool accumulate = false) {
  ConstMatMap<S> X(x, m, k);
  ConstMatMap<S> W(w, n, k);
  MatMap<S> Y(y, m, n);
  if (accumulate) {
    Y.noalias() += X * W.transpose();
  } else {
    Y.noalias() = X * W.transpose();
  }
}

/// y[k x n] = x[m x k]^T * g[m x n].
template <typename S>
void gemm_at(const S* x, const S* g, S* y, int64_t m, int64_t k, int64_t n,
             bool accumulate = false) {
  ConstMatMap<S> X(x, m, k);
  ConstMatMap<S> G(g, m, n);
  MatMap<S> Y(y, k, n);
  if (accumulate) {
    Y.noalias() += X.transpose() * G;
  } else {
    Y.noalias() = X.transpose() * G;
  }
}

// ---------------------------------------------------------------------------
// Convolution. Feature maps are (N, H, W, C) row-major; kernels are flattened
// row-major (f*f*in_c, out_c). Padding follows the "same" rule: with stride s
// and an input extent divisible by s the output extent is exactly in/s, and
// pad_total = max((out-1)*s + f - in, 0) split as floor(total/2) before.
// ---------------------------------------------------------------------------

struct ConvGeom {
  int batch = 0;
  int in_h = 0, in_w = 0, in_c = 0;
  int out_h = 0, out_w = 0, out_c = 0;
  int f = 0, stride = 0;
  int pad_top = 0, pad_left = 0;

  int64_t rows() const { return static_cast<int64_t>(batch) * out_h * out_w; }
  int64_t cols() const { return static_cast<int64_t>(f) * f * in_c; }
};

inline ConvGeom make_conv_geom(int batch, int in_h, int in_w, int in_c, int out_c, int f,
                               int stride) {
  if (stride < 1 || f < 1) throw std::invalid_argument("bad conv descriptor");
  if (in_h % stride != 0 || in_w % stride != 0) {
    throw std::invalid_argument("spatial size " + std::to_string(in_h) + "x" +
                                std::to_string(in_w) + " must be a multiple of " +
                                std::to_string(stride));
  }
  ConvGeom g;
  g.batch = batch;
  g.in_h = in_h;
  g.in_w = in_w;
  g.in_c = in_c;
  g.out_h = in_h / stride;
  g.out_w = in_w / stride;
  g.out_c = out_c;
  g.f = f;
  g.stride = stride;
  int pad_h = std::max((g.out_h - 1) * stride + f - in_h, 0);
  int pad_w = std::max((g.out_w - 1) * stride + f - in_w, 0);
  g.pad_top = pad_h / 2;
  g.pad_left = pad_w / 2;
  return g;
}

/// Expands x (N,H,W,C) into patch rows (N*out_h*out_w, f*f*C).
template <typename S>
void im2col(const S* x, const ConvGeom& g, S* cols) {
  const int64_t row_len = g.cols();
  for (int n = 0; n < g.batch; ++n) {
    const S* xn = x + static_cast<int64_t>(n) * g.in_h * g.in_w * g.in_c;
    for (int oy = 0; oy < g.out_h; ++oy) {
      for (int ox = 0; ox < g.out_w; ++ox) {
        S* row = cols + ((static_cast<int64_t>(n) * g.out_h + oy) * g.out_w + ox) * row_len;
        for (int ky = 0; ky < g.f; ++ky) {
          const int iy = oy * g.stride + ky - g.pad_top;
          S* dst = row + static_cast<int64_t>(ky) * g.f * g.in_c;
          if (iy < 0 || iy >= g.in_h) {
            std::memset(dst, 0, sizeof(S) * static_cast<size_t>(g.f) * g.in_c);
            continue;
          }
          for (int kx = 0; kx < g.f; ++kx) {
            const int ix = ox * g.stride + kx - g.pad_left;
            S* cell = dst + static_cast<int64_t>(kx) * g.in_c;
            if (ix < 0 || ix >= g.in_w) {
              std::memset(cell, 0, sizeof(S) * static_cast<size_t>(g.in_c));
            } else {
              std::memcpy(cell, xn + (static_cast<int64_t>(iy) * g.in_w + ix) * g.in_c,
                          sizeof(S) * static_cast<size_t>(g.in_c));
            }
          }
        }
      }
    }
  }
}

/// Adjoint of im2col: accumulates patch rows back into x-space. x must be
/// zero-initialized by the caller.
template <typename S>
void col2im(const S* cols, const ConvGeom& g, S* x) {
  const int64_t row_len = g.cols();
  for (int n = 0; n < g.batch; ++n) {
    S* xn = x + static_cast<int64_t>(n) * g.in_h * g.in_w * g.in_c;
    for (int oy = 0; oy < g.out_h; ++oy) {
      for (int ox = 0; ox < g.out_w; ++ox) {
        const S* row =
            cols + ((static_cast<int64_t>(n) * g.out_h + oy) * g.out_w + ox) * row_len;
        for (int ky = 0; ky < g.f; ++ky) {
          const int iy = oy * g.stride + ky - g.pad_top;
          if (iy < 0 || iy >= g.in_h) continue;
          for (int kx = 0; kx < g.f; ++kx) {
            const int ix = ox * g.stride + kx - g.pad_left;
            if (ix < 0 || ix >= g.in_w) continue;
            const S* cell = row + (static_cast<int64_t>(ky) * g.f + kx) * g.in_c;
            S* dst = xn + (static_cast<int64_t>(iy) * g.in_w + ix) * g.in_c;
            for (int c = 0; c < g.in_c; ++c) dst[c] += cell[c];
          }
        }
      }
    }
  }
}

/// y (N,oh,ow,out_c) = conv(x, w) + b. `cols` is caller-provided scratch of
/// size rows()*cols() (it is also what the weight-gradient pass needs).
template <typename S>
void conv_forward(const S* x, const S* w, const S* b, const ConvGeom& g, S* cols, S* y) {
  im2col(x, g, cols);
  gemm(cols, w, y, g.rows(), g.cols(), g.out_c);
  if (b != nullptr) {
    const int64_t rows = g.rows();
    for (int64_t r = 0; r < rows; ++r) {
      S* yr = y + r * g.out_c;
      for (int c = 0; c < g.out_c; ++c) yr[c] += b[c];
    }
  }
}

/// gx = adjoint-data of conv: gx gets gy * w^T scattered through col2im.
/// gx must be zero-initialized, gcols is scratch of size rows()*cols().
template <typename S>
void conv_backward_data(const S* gy, const S* w, const ConvGeom& g, S* gcols, S* gx) {
  gemm_bt(gy, w, gcols, g.rows(), g.out_c, g.cols());
  col2im(gcols, g, gx);
}

/// gw += cols^T * gy ; gb += column sums of gy.
template <typename S>
void conv_backward_weights(const S* cols, const S* gy, const ConvGeom& g, S* gw, S* gb) {
  gemm_at(cols, gy, gw, g.rows(), g.cols(), g.out_c, /*accumulate=*/true);
  if (gb != nullptr) {
    const int64_t rows = g.rows();
    for (int64_t r = 0; r < rows; ++r) {
      const S* gyr = gy + r * g.out_c;
      for (int c = 0; c < g.out_c; ++c) gb[c] += gyr[c];
    }
  }
}

// ---------------------------------------------------------------------------
// GDN: y_i(p) = x_i(p) / sqrt(beta_i + sum_j gamma_ij x_j(p)^2); the inverse
// form multiplies instead of divides. Positions are treated as rows (m, c).
// ---------------------------------------------------------------------------

/// d (m,c): d[p,i] = beta[i] + sum_j gamma[i*c+j] * x[p,j]^2. x2 is scratch (m,c).
template <typename S>
void gdn_denominator(const S* x, const S* beta, const S* gamma, int64_t m, int c, S* x2,
                     S* d) {
  for (int64_t i = 0; i < m * c; ++i) x2[i] = x[i] * x[i];
  gemm_bt(x2, gamma, d, m, c, c);  // d[p,i] = sum_j x2[p,j] * gamma[i,j]
  for (int64_t p = 0; p < m; ++p) {
    S* dp = d + p * c;
    for (int i = 0; i < c; ++i) dp[i] += beta[i];
  }
}

template <typename S>
void gdn_forward(const S* x, const S* beta, const S* gamma, int64_t m, int c, bool inverse,
                 S* y) {
  std::vector<S> x2(static_cast<size_t>(m) * c);
  std::vector<S> d(static_cast<size_t>(m) * c);
  gdn_denominator(x, beta, gamma, m, c, x2.data(), d.data());
  if (inverse) {
    for (int64_t i = 0; i < m * c; ++i) y[i] = x[i] * std::sqrt(d[i]);
  } else {
    for (int64_t i = 0; i < m * c; ++i) y[i] = x[i] / std::sqrt(d[i]);
  }
}

/// Reverse-mode pass for (i)GDN. Accumulates into gx, gbeta, ggamma; any of
/// them may be null when the corresponding input needs no gradient.
template <typename S>
void gdn_backward(const S* x, const S* beta, const S* gamma, const S* gy, int64_t m, int c,
                  bool inverse, S* gx, S* gbeta, S* ggamma) {
  std::vector<S> x2(static_cast<size_t>(m) * c);
  std::vector<S> d(static_cast<size_t>(m) * c);
  gdn_denominator(x, beta, gamma, m, c, x2.data(), d.data());

  // u[p,i] = gy * x * d^(-3/2) (direct) or gy * x * d^(-1/2) (inverse);
  // the sign/scale of the parameter gradients flips between the two forms.
  std::vector<S> u(static_cast<size_t>(m) * c);
  const S half = S(0.5);
  if (inverse) {
    for (int64_t i = 0; i < m * c; ++i) u[i] = gy[i] * x[i] / std::sqrt(d[i]);
  } else {
    for (int64_t i = 0; i < m * c; ++i) {
      const S sd = std::sqrt(d[i]);
      u[i] = gy[i] * x[i] / (d[i] * sd);
    }
  }
  const S param_sign = inverse ? half : -half;
  if (gbeta != nullptr) {
    for (int64_t p = 0; p < m; ++p) {
      const S* up = u.data() + p * c;
      for (int i = 0; i < c; ++i) gbeta[i] += param_sign * up[i];
    }
  }
  if (ggamma != nullptr) {
    // ggamma[i,j] += sign * sum_p u[p,i] * x2[p,j]
    std::vector<S> gg(static_cast<size_t>(c) * c);
    gemm_at(u.data(), x2.data(), gg.data(), m, c, c);
    for (int64_t i = 0; i < static_cast<int64_t>(c) * c; ++i)
      ggamma[i] += param_sign * gg[i];
  }
  if (gx != nullptr) {
    // v[p,j] = sum_i u[p,i] * gamma[i,j]
    std::vector<S> v(static_cast<size_t>(m) * c);
    gemm(u.data(), gamma, v.data(), m, c, c);
    if (inverse) {
      for (int64_t i = 0; i < m * c; ++i) gx[i] += gy[i] * std::sqrt(d[i]) + x[i] * v[i];
    } else {
      for (int64_t i = 0; i < m * c; ++i) gx[i] += gy[i] / std::sqrt(d[i]) - x[i] * v[i];
    }
  }
}

// ---------------------------------------------------------------------------
// Elementwise and reduction helpers.
// ---------------------------------------------------------------------------

template <typename S>
S sigmoid(S v) {
  if (v >= S(0)) {
    return S(1) / (S(1) + std::exp(-v));
  }
  const S e = std::exp(v);
  return e / (S(1) + e);
}

/// softplus(v) + floor, the positive reparameterization used for GDN weights.
template <typename S>
S softplus_floor(S v, S floor_value) {
  const S sp = v > S(0) ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
  return sp + floor_value;
}

/// Inverse of softplus_floor for initialization targets.
template <typename S>
S softplus_floor_inverse(S target, S floor_value) {
  const S t = target - floor_value;
  // log(e^t - 1), stabilized for large t.
  return t > S(20) ? t : std::log(std::expm1(t));
}

/// Mean over the h*w extent of each channel: x (N,h,w,c) -> y (N,c).
template <typename S>
void global_avg_pool(const S* x, int batch, int h, int w, int c, S* y) {
  const int64_t hw = static_cast<int64_t>(h) * w;
  for (int n = 0; n < batch; ++n) {
    const S* xn = x + static_cast<int64_t>(n) * hw * c;
    S* yn = y + static_cast<int64_t>(n) * c;
    for (int i = 0; i < c; ++i) yn[i] = S(0);
    for (int64_t p = 0; p < hw; ++p) {
      const S* xp = xn + p * c;
      for (int i = 0; i < c; ++i) yn[i] += xp[i];
    }
    const S inv = S(1) / static_cast<S>(hw);
    for (int i = 0; i < c; ++i) yn[i] *= inv;
  }
}

/// Per-row power scaling: row r of x (rows, len) times sqrt((len/2) / sum x^2),
/// which makes the average complex-symbol power exactly one when the row packs
/// len/2 complex symbols. Returns the per-row scales through `scales`.
template <typename S>
void power_normalize_rows(const S* x, int64_t rows, int64_t len, S* y, S* scales) {
  const S k = static_cast<S>(len / 2);
  for (int64_t r = 0; r < rows; ++r) {
    const S* xr = x + r * len;
    S* yr = y + r * len;
    S sumsq = S(0);
    for (int64_t i = 0; i < len; ++i) sumsq += xr[i] * xr[i];
    if (!(sumsq > S(0))) {
      throw std::domain_error("zero-power block");
    }
    const S scale = std::sqrt(k / sumsq);
    for (int64_t i = 0; i < len; ++i) yr[i] = xr[i] * scale;
    if (scales != nullptr) scales[r] = scale;
  }
}

}  // namespace kernels
}  // namespace jscc

#endif  // JSCC_KERNELS_HPP_
