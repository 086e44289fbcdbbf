#ifndef JSCC_ATTENTION_HPP_
#define JSCC_ATTENTION_HPP_

#include <stdexcept>
#include <vector>

#include "jscc/graph.hpp"
#include "jscc/kernels.hpp"
#include "jscc/ops.hpp"
#include "jscc/tensor.hpp"

namespace jscc {
namespace attention {

/// Factor-prediction weights of one AF module: a two-layer fully connected
/// network mapping the (c+1) context vector to c scaling factors.
template <typename S>
struct AFParams {
  Tensor<S> w1;  // (c+1, m)
  Tensor<S> b1;  // (m)
  Tensor<S> w2;  // (m, c)
  Tensor<S> b2;  // (c)

  static AFParams zeros(int c, int m) {
    AFParams p;
    p.w1 = Tensor<S>({c + 1, m});
    p.b1 = Tensor<S>({m});
    p.w2 = Tensor<S>({m, c});
    p.b2 = Tensor<S>({c});
    return p;
  }

  int channels() const { return w2.dim(1); }
  int hidden() const { return w1.dim(1); }
};

/// Spatial mean per channel of an (h,w,c) map.
template <typename S>
std::vector<S> global_average_pool(const Tensor<S>& f) {
  if (f.rank() != 3) throw std::invalid_argument("feature map must be (h,w,c)");
  const int c = f.dim(2);
  std::vector<S> pooled(static_cast<size_t>(c));
  kernels::global_avg_pool(f.data(), 1, f.dim(0), f.dim(1), c, pooled.data());
  return pooled;
}

/// Context layout: [snr_db, pooled_1, ..., pooled_c].
template <typename S>
std::vector<S> build_context(const std::vector<S>& pooled, S snr_db) {
  if (pooled.empty()) throw std::invalid_argument("context requires c >= 1 pooled values");
  std::vector<S> ctx;
  ctx.reserve(pooled.size() + 1);
  ctx.push_back(snr_db);
  ctx.insert(ctx.end(), pooled.begin(), pooled.end());
  return ctx;
}

/// sigmoid(w2 * relu(w1 * ctx + b1) + b2), every factor strictly in (0,1).
template <typename S>
std::vector<S> predict_factors(const std::vector<S>& ctx, const AFParams<S>& params) {
  const int cin = params.w1.dim(0);
  const int m = params.w1.dim(1);
  const int c = params.w2.dim(1);
  if (static_cast<int>(ctx.size()) != cin) {
    throw std::invalid_argument("context length " + std::to_string(ctx.size()) +
                                " does not match factor network input " + std::to_string(cin));
  }
  if (params.w2.dim(0) != m || params.b1.numel() != m || params.b2.numel() != c) {
    throw std::invalid_argument("factor network weight shapes disagree");
  }
  std::vector<S> hidden(static_cast<size_t>(m));
  kernels::gemm(ctx.data(), params.w1.data(), hidden.data(), 1, cin, m);
  for (int i = 0; i < m; ++i) {
    hidden[static_cast<size_t>(i)] += params.b1[i];
    if (hidden[static_cast<size_t>(i)] < S(0)) hidden[static_cast<size_t>(i)] = S(0);
  }
  std::vector<S> factors(static_cast<size_t>(c));
  kernels::gemm(hidden.data(), params.w2.data(), factors.data(), 1, m, c);
  for (int i = 0; i < c; ++i) {
    factors[static_cast<size_t>(i)] = kernels::sigmoid(factors[static_cast<size_t>(i)] + params.b2[i]);
  }
  return factors;
}

/// Channel-wise product F^A_i = S_i * F^G_i.
template <typename S>
Tensor<S> recalibrate(const Tensor<S>& f, const std::vector<S>& factors) {
  if (f.rank() != 3) throw std::invalid_argument("feature map must be (h,w,c)");
  const int c = f.dim(2);
  if (static_cast<int>(factors.size()) != c) {
    throw std::invalid_argument("factor count does not match feature channels");
  }
  Tensor<S> out(f.shape());
  const int64_t hw = static_cast<int64_t>(f.dim(0)) * f.dim(1);
  for (int64_t p = 0; p < hw; ++p) {
    const S* fp = f.data() + p * c;
    S* op = out.data() + p * c;
    for (int i = 0; i < c; ++i) op[i] = fp[i] * factors[static_cast<size_t>(i)];
  }
  return out;
}

/// The full AF module: pool, concat SNR, predict factors, recalibrate.
template <typename S>
Tensor<S> af_forward(const Tensor<S>& f, S snr_db, const AFParams<S>& params) {
  return recalibrate(f, predict_factors(build_context(global_average_pool(f), snr_db), params));
}

/// Graph node ids produced by one AF application; `factors` is exposed for
/// scaling-factor introspection and `output` is the recalibrated map.
struct AfNodes {
  int factors = -1;
  int output = -1;
};

/// Differentiable AF module over a batched map x (N,h,w,c) with per-example
/// SNR column snr (N,1). Parameter ids index graph leaves for w1,b1,w2,b2.
template <typename S>
AfNodes af_forward_graph(Graph<S>& g, int x, int snr, int w1, int b1, int w2, int b2) {
  const int pooled = ops::global_avg_pool(g, x);
  const int ctx = ops::concat_cols(g, snr, pooled);
  const int h1 = ops::relu(g, ops::dense(g, ctx, w1, b1));
  const int factors = ops::sigmoid(g, ops::dense(g, h1, w2, b2));
  AfNodes nodes;
  nodes.factors = factors;
  nodes.output = ops::scale_channels(g, x, factors);
  return nodes;
}

}  // namespace attention
}  // namespace jscc

#endif  // JSCC_ATTENTION_HPP_
