#ifndef JSCC_CODEC_HPP_
#define JSCC_CODEC_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "jscc/attention.hpp"
#include "jscc/graph.hpp"
#include "jscc/ops.hpp"
#include "jscc/ratio.hpp"
#include "jscc/rng.hpp"
#include "jscc/tensor.hpp"

namespace jscc {
namespace codec {

enum class Activation { prelu, sigmoid, none };

/// One feature-learning layer: convolution (down) or transposed convolution
/// (up), each followed by GDN (IGDN on the up side) and its activation.
struct FlLayerSpec {
  int kernel = 5;
  int filters = 32;
  int stride = 1;
  bool up = false;
  Activation act = Activation::prelu;
};

/// Declarative layer stack for the encoder/decoder pair. The last down layer
/// always carries `output_channels` filters; that channel count is what sets
/// the bandwidth ratio.
struct ArchSpec {
  std::vector<FlLayerSpec> fl_layers;
  bool use_attention = true;
  int output_channels = 16;
  int af_hidden_width = 0;  // 0: each AF module uses m = its channel count
  int input_channels = 3;

  std::vector<FlLayerSpec> encoder_layers() const;
  std::vector<FlLayerSpec> decoder_layers() const;
  int encoder_stride_product() const;

  /// Throws std::invalid_argument when structural invariants are violated.
  void validate() const;

  std::string serialize() const;
  static ArchSpec parse(const std::string& text);
  uint64_t hash() const { return hash_bytes64(serialize()); }

  bool operator==(const ArchSpec& o) const { return serialize() == o.serialize(); }
};

/// Named presets: "paper-cifar" (widths 256, AF hidden 16) and "tiny"
/// (widths 32) share the structure of five down and five up modules with a
/// total stride of four on each side.
ArchSpec make_preset(const std::string& name, int output_channels);

/// R = k/n.
inline Ratio bandwidth_ratio(int64_t n, int64_t k) {
  if (n <= 0 || k <= 0) throw std::invalid_argument("bandwidth_ratio needs positive n, k");
  return Ratio(k, n);
}

/// Channel count of the last encoder conv that realizes ratio R with images
/// of C channels and a given total stride: c = 2*R*C*stride^2.
inline int channels_for_ratio(const Ratio& r, int height, int width, int image_channels,
                              int total_stride) {
  (void)height;
  (void)width;
  const int64_t num = 2 * r.num * image_channels * total_stride * total_stride;
  if (num % r.den != 0 || num / r.den <= 0) {
    throw std::invalid_argument("ratio unreachable with this architecture: c = " +
                                std::to_string(static_cast<double>(num) / r.den));
  }
  return static_cast<int>(num / r.den);
}

/// Encoder/decoder parameters, stored as named tensors in a stable order.
/// GDN beta/gamma are kept as unconstrained values and pass through
/// softplus(x) + 1e-6 ahead of the normalization itself.
template <typename S>
struct Model {
  struct FlParamIdx {
    int w = -1, b = -1;
    int gdn_beta = -1, gdn_gamma = -1;
    int prelu = -1;  // -1 when the layer has no PReLU
  };
  struct AfParamIdx {
    int w1 = -1, b1 = -1, w2 = -1, b2 = -1;
    int channels = 0;
  };

  ArchSpec arch;
  std::vector<std::string> names;
  std::vector<Tensor<S>> values;
  std::vector<FlParamIdx> enc_fl, dec_fl;
  std::vector<AfParamIdx> enc_af, dec_af;

  int64_t parameter_count() const {
    int64_t n = 0;
    for (const auto& t : values) n += t.numel();
    return n;
  }
};

constexpr double kGdnFloor = 1e-6;

namespace detail {

template <typename S>
int add_param(Model<S>& m, const std::string& name, Tensor<S> t) {
  m.names.push_back(name);
  m.values.push_back(std::move(t));
  return static_cast<int>(m.values.size()) - 1;
}

}  // namespace detail

/// Builds the parameter set (all zeros) for an architecture.
template <typename S>
Model<S> build_model(const ArchSpec& arch) {
  arch.validate();
  Model<S> m;
  m.arch = arch;
  auto add_fl = [&m](const std::string& prefix, const FlLayerSpec& layer, int in_c) {
    typename Model<S>::FlParamIdx idx;
    if (layer.up) {
      idx.w = detail::add_param(m, prefix + ".tconv.w",
                                Tensor<S>({layer.kernel, layer.kernel, layer.filters, in_c}));
    } else {
      idx.w = detail::add_param(m, prefix + ".conv.w",
                                Tensor<S>({layer.kernel, layer.kernel, in_c, layer.filters}));
    }
    idx.b = detail::add_param(m, prefix + ".conv.b", Tensor<S>({layer.filters}));
    idx.gdn_beta = detail::add_param(m, prefix + ".gdn.beta", Tensor<S>({layer.filters}));
    idx.gdn_gamma =
        detail::add_param(m, prefix + ".gdn.gamma", Tensor<S>({layer.filters, layer.filters}));
    if (layer.act == Activation::prelu) {
      idx.prelu = detail::add_param(m, prefix + ".prelu.a", Tensor<S>({layer.filters}));
    }
    return idx;
  };
  auto add_af = [&m, &arch](const std::string& prefix, int c) {
    typename Model<S>::AfParamIdx idx;
    const int hidden = arch.af_hidden_width > 0 ? arch.af_hidden_width : c;
    idx.w1 = detail::add_param(m, prefix + ".w1", Tensor<S>({c + 1, hidden}));
    idx.b1 = detail::add_param(m, prefix + ".b1", Tensor<S>({hidden}));
    idx.w2 = detail::add_param(m, prefix + ".w2", Tensor<S>({hidden, c}));
    idx.b2 = detail::add_param(m, prefix + ".b2", Tensor<S>({c}));
    idx.channels = c;
    return idx;
  };

  const auto enc = arch.encoder_layers();
  int in_c = arch.input_channels;
  for (size_t i = 0; i < enc.size(); ++i) {
    m.enc_fl.push_back(add_fl("enc.fl" + std::to_string(i), enc[i], in_c));
    in_c = enc[i].filters;
    if (arch.use_attention && i + 1 < enc.size()) {
      m.enc_af.push_back(add_af("enc.af" + std::to_string(i), in_c));
    }
  }
  const auto dec = arch.decoder_layers();
  for (size_t i = 0; i < dec.size(); ++i) {
    m.dec_fl.push_back(add_fl("dec.fl" + std::to_string(i), dec[i], in_c));
    in_c = dec[i].filters;
    if (arch.use_attention && i + 1 < dec.size()) {
      m.dec_af.push_back(add_af("dec.af" + std::to_string(i), in_c));
    }
  }
  return m;
}

/// Glorot-uniform weights, zero biases, PReLU slopes 0.25, GDN raw values
/// chosen so the mapped beta starts at 1 and gamma near 0.1 on the diagonal.
template <typename S>
void init_params(Model<S>& m, uint64_t seed) {
  RngStream stream = derive_stream(seed, "param-init");
  const S beta_raw = static_cast<S>(
      kernels::softplus_floor_inverse(1.0, kGdnFloor));
  const S gamma_diag_raw = static_cast<S>(kernels::softplus_floor_inverse(0.1, kGdnFloor));
  const S gamma_off_raw = static_cast<S>(kernels::softplus_floor_inverse(1e-4, kGdnFloor));

  for (size_t i = 0; i < m.values.size(); ++i) {
    Tensor<S>& t = m.values[i];
    const std::string& name = m.names[i];
    const bool is_weight = name.ends_with(".w") || name.ends_with(".w1") || name.ends_with(".w2");
    if (is_weight) {
      int64_t fan_in = 1, fan_out = 1;
      if (t.rank() == 4) {
        const bool up = name.find(".tconv.") != std::string::npos;
        const int64_t taps = static_cast<int64_t>(t.dim(0)) * t.dim(1);
        // conv kernels are (f,f,in,out); tconv kernels are (f,f,out,in).
        fan_in = taps * (up ? t.dim(3) : t.dim(2));
        fan_out = taps * (up ? t.dim(2) : t.dim(3));
      } else {
        fan_in = t.dim(0);
        fan_out = t.dim(1);
      }
      const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      for (int64_t j = 0; j < t.numel(); ++j) {
        t[j] = static_cast<S>(stream.uniform(-limit, limit));
      }
    } else if (name.ends_with(".gdn.beta")) {
      std::fill(t.vec().begin(), t.vec().end(), beta_raw);
    } else if (name.ends_with(".gdn.gamma")) {
      const int c = t.dim(0);
      for (int r = 0; r < c; ++r) {
        for (int q = 0; q < c; ++q) t.at(r, q) = r == q ? gamma_diag_raw : gamma_off_raw;
      }
    } else if (name.ends_with(".prelu.a")) {
      std::fill(t.vec().begin(), t.vec().end(), static_cast<S>(0.25));
    } else {
      std::fill(t.vec().begin(), t.vec().end(), S(0));
    }
  }
}

/// Per-graph leaf ids for every model parameter, in model order.
struct ParamNodes {
  std::vector<int> ids;
};

template <typename S>
ParamNodes add_param_leaves(Graph<S>& g, const Model<S>& m, bool requires_grad) {
  ParamNodes nodes;
  nodes.ids.reserve(m.values.size());
  for (const auto& t : m.values) nodes.ids.push_back(g.add_leaf_ref(&t, requires_grad));
  return nodes;
}

namespace detail {

template <typename S>
int fl_forward_graph(Graph<S>& g, int x, const FlLayerSpec& layer,
                     const typename Model<S>::FlParamIdx& idx, const ParamNodes& p) {
  int cur = layer.up ? ops::tconv2d(g, x, p.ids[idx.w], p.ids[idx.b], layer.stride)
                     : ops::conv2d(g, x, p.ids[idx.w], p.ids[idx.b], layer.stride);
  const int beta = ops::softplus_floor(g, p.ids[idx.gdn_beta], static_cast<S>(kGdnFloor));
  const int gamma = ops::softplus_floor(g, p.ids[idx.gdn_gamma], static_cast<S>(kGdnFloor));
  cur = ops::gdn(g, cur, beta, gamma, /*inverse=*/layer.up);
  switch (layer.act) {
    case Activation::prelu:
      cur = ops::prelu(g, cur, p.ids[idx.prelu]);
      break;
    case Activation::sigmoid:
      cur = ops::sigmoid(g, cur);
      break;
    case Activation::none:
      break;
  }
  return cur;
}

}  // namespace detail

struct EncodeTrace {
  int symbols = -1;  // (N, 2k), power-normalized per row
  std::vector<attention::AfNodes> af;
  int feat_h = 0, feat_w = 0, feat_c = 0;
};

/// Encoder stack: FL modules with AF modules interleaved after all but the
/// last, then reshape to packed reals and per-example power normalization.
/// `snr` is a (N,1) leaf; it is only consumed when the spec enables attention.
template <typename S>
EncodeTrace encode_graph(Graph<S>& g, const Model<S>& m, const ParamNodes& p, int x,
                         int snr) {
  const Tensor<S>& xv = g.val(x);
  if (xv.rank() != 4) throw std::invalid_argument("encode expects (N,H,W,C) input");
  const int total = m.arch.encoder_stride_product();
  if (xv.dim(1) % total != 0 || xv.dim(2) % total != 0) {
    throw std::invalid_argument("image size " + std::to_string(xv.dim(1)) + "x" +
                                std::to_string(xv.dim(2)) + " must be a multiple of " +
                                std::to_string(total));
  }
  EncodeTrace trace;
  const auto layers = m.arch.encoder_layers();
  int cur = x;
  for (size_t i = 0; i < layers.size(); ++i) {
    cur = detail::fl_forward_graph<S>(g, cur, layers[i], m.enc_fl[i], p);
    if (m.arch.use_attention && i + 1 < layers.size()) {
      const auto& af = m.enc_af[i];
      auto nodes = attention::af_forward_graph(g, cur, snr, p.ids[af.w1], p.ids[af.b1],
                                               p.ids[af.w2], p.ids[af.b2]);
      trace.af.push_back(nodes);
      cur = nodes.output;
    }
  }
  const Tensor<S>& feat = g.val(cur);
  trace.feat_h = feat.dim(1);
  trace.feat_w = feat.dim(2);
  trace.feat_c = feat.dim(3);
  const int64_t flat = static_cast<int64_t>(trace.feat_h) * trace.feat_w * trace.feat_c;
  if (flat % 2 != 0) throw std::invalid_argument("odd real dimension");
  const int packed = ops::reshape(g, cur, {feat.dim(0), static_cast<int>(flat)});
  trace.symbols = ops::power_normalize_rows(g, packed);
  return trace;
}

struct DecodeTrace {
  int image = -1;  // (N, H, W, C), sigmoid range
  std::vector<attention::AfNodes> af;
};

/// Decoder stack; `zhat` is (N, 2k) packed reals, `out_h`/`out_w` give the
/// target image extent (the feature extent times the decoder stride product).
template <typename S>
DecodeTrace decode_graph(Graph<S>& g, const Model<S>& m, const ParamNodes& p, int zhat,
                         int snr, int out_h, int out_w) {
  const Tensor<S>& zv = g.val(zhat);
  if (zv.rank() != 2) throw std::invalid_argument("decode expects (N, 2k) symbols");
  const int total = m.arch.encoder_stride_product();
  const int feat_h = out_h / total;
  const int feat_w = out_w / total;
  const int c = m.arch.output_channels;
  if (out_h % total != 0 || out_w % total != 0 ||
      static_cast<int64_t>(feat_h) * feat_w * c != zv.dim(1)) {
    throw std::invalid_argument("symbol count " + std::to_string(zv.dim(1) / 2) +
                                " inconsistent with target image size");
  }
  DecodeTrace trace;
  int cur = ops::reshape(g, zhat, {zv.dim(0), feat_h, feat_w, c});
  const auto layers = m.arch.decoder_layers();
  for (size_t i = 0; i < layers.size(); ++i) {
    cur = detail::fl_forward_graph<S>(g, cur, layers[i], m.dec_fl[i], p);
    if (m.arch.use_attention && i + 1 < layers.size()) {
      const auto& af = m.dec_af[i];
      auto nodes = attention::af_forward_graph(g, cur, snr, p.ids[af.w1], p.ids[af.b1],
                                               p.ids[af.w2], p.ids[af.b2]);
      trace.af.push_back(nodes);
      cur = nodes.output;
    }
  }
  trace.image = cur;
  return trace;
}

/// Per-example SNR column leaf (N,1); pass requires_grad only in tests that
/// differentiate with respect to the SNR input.
template <typename S>
int snr_leaf(Graph<S>& g, int batch, const std::vector<double>& snr_db,
             bool requires_grad = false) {
  Tensor<S> t({batch, 1});
  for (int i = 0; i < batch; ++i) {
    t[i] = static_cast<S>(snr_db.size() == 1 ? snr_db[0] : snr_db[static_cast<size_t>(i)]);
  }
  return g.add_leaf(std::move(t), requires_grad);
}

/// Non-differentiating forward pass through the encoder.
template <typename S>
Tensor<S> encode(const Model<S>& m, const Tensor<S>& images,
                 const std::vector<double>& snr_db) {
  Graph<S> g;
  ParamNodes p = add_param_leaves(g, m, /*requires_grad=*/false);
  const int x = g.add_leaf_ref(&images, false);
  const int snr = snr_leaf<S>(g, images.dim(0), snr_db);
  EncodeTrace trace = encode_graph(g, m, p, x, snr);
  return g.val(trace.symbols);
}

/// Encoder pass that also returns every AF module's scaling factors and
/// recalibrated maps (one tensor per module, rows = batch).
template <typename S>
struct EncodeIntrospection {
  Tensor<S> symbols;
  std::vector<Tensor<S>> af_factors;
  std::vector<Tensor<S>> af_outputs;
};

template <typename S>
EncodeIntrospection<S> encode_collect(const Model<S>& m, const Tensor<S>& images,
                                      const std::vector<double>& snr_db) {
  Graph<S> g;
  ParamNodes p = add_param_leaves(g, m, false);
  const int x = g.add_leaf_ref(&images, false);
  const int snr = snr_leaf<S>(g, images.dim(0), snr_db);
  EncodeTrace trace = encode_graph(g, m, p, x, snr);
  EncodeIntrospection<S> out;
  out.symbols = g.val(trace.symbols);
  for (const auto& af : trace.af) {
    out.af_factors.push_back(g.val(af.factors));
    out.af_outputs.push_back(g.val(af.output));
  }
  return out;
}

/// Non-differentiating forward pass through the decoder.
template <typename S>
Tensor<S> decode(const Model<S>& m, const Tensor<S>& zhat, const std::vector<double>& snr_db,
                 int out_h, int out_w) {
  Graph<S> g;
  ParamNodes p = add_param_leaves(g, m, false);
  const int z = g.add_leaf_ref(&zhat, false);
  const int snr = snr_leaf<S>(g, zhat.dim(0), snr_db);
  DecodeTrace trace = decode_graph(g, m, p, z, snr, out_h, out_w);
  return g.val(trace.image);
}

template <typename S>
struct DecodeIntrospection {
  Tensor<S> image;
  std::vector<Tensor<S>> af_factors;
  std::vector<Tensor<S>> af_outputs;
};

template <typename S>
DecodeIntrospection<S> decode_collect(const Model<S>& m, const Tensor<S>& zhat,
                                      const std::vector<double>& snr_db, int out_h,
                                      int out_w) {
  Graph<S> g;
  ParamNodes p = add_param_leaves(g, m, false);
  const int z = g.add_leaf_ref(&zhat, false);
  const int snr = snr_leaf<S>(g, zhat.dim(0), snr_db);
  DecodeTrace trace = decode_graph(g, m, p, z, snr, out_h, out_w);
  DecodeIntrospection<S> out;
  out.image = g.val(trace.image);
  for (const auto& af : trace.af) {
    out.af_factors.push_back(g.val(af.factors));
    out.af_outputs.push_back(g.val(af.output));
  }
  return out;
}

}  // namespace codec
}  // namespace jscc

#endif  // JSCC_CODEC_HPP_
