#ifndef JSCC_CHANNEL_HPP_
#define JSCC_CHANNEL_HPP_

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "jscc/rng.hpp"
#include "jscc/tensor.hpp"

namespace jscc {
namespace channel {

/// A block of k complex channel symbols.
template <typename S>
struct SymbolVector {
  std::vector<std::complex<S>> symbols;

  int64_t k() const { return static_cast<int64_t>(symbols.size()); }

  S average_power() const {
    S acc = S(0);
    for (const auto& z : symbols) acc += z.real() * z.real() + z.imag() * z.imag();
    return acc / static_cast<S>(symbols.size());
  }
};

enum class ChannelMode { awgn, equalized_fading };

struct ChannelConfig {
  double snr_db = 0.0;
  uint64_t seed = 0;
  ChannelMode mode = ChannelMode::awgn;
};

/// Interleaves 2k reals into k complex symbols: symbol i = (v[2i], v[2i+1]).
template <typename S>
SymbolVector<S> pack_complex(std::span<const S> values) {
  if (values.size() % 2 != 0) throw std::invalid_argument("odd real dimension");
  SymbolVector<S> out;
  out.symbols.resize(values.size() / 2);
  for (size_t i = 0; i < out.symbols.size(); ++i) {
    out.symbols[i] = std::complex<S>(values[2 * i], values[2 * i + 1]);
  }
  return out;
}

template <typename S>
std::vector<S> unpack_complex(const SymbolVector<S>& z) {
  std::vector<S> out(static_cast<size_t>(2 * z.k()));
  for (size_t i = 0; i < z.symbols.size(); ++i) {
    out[2 * i] = z.symbols[i].real();
    out[2 * i + 1] = z.symbols[i].imag();
  }
  return out;
}

/// Scales the block so its average complex-symbol power is exactly one.
template <typename S>
SymbolVector<S> power_normalize(const SymbolVector<S>& raw) {
  S sumsq = S(0);
  for (const auto& z : raw.symbols) sumsq += z.real() * z.real() + z.imag() * z.imag();
  if (!(sumsq > S(0))) throw std::domain_error("zero-power block");
  const S scale = std::sqrt(static_cast<S>(raw.k()) / sumsq);
  SymbolVector<S> out;
  out.symbols.reserve(raw.symbols.size());
  for (const auto& z : raw.symbols) out.symbols.push_back(z * scale);
  return out;
}

/// Noise power for unit signal power: sigma^2 = 10^(-snr_db/10), per complex
/// symbol (sigma^2/2 per real component).
inline double snr_to_noise_power(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

/// One seedable channel instance; repeated transmissions advance its stream.
/// A single instance must not be shared across concurrent callers.
template <typename S>
class Channel {
 public:
  explicit Channel(const ChannelConfig& cfg)
      : cfg_(cfg), stream_(derive_stream(cfg.seed, "channel-noise")) {}

  const ChannelConfig& config() const { return cfg_; }

  /// z + w with w ~ CN(0, sigma^2 I); noise realizations are drawn as
  /// standard normals scaled by sigma, so different SNRs under the same seed
  /// share the same underlying realization.
  SymbolVector<S> awgn_transmit(const SymbolVector<S>& z) {
    const double sigma2 = snr_to_noise_power(cfg_.snr_db);
    const S per_comp = static_cast<S>(std::sqrt(sigma2 / 2.0));
    SymbolVector<S> out;
    out.symbols.reserve(z.symbols.size());
    for (const auto& zi : z.symbols) {
      const S nr = static_cast<S>(stream_.normal()) * per_comp;
      const S ni = static_cast<S>(stream_.normal()) * per_comp;
      out.symbols.emplace_back(zi.real() + nr, zi.imag() + ni);
    }
    return out;
  }

  /// (h z + w)/h = z + w/h; effective noise power sigma^2/|h|^2.
  SymbolVector<S> fading_transmit_equalized(const SymbolVector<S>& z,
                                            std::complex<S> gain) {
    const S mag2 = gain.real() * gain.real() + gain.imag() * gain.imag();
    if (!(mag2 > S(0))) throw std::domain_error("channel in deep fade");
    const double sigma2 = snr_to_noise_power(cfg_.snr_db);
    const S per_comp = static_cast<S>(std::sqrt(sigma2 / 2.0));
    SymbolVector<S> out;
    out.symbols.reserve(z.symbols.size());
    for (const auto& zi : z.symbols) {
      const S nr = static_cast<S>(stream_.normal()) * per_comp;
      const S ni = static_cast<S>(stream_.normal()) * per_comp;
      // w / h = w * conj(h) / |h|^2, expanded to keep the gain==1 path exact.
      const S er = (nr * gain.real() + ni * gain.imag()) / mag2;
      const S ei = (ni * gain.real() - nr * gain.imag()) / mag2;
      out.symbols.emplace_back(zi.real() + er, zi.imag() + ei);
    }
    return out;
  }

 private:
  ChannelConfig cfg_;
  RngStream stream_;
};

/// Fills a (rows, 2k) tensor with real-component AWGN for the packed-real
/// representation: per-row sigma^2 taken from snr_db_per_row. Used by the
/// training/evaluation graph path; each row's draws come in the same order as
/// the complex-domain channel above.
template <typename S>
Tensor<S> make_packed_noise(int rows, int len, const std::vector<double>& snr_db_per_row,
                            RngStream& stream) {
  Tensor<S> n({rows, len});
  for (int r = 0; r < rows; ++r) {
    const double sigma2 = snr_to_noise_power(snr_db_per_row[static_cast<size_t>(r)]);
    const S per_comp = static_cast<S>(std::sqrt(sigma2 / 2.0));
    S* nr = n.data() + static_cast<int64_t>(r) * len;
    for (int i = 0; i < len; ++i) nr[i] = static_cast<S>(stream.normal()) * per_comp;
  }
  return n;
}

}  // namespace channel
}  // namespace jscc

#endif  // JSCC_CHANNEL_HPP_
