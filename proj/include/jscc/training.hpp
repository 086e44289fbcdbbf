#ifndef JSCC_TRAINING_HPP_
#define JSCC_TRAINING_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "jscc/codec.hpp"
#include "jscc/data.hpp"
#include "jscc/ratio.hpp"
#include "jscc/rng.hpp"

namespace jscc {
namespace training {

/// SNR sampling law used while training: a uniform range for adaptive models
/// or a single fixed value for baselines.
struct SnrDist {
  enum class Kind { uniform, fixed };
  Kind kind = Kind::fixed;
  double lo = 0.0, hi = 0.0;
  double value = 0.0;

  static SnrDist make_uniform(double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("uniform SNR range requires lo <= hi");
    SnrDist d;
    d.kind = Kind::uniform;
    d.lo = lo;
    d.hi = hi;
    return d;
  }
  static SnrDist make_fixed(double v) {
    SnrDist d;
    d.kind = Kind::fixed;
    d.value = v;
    return d;
  }

  double sample(RngStream& stream) const {
    if (kind == Kind::fixed) return value;
    if (lo == hi) return lo;
    return stream.uniform(lo, hi);
  }

  std::string str() const;
  static SnrDist parse(const std::string& text);
};

double sample_snr(const SnrDist& dist, RngStream& stream);

/// Eq. (5)-style per-image distortion: mean squared error over all pixels.
double mse_distortion(const data::ImageTensor& x, const data::ImageTensor& x_hat);

/// Mean of per-image distortions over a batch.
double batch_loss(const std::vector<data::ImageTensor>& x,
                  const std::vector<data::ImageTensor>& x_hat);

struct TrainConfig {
  SnrDist snr_dist = SnrDist::make_fixed(13.0);
  double learning_rate = 1e-4;
  int batch_size = 128;
  int epochs = 1;
  uint64_t seed = 0;
  Ratio bandwidth_ratio{1, 6};
  std::string arch_preset = "tiny";
  bool snr_per_batch = false;       // one SNR draw per batch instead of per example
  int checkpoint_every_epochs = 1;  // 0: only the final checkpoint
  int checkpoint_every_batches = 0; // 0: disabled
  std::string out_dir;              // empty: no checkpoints / CSV written
  int workers = 1;
  int chunk = 16;  // images per forward/backward graph; fixed so gradients do
                   // not depend on the worker count

  void validate() const {
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (!(learning_rate > 0)) throw std::invalid_argument("learning rate must be positive");
    if (chunk < 1) throw std::invalid_argument("chunk must be >= 1");
  }
};

struct TrainLogEntry {
  int epoch = 0;
  double loss = 0.0;
  double seconds = 0.0;
  std::string checkpoint_path;
};

struct TrainLog {
  std::vector<TrainLogEntry> entries;
};

/// Writes the log in its CSV layout: epoch,loss,seconds,checkpoint_path.
void write_train_log_csv(const std::string& path, const TrainLog& log);

/// Adam optimizer with bias correction; moments live alongside the parameter
/// tensors they track.
template <typename S>
class Adam {
 public:
  Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::vector<Tensor<S>>& params, const std::vector<Tensor<S>>& grads) {
    if (m_.empty()) {
      for (const auto& p : params) {
        m_.emplace_back(p.shape());
        v_.emplace_back(p.shape());
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (size_t i = 0; i < params.size(); ++i) {
      Tensor<S>& p = params[i];
      const Tensor<S>& g = grads[i];
      Tensor<S>& m = m_[i];
      Tensor<S>& v = v_[i];
      for (int64_t j = 0; j < p.numel(); ++j) {
        m[j] = static_cast<S>(beta1_ * m[j] + (1.0 - beta1_) * g[j]);
        v[j] = static_cast<S>(beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j]);
        const double mhat = m[j] / bc1;
        const double vhat = v[j] / bc2;
        p[j] = static_cast<S>(p[j] - lr_ * mhat / (std::sqrt(vhat) + eps_));
      }
    }
  }

  int64_t steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<Tensor<S>> m_, v_;
};

/// Thrown when the training loss stops being finite.
class TrainingDiverged : public std::runtime_error {
 public:
  explicit TrainingDiverged(const std::string& what) : std::runtime_error(what) {}
};

struct TrainResult {
  TrainLog log;
  std::string final_checkpoint;
};

/// Optimizes the model in place over the dataset: per batch, draw an SNR per
/// example, run encode -> AWGN -> decode, take the mean MSE, and apply one
/// Adam update. Runs are reproducible for a fixed seed and config.
TrainResult train(codec::Model<float>& model, const data::Dataset& dataset,
                  const TrainConfig& cfg);

}  // namespace training
}  // namespace jscc

#endif  // JSCC_TRAINING_HPP_
