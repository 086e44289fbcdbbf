#ifndef JSCC_EVALUATION_HPP_
#define JSCC_EVALUATION_HPP_

#include <functional>
#include <string>
#include <vector>

#include "jscc/codec.hpp"
#include "jscc/data.hpp"

namespace jscc {
namespace evaluation {

struct EvalConfig {
  std::vector<double> snr_test_list;
  int repeats = 10;
  uint64_t seed = 0;
  double max_pixel = 1.0;
  double psnr_cap_db = 100.0;
  int workers = 1;

  void validate() const {
    if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    if (!(max_pixel > 0)) throw std::invalid_argument("max_pixel must be positive");
  }
};

/// 10*log10(max^2 / MSE), capped at `cap_db` (a zero MSE would otherwise be
/// infinite).
double psnr(const data::ImageTensor& x, const data::ImageTensor& x_hat, double max_pixel,
            double cap_db = 100.0);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Population mean/std of a sequence.
MeanStd reduce_mean_std(const std::vector<double>& values);

/// Per-image-then-average reduction: `per_image_psnr(i)` yields the PSNR of
/// image i (already averaged over its channel realizations); the result
/// averages across images. Work is dispatched by image index, so the output
/// does not depend on the worker count.
MeanStd per_image_then_average(int64_t n_images, int workers,
                               const std::function<double(int64_t)>& per_image_psnr);

/// Evaluates the model over a dataset: each image is encoded once with the
/// feedback SNR, transmitted `repeats` times at the true SNR (noise substream
/// derived from (seed, image, repeat)), decoded, and scored per image before
/// averaging across images.
MeanStd dataset_psnr(const codec::Model<float>& model, const data::Dataset& dataset,
                     double snr_fb_db, double snr_true_db, const EvalConfig& cfg);

struct SweepRow {
  std::string model_id;
  double snr_test_db = 0.0;
  double mean_psnr_db = 0.0;
  double std_psnr_db = 0.0;
  int repeats = 0;
};
using SweepResult = std::vector<SweepRow>;

/// Matched-SNR sweep: the AF feedback equals the channel's true SNR.
SweepResult sweep(const codec::Model<float>& model, const std::string& model_id,
                  const data::Dataset& dataset, const EvalConfig& cfg);

/// Feedback/true SNR decoupled (channel mismatch experiments).
MeanStd mismatch_eval(const codec::Model<float>& model, const data::Dataset& dataset,
                      double snr_fb_db, double snr_true_db, const EvalConfig& cfg);

struct ModuleAttentionStats {
  std::vector<double> mean;  // per channel, over the dataset
  std::vector<double> std;   // per channel, population
  double var_of_means = 0.0; // population variance of the per-channel means
};

struct AttentionStats {
  double snr_db = 0.0;
  bool decoder_side = false;
  std::vector<ModuleAttentionStats> modules;
};

/// Scaling-factor statistics per AF module at one SNR. Encoder-side factors
/// depend only on the source image; the decoder-side switch observes factors
/// after one channel realization per image.
AttentionStats attention_stats(const codec::Model<float>& model, const data::Dataset& dataset,
                               double snr_db, const EvalConfig& cfg,
                               bool decoder_side = false);

/// Nearest-training-SNR model selection (ties break toward the lower SNR),
/// then a matched sweep with the selected model at each test SNR.
struct EnsembleMember {
  double snr_train_db = 0.0;
  const codec::Model<float>* model = nullptr;
};

SweepResult ensemble_eval(const std::vector<EnsembleMember>& members,
                          const std::string& model_id, const data::Dataset& dataset,
                          const EvalConfig& cfg);

/// Index of the ensemble member serving a given test SNR.
size_t select_nearest_snr(const std::vector<EnsembleMember>& members, double snr_test_db);

struct StorageRow {
  std::string strategy;
  int64_t param_count = 0;
  int64_t bytes = 0;   // float32 storage
  double mb = 0.0;     // bytes / 2^20
  std::string mb_human;  // 4 significant digits, e.g. "40.78"
};

/// Storage accounting: bytes = 4 * parameter count, MB = bytes / 2^20.
std::vector<StorageRow> storage_report(
    const std::vector<std::pair<std::string, int64_t>>& strategies);

// CSV emission. Headers are mandatory; floats use 6 significant digits. When
// `timestamp` is set the first line is a "# generated ..." comment.
void write_sweep_csv(const std::string& path, const SweepResult& rows, bool timestamp);
void write_mismatch_csv(const std::string& path,
                        const std::vector<std::tuple<std::string, double, double, MeanStd>>& rows,
                        bool timestamp);
void write_attention_csv(const std::string& path, const std::vector<AttentionStats>& stats,
                         bool timestamp);
void write_storage_csv(const std::string& path, const std::vector<StorageRow>& rows,
                       bool timestamp);

}  // namespace evaluation
}  // namespace jscc

#endif  // JSCC_EVALUATION_HPP_
