#ifndef JSCC_CONFIG_HPP_
#define JSCC_CONFIG_HPP_

#include <stdexcept>
#include <string>
#include <vector>

#include "jscc/ratio.hpp"
#include "jscc/training.hpp"

namespace jscc {
namespace config {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& file, int line, const std::string& msg)
      : std::runtime_error(line > 0 ? file + ":" + std::to_string(line) + ": " + msg
                                    : file + ": " + msg) {}
};

/// One experiment document: sections [model], [train], [eval], [data], [out]
/// with key = value lines. Unknown sections or keys are rejected.
struct ExperimentConfig {
  // [model]
  std::string arch_preset = "tiny";
  bool use_attention = true;
  Ratio bandwidth_ratio{1, 6};
  int af_hidden_width = -1;  // -1: keep the preset's value

  // [train]
  training::SnrDist snr_dist = training::SnrDist::make_uniform(0, 20);
  double lr = 1e-4;
  int batch = 128;
  int epochs = 1;
  uint64_t train_seed = 0;
  bool snr_per_batch = false;
  int checkpoint_every_epochs = 1;
  int checkpoint_every_batches = 0;

  // [eval]
  std::vector<double> snr_list;
  int repeats = 10;
  uint64_t eval_seed = 0;
  std::vector<double> mismatch_fb = {0, 5, 10, 15, 20};
  std::vector<double> mismatch_true = {0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
  double max_pixel = 1.0;
  double psnr_cap = 100.0;
  std::string attention_side = "encoder";  // or "decoder"

  // [data]
  std::string data_kind;  // "cifar10" or "image_dir"
  std::vector<std::string> paths;
  std::vector<std::string> test_paths;
  int crop = 128;
  int64_t limit = 0;
  int64_t test_limit = 0;

  // [out]
  std::string out_dir;
};

/// Parses and validates; throws ConfigError with the offending line number.
ExperimentConfig load_config(const std::string& path);

/// Expands "a,b,c" and "lo:hi:step" range fragments into a value list.
std::vector<double> parse_double_list(const std::string& text);

}  // namespace config
}  // namespace jscc

#endif  // JSCC_CONFIG_HPP_
