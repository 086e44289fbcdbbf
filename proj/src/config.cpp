#include "jscc/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "jscc/codec.hpp"

namespace jscc {
namespace config {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char ch : text) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  const std::string last = trim(cur);
  if (!last.empty()) out.push_back(last);
  return out;
}

}  // namespace

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const std::string& tok : split_commas(text)) {
    const auto c1 = tok.find(':');
    if (c1 == std::string::npos) {
      out.push_back(std::stod(tok));
      continue;
    }
    const auto c2 = tok.find(':', c1 + 1);
    const double lo = std::stod(tok.substr(0, c1));
    const double hi = std::stod(c2 == std::string::npos ? tok.substr(c1 + 1)
                                                        : tok.substr(c1 + 1, c2 - c1 - 1));
    const double step = c2 == std::string::npos ? 1.0 : std::stod(tok.substr(c2 + 1));
    if (!(step > 0) || hi < lo) throw std::invalid_argument("bad range '" + tok + "'");
    for (double v = lo; v <= hi + 1e-9; v += step) out.push_back(v);
  }
  return out;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path, 0, "cannot open config file");

  ExperimentConfig cfg;
  std::string section;
  std::string line;
  int lineno = 0;
  bool saw_model = false, saw_data = false;

  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(path, lineno, "unterminated section header");
      section = line.substr(1, line.size() - 2);
      if (section != "model" && section != "train" && section != "eval" &&
          section != "data" && section != "out") {
        throw ConfigError(path, lineno, "unknown section [" + section + "]");
      }
      if (section == "model") saw_model = true;
      if (section == "data") saw_data = true;
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path, lineno, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError(path, lineno, "key outside of any section");

    try {
      if (section == "model") {
        if (key == "arch_preset") {
          cfg.arch_preset = value;
        } else if (key == "use_attention") {
          cfg.use_attention = parse_bool(value);
        } else if (key == "bandwidth_ratio") {
          cfg.bandwidth_ratio = Ratio::parse(value);
        } else if (key == "af_hidden_width") {
          cfg.af_hidden_width = std::stoi(value);
        } else {
          throw ConfigError(path, lineno, "unknown key '" + key + "' in [model]");
        }
      } else if (section == "train") {
        if (key == "snr_dist") {
          cfg.snr_dist = training::SnrDist::parse(value);
        } else if (key == "lr") {
          cfg.lr = std::stod(value);
        } else if (key == "batch") {
          cfg.batch = std::stoi(value);
        } else if (key == "epochs") {
          cfg.epochs = std::stoi(value);
        } else if (key == "seed") {
          cfg.train_seed = std::stoull(value);
        } else if (key == "snr_per_batch") {
          cfg.snr_per_batch = parse_bool(value);
        } else if (key == "checkpoint_every_epochs") {
          cfg.checkpoint_every_epochs = std::stoi(value);
        } else if (key == "checkpoint_every_batches") {
          cfg.checkpoint_every_batches = std::stoi(value);
        } else {
          throw ConfigError(path, lineno, "unknown key '" + key + "' in [train]");
        }
      } else if (section == "eval") {
        if (key == "snr_list") {
          cfg.snr_list = parse_double_list(value);
        } else if (key == "repeats") {
          cfg.repeats = std::stoi(value);
        } else if (key == "seed") {
          cfg.eval_seed = std::stoull(value);
        } else if (key == "mismatch_fb") {
          cfg.mismatch_fb = parse_double_list(value);
        } else if (key == "mismatch_true") {
          cfg.mismatch_true = parse_double_list(value);
        } else if (key == "max_pixel") {
          cfg.max_pixel = std::stod(value);
        } else if (key == "psnr_cap") {
          cfg.psnr_cap = std::stod(value);
        } else if (key == "attention_side") {
          if (value != "encoder" && value != "decoder") {
            throw ConfigError(path, lineno, "attention_side must be encoder or decoder");
          }
          cfg.attention_side = value;
        } else {
          throw ConfigError(path, lineno, "unknown key '" + key + "' in [eval]");
        }
      } else if (section == "data") {
        if (key == "kind") {
          if (value != "cifar10" && value != "image_dir") {
            throw ConfigError(path, lineno, "data kind must be cifar10 or image_dir");
          }
          cfg.data_kind = value;
        } else if (key == "paths") {
          cfg.paths = split_commas(value);
        } else if (key == "test_paths") {
          cfg.test_paths = split_commas(value);
        } else if (key == "crop") {
          cfg.crop = std::stoi(value);
        } else if (key == "limit") {
          cfg.limit = std::stoll(value);
        } else if (key == "test_limit") {
          cfg.test_limit = std::stoll(value);
        } else {
          throw ConfigError(path, lineno, "unknown key '" + key + "' in [data]");
        }
      } else if (section == "out") {
        if (key == "dir") {
          cfg.out_dir = value;
        } else {
          throw ConfigError(path, lineno, "unknown key '" + key + "' in [out]");
        }
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(path, lineno, std::string(e.what()));
    }
  }

  if (!saw_model) throw ConfigError(path, 0, "missing [model] section");
  if (!saw_data) throw ConfigError(path, 0, "missing [data] section");

  // Cross-field validation, before any work starts.
  try {
    if (cfg.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (cfg.batch < 1) throw std::invalid_argument("batch must be >= 1");
    if (cfg.repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    if (!(cfg.max_pixel > 0)) throw std::invalid_argument("max_pixel must be positive");
    codec::ArchSpec probe = codec::make_preset(cfg.arch_preset, /*output_channels=*/16);
    const int stride = probe.encoder_stride_product();
    codec::channels_for_ratio(cfg.bandwidth_ratio, 32, 32, probe.input_channels, stride);
    if (cfg.data_kind == "image_dir" && cfg.crop % stride != 0) {
      throw std::invalid_argument("crop size " + std::to_string(cfg.crop) +
                                  " must be a multiple of " + std::to_string(stride));
    }
    if (cfg.data_kind.empty()) throw std::invalid_argument("data kind is required");
    for (const auto& p : cfg.paths) {
      if (!std::filesystem::exists(p)) throw std::invalid_argument("missing path '" + p + "'");
    }
    for (const auto& p : cfg.test_paths) {
      if (!std::filesystem::exists(p)) throw std::invalid_argument("missing path '" + p + "'");
    }
  } catch (const std::exception& e) {
    throw ConfigError(path, 0, std::string(e.what()));
  }
  return cfg;
}

}  // namespace config
}  // namespace jscc
