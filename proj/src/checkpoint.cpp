#include "jscc/checkpoint.hpp"

#include <cstdio>
#include <sstream>

namespace jscc {
namespace checkpoint {

std::string CheckpointMeta::serialize() const {
  std::ostringstream os;
  os << "epochs_seen=" << epochs_seen << "\n";
  os << "snr_dist=" << snr_dist << "\n";
  os << "seed=" << seed << "\n";
  return os.str();
}

CheckpointMeta CheckpointMeta::parse(const std::string& text) {
  CheckpointMeta meta;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("malformed checkpoint metadata");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "epochs_seen") {
      meta.epochs_seen = std::stoll(value);
    } else if (key == "snr_dist") {
      meta.snr_dist = value;
    } else if (key == "seed") {
      meta.seed = std::stoull(value);
    } else {
      throw std::runtime_error("unknown checkpoint metadata key '" + key + "'");
    }
  }
  return meta;
}

std::string model_id(const codec::ArchSpec& arch, const std::string& snr_dist) {
  if (arch.use_attention) return "adjscc";
  // fixed(7) -> bdjscc_7db
  const auto open = snr_dist.find('(');
  const auto close = snr_dist.rfind(')');
  if (snr_dist.rfind("fixed", 0) == 0 && open != std::string::npos &&
      close != std::string::npos && close > open) {
    std::string v = snr_dist.substr(open + 1, close - open - 1);
    double d = std::stod(v);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", d);
    return std::string("bdjscc_") + buf + "db";
  }
  return "bdjscc";
}

}  // namespace checkpoint
}  // namespace jscc
