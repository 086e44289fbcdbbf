#ifndef JSCC_CHECKPOINT_HPP_
#define JSCC_CHECKPOINT_HPP_

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "jscc/codec.hpp"

namespace jscc {
namespace checkpoint {

static_assert(std::endian::native == std::endian::little,
              "checkpoint files are little-endian; big-endian hosts are unsupported");

/// Training provenance carried inside a checkpoint.
struct CheckpointMeta {
  int64_t epochs_seen = 0;
  std::string snr_dist;  // e.g. "uniform(0,20)" or "fixed(13)"
  uint64_t seed = 0;

  std::string serialize() const;
  static CheckpointMeta parse(const std::string& text);
};

constexpr char kMagic[9] = "JSCCCKP1";
constexpr char kEndMagic[9] = "JSCCEND1";
constexpr uint32_t kVersion = 1;

namespace detail {

inline void write_u32(std::ostream& os, uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
inline void write_u64(std::ostream& os, uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
inline uint32_t read_u32(std::istream& is) {
  uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw std::runtime_error("checkpoint truncated");
  return v;
}
inline uint64_t read_u64(std::istream& is) {
  uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw std::runtime_error("checkpoint truncated");
  return v;
}
inline std::string read_bytes(std::istream& is, size_t n) {
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (!is) throw std::runtime_error("checkpoint truncated");
  return s;
}

}  // namespace detail

/// Serializes the model as named little-endian float32 arrays. Round trips
/// are bit-exact for float models.
template <typename S>
void save_checkpoint(const std::string& path, const codec::Model<S>& model,
                     const CheckpointMeta& meta) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  os.write(kMagic, 8);
  detail::write_u32(os, kVersion);
  const std::string arch_text = model.arch.serialize();
  detail::write_u64(os, hash_bytes64(arch_text));
  detail::write_u32(os, static_cast<uint32_t>(arch_text.size()));
  os.write(arch_text.data(), static_cast<std::streamsize>(arch_text.size()));
  const std::string meta_text = meta.serialize();
  detail::write_u32(os, static_cast<uint32_t>(meta_text.size()));
  os.write(meta_text.data(), static_cast<std::streamsize>(meta_text.size()));
  detail::write_u32(os, static_cast<uint32_t>(model.values.size()));
  std::vector<float> scratch;
  for (size_t i = 0; i < model.values.size(); ++i) {
    const std::string& name = model.names[i];
    const Tensor<S>& t = model.values[i];
    detail::write_u32(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    detail::write_u32(os, static_cast<uint32_t>(t.rank()));
    for (int d = 0; d < t.rank(); ++d) detail::write_u32(os, static_cast<uint32_t>(t.dim(d)));
    scratch.resize(static_cast<size_t>(t.numel()));
    for (int64_t j = 0; j < t.numel(); ++j) scratch[static_cast<size_t>(j)] = static_cast<float>(t[j]);
    os.write(reinterpret_cast<const char*>(scratch.data()),
             static_cast<std::streamsize>(scratch.size() * sizeof(float)));
  }
  os.write(kEndMagic, 8);
  if (!os) throw std::runtime_error("failed writing checkpoint: " + path);
}

template <typename S>
struct LoadedModel {
  codec::Model<S> model;
  CheckpointMeta meta;
};

/// Loads and validates a checkpoint. When `expected_arch` is given the stored
/// architecture must match it exactly.
template <typename S>
LoadedModel<S> load_checkpoint(const std::string& path,
                               const codec::ArchSpec* expected_arch = nullptr) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::string(magic, 8) != std::string(kMagic, 8)) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  const uint32_t version = detail::read_u32(is);
  if (version != kVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  const uint64_t arch_hash = detail::read_u64(is);
  const uint32_t arch_len = detail::read_u32(is);
  const std::string arch_text = detail::read_bytes(is, arch_len);
  if (hash_bytes64(arch_text) != arch_hash) {
    throw std::runtime_error("checkpoint architecture hash mismatch (corrupt file?)");
  }
  codec::ArchSpec arch = codec::ArchSpec::parse(arch_text);
  if (expected_arch != nullptr && !(arch == *expected_arch)) {
    throw std::runtime_error("checkpoint architecture does not match the requested one");
  }
  const uint32_t meta_len = detail::read_u32(is);
  CheckpointMeta meta = CheckpointMeta::parse(detail::read_bytes(is, meta_len));

  LoadedModel<S> out;
  out.model = codec::build_model<S>(arch);
  out.meta = meta;
  const uint32_t n_arrays = detail::read_u32(is);
  if (n_arrays != out.model.values.size()) {
    throw std::runtime_error("checkpoint parameter count mismatch");
  }
  std::vector<float> scratch;
  for (uint32_t i = 0; i < n_arrays; ++i) {
    const uint32_t name_len = detail::read_u32(is);
    const std::string name = detail::read_bytes(is, name_len);
    if (name != out.model.names[i]) {
      throw std::runtime_error("checkpoint parameter '" + name + "' unexpected at slot " +
                               std::to_string(i));
    }
    const uint32_t rank = detail::read_u32(is);
    Tensor<S>& t = out.model.values[i];
    if (rank != static_cast<uint32_t>(t.rank())) {
      throw std::runtime_error("checkpoint parameter '" + name + "' rank mismatch");
    }
    for (uint32_t d = 0; d < rank; ++d) {
      if (detail::read_u32(is) != static_cast<uint32_t>(t.dim(static_cast<int>(d)))) {
        throw std::runtime_error("checkpoint parameter '" + name + "' shape mismatch");
      }
    }
    scratch.resize(static_cast<size_t>(t.numel()));
    is.read(reinterpret_cast<char*>(scratch.data()),
            static_cast<std::streamsize>(scratch.size() * sizeof(float)));
    if (!is) throw std::runtime_error("checkpoint truncated");
    for (int64_t j = 0; j < t.numel(); ++j) t[j] = static_cast<S>(scratch[static_cast<size_t>(j)]);
  }
  char endmagic[8];
  is.read(endmagic, 8);
  if (!is || std::string(endmagic, 8) != std::string(kEndMagic, 8)) {
    throw std::runtime_error("checkpoint truncated");
  }
  return out;
}

/// Short identifier used in CSV rows: "adjscc" for attention models,
/// "bdjscc_<snr>db" for baselines trained at a fixed SNR.
std::string model_id(const codec::ArchSpec& arch, const std::string& snr_dist);

}  // namespace checkpoint
}  // namespace jscc

#endif  // JSCC_CHECKPOINT_HPP_
