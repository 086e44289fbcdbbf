#include "jscc/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "jscc/rng.hpp"

namespace jscc {
namespace data {

namespace {

constexpr int kCifarDim = 32;
constexpr int kCifarRecord = 3073;
constexpr int kCifarPixels = 3072;

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                             std::istreambuf_iterator<char>());
  return bytes;
}

ImageTensor cifar_record_to_image(const uint8_t* pixels) {
  ImageTensor img({kCifarDim, kCifarDim, 3});
  for (int c = 0; c < 3; ++c) {
    const uint8_t* plane = pixels + c * kCifarDim * kCifarDim;
    for (int y = 0; y < kCifarDim; ++y) {
      for (int x = 0; x < kCifarDim; ++x) {
        img.at(y, x, c) = static_cast<float>(plane[y * kCifarDim + x]) / 255.0f;
      }
    }
  }
  return img;
}

/// Minimal binary PPM (P6, maxval 255) reader. Returns an empty tensor on
/// any parse failure.
ImageTensor read_ppm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return {};
  std::string magic;
  is >> magic;
  if (magic != "P6") return {};
  auto next_int = [&is]() -> long {
    // Skip whitespace and '#' comment lines between header fields.
    for (;;) {
      int ch = is.peek();
      if (ch == '#') {
        std::string dummy;
        std::getline(is, dummy);
      } else if (std::isspace(ch)) {
        is.get();
      } else {
        break;
      }
    }
    long v = -1;
    is >> v;
    return is ? v : -1;
  };
  const long w = next_int();
  const long h = next_int();
  const long maxval = next_int();
  if (w <= 0 || h <= 0 || maxval != 255) return {};
  is.get();  // single whitespace after the header
  std::vector<uint8_t> raw(static_cast<size_t>(w) * h * 3);
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!is) return {};
  ImageTensor img({static_cast<int>(h), static_cast<int>(w), 3});
  for (int64_t i = 0; i < img.numel(); ++i) {
    img[i] = static_cast<float>(raw[static_cast<size_t>(i)]) / 255.0f;
  }
  return img;
}

}  // namespace

Dataset load_cifar10_binary(const std::vector<std::string>& paths, int64_t limit) {
  Dataset ds;
  ds.provenance = "cifar10-binary";
  for (const auto& path : paths) {
    const std::vector<uint8_t> bytes = read_file(path);
    if (bytes.size() % kCifarRecord != 0) {
      const size_t offset = (bytes.size() / kCifarRecord) * kCifarRecord;
      throw std::runtime_error("truncated record in '" + path + "' at byte offset " +
                               std::to_string(offset) + " (file size " +
                               std::to_string(bytes.size()) + " is not a multiple of 3073)");
    }
    const size_t records = bytes.size() / kCifarRecord;
    for (size_t r = 0; r < records; ++r) {
      if (limit > 0 && ds.size() >= limit) return ds;
      // Record byte 0 is the class label; reconstruction does not use it.
      ds.images.push_back(cifar_record_to_image(bytes.data() + r * kCifarRecord + 1));
    }
  }
  return ds;
}

Dataset load_image_dir(const std::string& path, int crop, int total_stride, uint64_t seed,
                       int64_t limit) {
  if (crop < 1 || total_stride < 1 || crop % total_stride != 0) {
    throw std::invalid_argument("crop size " + std::to_string(crop) +
                                " must be a multiple of " + std::to_string(total_stride));
  }
  std::vector<std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(path)) {
    if (entry.is_regular_file()) files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());

  Dataset ds;
  ds.provenance = "image-dir:" + path;
  for (size_t idx = 0; idx < files.size(); ++idx) {
    if (limit > 0 && ds.size() >= limit) break;
    ImageTensor full = read_ppm(files[idx]);
    if (full.empty()) {
      std::cerr << "warning: skipping undecodable file " << files[idx] << "\n";
      continue;
    }
    if (full.dim(0) < crop || full.dim(1) < crop) continue;  // too small for the crop
    RngStream stream = derive_stream(seed, "crop", idx);
    const int max_y = full.dim(0) - crop;
    const int max_x = full.dim(1) - crop;
    const int oy = max_y == 0 ? 0 : static_cast<int>(stream.next_u64() % (max_y + 1));
    const int ox = max_x == 0 ? 0 : static_cast<int>(stream.next_u64() % (max_x + 1));
    ImageTensor out({crop, crop, full.dim(2)});
    for (int y = 0; y < crop; ++y) {
      for (int x = 0; x < crop; ++x) {
        for (int c = 0; c < full.dim(2); ++c) out.at(y, x, c) = full.at(oy + y, ox + x, c);
      }
    }
    ds.images.push_back(std::move(out));
  }
  if (ds.empty()) {
    throw std::runtime_error("no usable images in '" + path + "'");
  }
  return ds;
}

Tensor<int32_t> denormalize(const ImageTensor& x, int bit_depth) {
  if (bit_depth < 1 || bit_depth > 16) throw std::invalid_argument("bit depth out of range");
  const double maxv = static_cast<double>((1 << bit_depth) - 1);
  Tensor<int32_t> out(x.shape());
  for (int64_t i = 0; i < x.numel(); ++i) {
    double v = std::round(static_cast<double>(x[i]) * maxv);
    if (v < 0) v = 0;
    if (v > maxv) v = maxv;
    out[i] = static_cast<int32_t>(v);
  }
  return out;
}

void write_ppm(const std::string& path, const ImageTensor& image) {
  if (image.rank() != 3 || image.dim(2) != 3) {
    throw std::invalid_argument("write_ppm expects an (H,W,3) image");
  }
  const Tensor<int32_t> q = denormalize(image, 8);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << "P6\n" << image.dim(1) << " " << image.dim(0) << "\n255\n";
  std::vector<uint8_t> raw(static_cast<size_t>(q.numel()));
  for (int64_t i = 0; i < q.numel(); ++i) raw[static_cast<size_t>(i)] = static_cast<uint8_t>(q[i]);
  os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

namespace {

/// One synthetic image: correlated smooth gradients plus a few soft shapes
/// and light noise, tuned to span a wide brightness/texture range.
void render_synthetic(RngStream& stream, uint8_t* out /* 3072 planar bytes */) {
  const int n = kCifarDim;
  float img[3][kCifarDim * kCifarDim];
  float base[3];
  for (auto& b : base) b = static_cast<float>(stream.uniform(0.2, 0.8));
  for (int c = 0; c < 3; ++c) {
    std::fill(img[c], img[c] + n * n, base[c]);
  }
  const int n_waves = 2 + static_cast<int>(stream.next_u64() % 3);
  for (int wy = 0; wy < n_waves; ++wy) {
    const double fx = stream.uniform(-2.0, 2.0) / n;
    const double fy = stream.uniform(-2.0, 2.0) / n;
    const double phase = stream.uniform(0.0, 6.28318530717958647692);
    const double amp = stream.uniform(0.04, 0.22);
    float gain[3];
    for (auto& g : gain) g = static_cast<float>(stream.uniform(0.3, 1.0));
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        const float v = static_cast<float>(
            amp * std::cos(6.28318530717958647692 * (fx * x + fy * y) + phase));
        for (int c = 0; c < 3; ++c) img[c][y * n + x] += gain[c] * v;
      }
    }
  }
  const int n_shapes = 1 + static_cast<int>(stream.next_u64() % 3);
  for (int s = 0; s < n_shapes; ++s) {
    const double cx = stream.uniform(4.0, n - 4.0);
    const double cy = stream.uniform(4.0, n - 4.0);
    const double rx = stream.uniform(3.0, 12.0);
    const double ry = stream.uniform(3.0, 12.0);
    const double softness = stream.uniform(0.5, 2.0);
    float color[3];
    for (auto& c : color) c = static_cast<float>(stream.uniform(-0.45, 0.45));
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        const double dx = (x - cx) / rx;
        const double dy = (y - cy) / ry;
        const double dist = std::sqrt(dx * dx + dy * dy);
        const float mask =
            static_cast<float>(1.0 / (1.0 + std::exp((dist - 1.0) * 6.0 / softness)));
        for (int c = 0; c < 3; ++c) img[c][y * n + x] += color[c] * mask;
      }
    }
  }
  const double noise_sigma = stream.uniform(0.005, 0.03);
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < n * n; ++i) {
      float v = img[c][i] + static_cast<float>(stream.normal() * noise_sigma);
      v = std::min(1.0f, std::max(0.0f, v));
      out[c * n * n + i] = static_cast<uint8_t>(std::lround(v * 255.0f));
    }
  }
}

}  // namespace

void write_synthetic_cifar(const std::string& path, int64_t count, uint64_t seed) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  std::vector<uint8_t> record(kCifarRecord);
  for (int64_t i = 0; i < count; ++i) {
    RngStream stream = derive_stream(seed, "synthetic-image", static_cast<uint64_t>(i));
    record[0] = 0;
    render_synthetic(stream, record.data() + 1);
    os.write(reinterpret_cast<const char*>(record.data()), kCifarRecord);
  }
  if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace data
}  // namespace jscc
