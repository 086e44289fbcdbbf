#ifndef JSCC_DATA_HPP_
#define JSCC_DATA_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "jscc/tensor.hpp"

namespace jscc {
namespace data {

/// (H, W, C) pixels in [0,1].
using ImageTensor = Tensor<float>;

struct Dataset {
  std::vector<ImageTensor> images;
  std::string split;
  std::string provenance;

  bool empty() const { return images.empty(); }
  int64_t size() const { return static_cast<int64_t>(images.size()); }
};

/// Reads CIFAR-10 binary batches: 3073-byte records of one label byte
/// (discarded) plus 3072 pixel bytes in planar R,G,B row-major order,
/// normalized to [0,1]. `limit` > 0 keeps only the first `limit` images.
Dataset load_cifar10_binary(const std::vector<std::string>& paths, int64_t limit = 0);

/// Loads raster images (binary PPM, P6/maxval 255) from a directory, skipping
/// images smaller than `crop`, and takes one seeded random crop per image.
/// Undecodable files are skipped with a warning on stderr.
Dataset load_image_dir(const std::string& path, int crop, int total_stride, uint64_t seed,
                       int64_t limit = 0);

/// round(x * (2^bit_depth - 1)), clamped; half-values round away from zero.
Tensor<int32_t> denormalize(const ImageTensor& x, int bit_depth);

/// Writes an (H,W,3) image as binary PPM at 8 bits.
void write_ppm(const std::string& path, const ImageTensor& image);

/// Deterministically generates `count` synthetic 32x32x3 images (smooth
/// gradients, soft shapes, light texture noise) in the exact CIFAR-10 binary
/// record layout. Useful as a self-contained training corpus for demos and
/// tests on machines without the real dataset.
void write_synthetic_cifar(const std::string& path, int64_t count, uint64_t seed);

}  // namespace data
}  // namespace jscc

#endif  // JSCC_DATA_HPP_
