#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>

#include "jscc/data.hpp"
#include "testutil.hpp"

using namespace jscc::data;

namespace {

void write_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream os(path, std::ios::binary);
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
}

std::vector<uint8_t> one_record(uint8_t label, uint8_t r, uint8_t g, uint8_t b) {
  std::vector<uint8_t> rec(3073, 0);
  rec[0] = label;
  for (int i = 0; i < 1024; ++i) {
    rec[1 + i] = r;
    rec[1 + 1024 + i] = g;
    rec[1 + 2048 + i] = b;
  }
  return rec;
}

}  // namespace

TEST_CASE("cifar loader decodes planar records") {
  testutil::TempDir dir("cifar");
  auto rec = one_record(7, 10, 20, 30);
  write_bytes(dir.str("one.bin"), rec);

  Dataset ds = load_cifar10_binary({dir.str("one.bin")});
  REQUIRE(ds.size() == 1);
  const ImageTensor& img = ds.images[0];
  CHECK(img.shape() == std::vector<int>{32, 32, 3});
  CHECK(img.at(0, 0, 0) == doctest::Approx(10.0 / 255.0));
  CHECK(img.at(5, 9, 1) == doctest::Approx(20.0 / 255.0));
  CHECK(img.at(31, 31, 2) == doctest::Approx(30.0 / 255.0));
}

TEST_CASE("cifar loader normalizes 255 to one") {
  testutil::TempDir dir("cifar");
  auto rec = one_record(0, 255, 255, 255);
  write_bytes(dir.str("ones.bin"), rec);
  Dataset ds = load_cifar10_binary({dir.str("ones.bin")});
  REQUIRE(ds.size() == 1);
  for (int64_t i = 0; i < ds.images[0].numel(); ++i) CHECK(ds.images[0][i] == 1.0f);
}

TEST_CASE("cifar loader rejects truncated files with the byte offset") {
  testutil::TempDir dir("cifar");
  std::vector<uint8_t> bad(3072, 0);
  write_bytes(dir.str("bad.bin"), bad);
  CHECK_THROWS_WITH_AS(load_cifar10_binary({dir.str("bad.bin")}),
                       doctest::Contains("truncated record"), std::runtime_error);
  CHECK_THROWS_WITH_AS(load_cifar10_binary({dir.str("bad.bin")}),
                       doctest::Contains("byte offset"), std::runtime_error);
}

TEST_CASE("cifar loader honors limits and is deterministic") {
  testutil::TempDir dir("cifar");
  write_synthetic_cifar(dir.str("synth.bin"), 20, 42);
  Dataset a = load_cifar10_binary({dir.str("synth.bin")}, 10);
  Dataset b = load_cifar10_binary({dir.str("synth.bin")}, 10);
  REQUIRE(a.size() == 10);
  REQUIRE(b.size() == 10);
  for (int i = 0; i < 10; ++i) {
    for (int64_t j = 0; j < a.images[static_cast<size_t>(i)].numel(); ++j) {
      CHECK(a.images[static_cast<size_t>(i)][j] == b.images[static_cast<size_t>(i)][j]);
    }
  }
}

TEST_CASE("loaded pixels always sit in [0,1] for random blobs") {
  testutil::TempDir dir("cifar");
  jscc::RngStream stream(17);
  std::vector<uint8_t> blob(3073 * 5);
  for (auto& byte : blob) byte = static_cast<uint8_t>(stream.next_u64() & 0xff);
  write_bytes(dir.str("blob.bin"), blob);
  Dataset ds = load_cifar10_binary({dir.str("blob.bin")});
  REQUIRE(ds.size() == 5);
  for (const auto& img : ds.images) {
    for (int64_t i = 0; i < img.numel(); ++i) {
      CHECK(img[i] >= 0.0f);
      CHECK(img[i] <= 1.0f);
    }
  }
}

TEST_CASE("full cifar split sizes when the real set is present") {
  const char* root = std::getenv("JSCC_CIFAR10_DIR");
  if (root == nullptr) return;  // real distribution not installed here
  std::vector<std::string> train_paths;
  for (int i = 1; i <= 5; ++i) {
    train_paths.push_back(std::string(root) + "/data_batch_" + std::to_string(i) + ".bin");
  }
  Dataset train = load_cifar10_binary(train_paths);
  Dataset test = load_cifar10_binary({std::string(root) + "/test_batch.bin"});
  CHECK(train.size() == 50000);
  CHECK(test.size() == 10000);
}

TEST_CASE("image directory loader") {
  testutil::TempDir dir("ppm");
  // A 200x150 gradient image.
  ImageTensor big({150, 200, 3});
  for (int y = 0; y < 150; ++y) {
    for (int x = 0; x < 200; ++x) {
      big.at(y, x, 0) = static_cast<float>(x) / 200.0f;
      big.at(y, x, 1) = static_cast<float>(y) / 150.0f;
      big.at(y, x, 2) = 0.25f;
    }
  }
  write_ppm(dir.str("big.ppm"), big);
  // Too small for the crop: skipped by the size filter.
  ImageTensor small_img({64, 64, 3});
  write_ppm(dir.str("small.ppm"), small_img);
  // Undecodable: skipped with a warning.
  std::ofstream(dir.str("junk.ppm")) << "not a ppm";

  SUBCASE("crops, filters, and stays deterministic") {
    Dataset a = load_image_dir(dir.str(), 128, 4, 9);
    REQUIRE(a.size() == 1);
    CHECK(a.images[0].shape() == std::vector<int>{128, 128, 3});
    Dataset b = load_image_dir(dir.str(), 128, 4, 9);
    for (int64_t j = 0; j < a.images[0].numel(); ++j) {
      CHECK(a.images[0][j] == b.images[0][j]);
    }
  }

  SUBCASE("crop must match the architecture stride") {
    CHECK_THROWS_WITH_AS(load_image_dir(dir.str(), 100, 4, 9),
                         doctest::Contains("must be a multiple of 4"), std::invalid_argument);
  }

  SUBCASE("an empty result is an error") {
    testutil::TempDir empty("ppm_empty");
    std::ofstream(empty.str("junk.bin")) << "garbage";
    CHECK_THROWS_AS(load_image_dir(empty.str(), 128, 4, 9), std::runtime_error);
  }
}

TEST_CASE("denormalize endpoints, rounding, and round trip") {
  ImageTensor x({1, 1, 3}, {0.0f, 1.0f, 0.5f});
  auto q = denormalize(x, 8);
  CHECK(q[0] == 0);
  CHECK(q[1] == 255);
  CHECK(q[2] == 128);  // round half away from zero

  jscc::RngStream stream(23);
  ImageTensor img = testutil::random_tensor<float>({8, 8, 3}, stream, 0.0, 1.0);
  auto qq = denormalize(img, 8);
  for (int64_t i = 0; i < img.numel(); ++i) {
    const float back = static_cast<float>(qq[i]) / 255.0f;
    CHECK(std::abs(back - img[i]) <= 1.0f / 255.0f);
  }
}

TEST_CASE("synthetic corpus is deterministic and well formed") {
  testutil::TempDir dir("synth");
  write_synthetic_cifar(dir.str("a.bin"), 8, 123);
  write_synthetic_cifar(dir.str("b.bin"), 8, 123);
  std::ifstream fa(dir.str("a.bin"), std::ios::binary);
  std::ifstream fb(dir.str("b.bin"), std::ios::binary);
  const std::string ba((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  const std::string bb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(ba.size() == 8 * 3073);
  CHECK(ba == bb);

  Dataset ds = load_cifar10_binary({dir.str("a.bin")});
  CHECK(ds.size() == 8);
}
