// Writes a synthetic image corpus in the CIFAR-10 binary layout, for running
// the training/evaluation pipeline on machines without the real dataset.
#include <CLI11.hpp>
#include <iostream>

#include "jscc/data.hpp"

int main(int argc, char** argv) {
  CLI::App app{"generate a synthetic CIFAR-format image corpus"};
  std::string out_path;
  int64_t count = 6000;
  uint64_t seed = 1;
  app.add_option("--out", out_path, "output .bin file")->required();
  app.add_option("--count", count, "number of images")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "generator seed");
  CLI11_PARSE(app, argc, argv);

  try {
    jscc::data::write_synthetic_cifar(out_path, count, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  std::cout << "wrote " << count << " images to " << out_path << "\n";
  return 0;
}
