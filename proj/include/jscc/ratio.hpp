#ifndef JSCC_RATIO_HPP_
#define JSCC_RATIO_HPP_

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace jscc {

/// Exact rational, used for bandwidth ratios R = k/n.
struct Ratio {
  int64_t num = 0;
  int64_t den = 1;

  Ratio() = default;
  Ratio(int64_t n, int64_t d) : num(n), den(d) {
    if (den == 0) throw std::invalid_argument("ratio denominator is zero");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  bool operator==(const Ratio& o) const { return num == o.num && den == o.den; }

  std::string str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
  }

  static Ratio parse(const std::string& text) {
    auto slash = text.find('/');
    try {
      if (slash == std::string::npos) {
        return Ratio(std::stoll(text), 1);
      }
      return Ratio(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
    } catch (const std::exception&) {
      throw std::invalid_argument("cannot parse ratio '" + text + "'");
    }
  }
};

}  // namespace jscc

#endif  // JSCC_RATIO_HPP_
