#ifndef JSCC_TENSOR_HPP_
#define JSCC_TENSOR_HPP_

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace jscc {

/// Dense row-major tensor of rank 1..4. Feature maps use (N, H, W, C) with
/// the channel dimension contiguous in memory.
template <typename S>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    check_shape();
    data_.assign(static_cast<size_t>(numel()), S(0));
  }

  Tensor(std::vector<int> shape, std::vector<S> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape();
    if (static_cast<int64_t>(data_.size()) != numel()) {
      throw std::invalid_argument("tensor data size does not match shape");
    }
  }

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

  static Tensor full(std::vector<int> shape, S v) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), v);
    return t;
  }

  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
  const std::vector<int>& shape() const { return shape_; }

  int64_t numel() const {
    int64_t n = 1;
    for (int d : shape_) n *= d;
    return shape_.empty() ? 0 : n;
  }

  bool empty() const { return shape_.empty(); }

  S* data() { return data_.data(); }
  const S* data() const { return data_.data(); }
  std::vector<S>& vec() { return data_; }
  const std::vector<S>& vec() const { return data_; }

  S& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  const S& operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  /// Rank-4 accessor (n, y, x, c).
  S& at(int n, int y, int x, int c) { return data_[offset4(n, y, x, c)]; }
  const S& at(int n, int y, int x, int c) const { return data_[offset4(n, y, x, c)]; }

  /// Rank-3 accessor (y, x, c).
  S& at(int y, int x, int c) { return data_[offset3(y, x, c)]; }
  const S& at(int y, int x, int c) const { return data_[offset3(y, x, c)]; }

  /// Rank-2 accessor (r, c).
  S& at(int r, int c) { return data_[offset2(r, c)]; }
  const S& at(int r, int c) const { return data_[offset2(r, c)]; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  /// Returns a tensor sharing no storage but holding the same values with a
  /// new shape of identical element count.
  Tensor reshaped(std::vector<int> shape) const {
    Tensor t(std::move(shape), data_);
    return t;
  }

  std::string shape_str() const {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < shape_.size(); ++i) {
      if (i) os << ",";
      os << shape_[i];
    }
    os << ")";
    return os.str();
  }

 private:
  void check_shape() const {
    if (shape_.empty() || shape_.size() > 4) {
      throw std::invalid_argument("tensor rank must be 1..4");
    }
    for (int d : shape_) {
      if (d < 1) throw std::invalid_argument("tensor dims must be >= 1");
    }
  }

  size_t offset4(int n, int y, int x, int c) const {
    return static_cast<size_t>(((static_cast<int64_t>(n) * shape_[1] + y) * shape_[2] + x) *
                                   shape_[3] +
                               c);
  }
  size_t offset3(int y, int x, int c) const {
    return static_cast<size_t>((static_cast<int64_t>(y) * shape_[1] + x) * shape_[2] + c);
  }
  size_t offset2(int r, int c) const {
    return static_cast<size_t>(static_cast<int64_t>(r) * shape_[1] + c);
  }

  std::vector<int> shape_;
  std::vector<S> data_;
};

}  // namespace jscc

#endif  // JSCC_TENSOR_HPP_
