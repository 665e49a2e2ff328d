#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ptq {

enum class Precision { F32, F64 };

/// Row-major tensor of 64-bit reals. The on-disk precision it was loaded
/// from is kept so writers can round-trip it.
class Tensor {
 public:
  Tensor() : data_(1, 0.0) {}
  Tensor(std::vector<std::size_t> shape, std::vector<double> data,
         Precision origin = Precision::F64);

  /// 1-D convenience constructor.
  static Tensor vector(std::vector<double> data, Precision origin = Precision::F64);
  static Tensor scalar(double value, Precision origin = Precision::F64);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::span<const double> data() const noexcept { return data_; }
  std::size_t size() const noexcept { return data_.size(); }
  Precision dtype_origin() const noexcept { return origin_; }

  double operator[](std::size_t i) const { return data_[i]; }

  /// Same shape and precision, new values.
  Tensor with_data(std::vector<double> data) const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
  Precision origin_ = Precision::F64;
};

std::size_t shape_product(const std::vector<std::size_t>& shape) noexcept;

}  // namespace ptq
