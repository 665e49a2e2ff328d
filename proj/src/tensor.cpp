#include "ptq/tensor.hpp"

#include <cmath>
#include <string>

#include "ptq/error.hpp"

namespace ptq {

std::size_t shape_product(const std::vector<std::size_t>& shape) noexcept {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data, Precision origin)
    : shape_(std::move(shape)), data_(std::move(data)), origin_(origin) {
  if (shape_product(shape_) != data_.size()) {
    throw Error(Errc::ShapeMismatch, "shape product " + std::to_string(shape_product(shape_)) +
                                         " != data length " + std::to_string(data_.size()));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw Error(Errc::NonFiniteValue, "element " + std::to_string(i) + " is not finite");
    }
  }
}

Tensor Tensor::vector(std::vector<double> data, Precision origin) {
  std::vector<std::size_t> shape{data.size()};
  return Tensor(std::move(shape), std::move(data), origin);
}

Tensor Tensor::scalar(double value, Precision origin) {
  return Tensor({}, {value}, origin);
}

Tensor Tensor::with_data(std::vector<double> data) const {
  return Tensor(shape_, std::move(data), origin_);
}

}  // namespace ptq
