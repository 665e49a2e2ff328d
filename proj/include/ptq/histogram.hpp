#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "ptq/tensor.hpp"

namespace ptq {

/// Equal-width histogram over [min, max] of the tensor. A constant tensor puts
/// everything in the first bin.
struct Histogram {
  double min = 0.0;
  double max = 0.0;
  std::vector<double> edges;  // bins + 1
  std::vector<std::uint64_t> counts;
};

Histogram histogram_export(const Tensor& t, std::size_t bins);
nlohmann::json histogram_to_json(const Histogram& h);

}  // namespace ptq
