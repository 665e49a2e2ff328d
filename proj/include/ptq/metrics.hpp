#pragma once

#include <cstddef>
#include <map>
#include <string>

#include <json.hpp>

#include "ptq/tensor.hpp"

namespace ptq {

struct ErrorMetrics {
  double mse = 0.0;
  double max_abs = 0.0;
  /// +inf when mse == 0, -inf when the signal is all zeros but mse > 0.
  double sqnr_db = 0.0;
  std::size_t count = 0;
};

ErrorMetrics error_metrics(const Tensor& original, const Tensor& reconstructed);

/// Pools squared error and signal power across tensors.
class MetricAccumulator {
 public:
  void add(const Tensor& original, const Tensor& reconstructed);
  /// Counts values that were left untouched (zero error).
  void add_exact(const Tensor& original);
  void merge(const MetricAccumulator& other);
  ErrorMetrics result() const;

 private:
  double squared_error_ = 0.0;
  double signal_ = 0.0;
  double max_abs_ = 0.0;
  std::size_t count_ = 0;
};

nlohmann::json metrics_to_json(const ErrorMetrics& m);

/// Numbers print with 17 significant digits; infinities as "inf"/"-inf".
std::string format_real(double v);

struct ErrorReport {
  std::string name;
  std::map<std::string, ErrorMetrics> per_key;
  ErrorMetrics aggregate;
  nlohmann::json config;
};

inline constexpr int kReportVersion = 1;

nlohmann::json report_to_json(const ErrorReport& report);

}  // namespace ptq
