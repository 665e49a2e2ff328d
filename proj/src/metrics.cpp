#include "ptq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ptq/error.hpp"

using json = nlohmann::json;

namespace ptq {

ErrorMetrics error_metrics(const Tensor& original, const Tensor& reconstructed) {
  MetricAccumulator acc;
  acc.add(original, reconstructed);
  return acc.result();
}

void MetricAccumulator::add(const Tensor& original, const Tensor& reconstructed) {
  if (original.shape() != reconstructed.shape()) {
    throw Error(Errc::ShapeMismatch, "original and reconstructed shapes differ");
  }
  auto a = original.data();
  auto b = reconstructed.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    squared_error_ += d * d;
    signal_ += a[i] * a[i];
    max_abs_ = std::max(max_abs_, std::abs(d));
  }
  count_ += a.size();
}

void MetricAccumulator::add_exact(const Tensor& original) {
  for (double v : original.data()) signal_ += v * v;
  count_ += original.size();
}

void MetricAccumulator::merge(const MetricAccumulator& other) {
  squared_error_ += other.squared_error_;
  signal_ += other.signal_;
  max_abs_ = std::max(max_abs_, other.max_abs_);
  count_ += other.count_;
}

ErrorMetrics MetricAccumulator::result() const {
  ErrorMetrics m;
  m.count = count_;
  m.max_abs = max_abs_;
  if (count_ == 0) {
    m.sqnr_db = std::numeric_limits<double>::infinity();
    return m;
  }
  m.mse = squared_error_ / static_cast<double>(count_);
  double power = signal_ / static_cast<double>(count_);
  if (m.mse == 0.0) {
    m.sqnr_db = std::numeric_limits<double>::infinity();
  } else if (power == 0.0) {
    m.sqnr_db = -std::numeric_limits<double>::infinity();
  } else {
    m.sqnr_db = 10.0 * std::log10(power / m.mse);
  }
  return m;
}

std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json metrics_to_json(const ErrorMetrics& m) {
  json sqnr = std::isinf(m.sqnr_db) ? json(format_real(m.sqnr_db)) : json(m.sqnr_db);
  return {{"mse", m.mse}, {"max_abs", m.max_abs}, {"sqnr_db", sqnr}, {"count", m.count}};
}

json report_to_json(const ErrorReport& report) {
  json per_key = json::object();
  for (const auto& [key, m] : report.per_key) per_key[key] = metrics_to_json(m);
  json config = report.config.is_null() ? json::object() : report.config;
  json doc = {{"version", kReportVersion},
              {"config", config},
              {"per_key", per_key},
              {"aggregate", metrics_to_json(report.aggregate)}};
  if (!report.name.empty()) doc["name"] = report.name;
  return doc;
}

}  // namespace ptq
