#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ptq/ablation.hpp"
#include "ptq/calibration.hpp"
#include "ptq/metrics.hpp"
#include "ptq/scheme.hpp"

namespace ptq {

struct SweepAxes {
  std::vector<ClipStrategy> strategies{ClipStrategy::Median};
  std::vector<std::size_t> k_values{5};
  std::vector<int> bit_widths{8};
  std::vector<QuantScheme> schemes{QuantScheme::Piecewise};
  std::vector<std::size_t> calib_sizes{kDefaultCalibrationSize};
  std::vector<SamplingKind> sampling_modes{SamplingKind::Uniform};
};

struct SweepSpec {
  SweepAxes axes;
  /// Activation tags quantized in every cell; empty means every non-weight tag.
  std::set<std::string> quantize_tags;
  std::uint64_t seed = 0;
  std::size_t bins = 10;
  bool group_by_tag = true;
  BreakpointMode breakpoints = BreakpointMode::ClosedForm;
  double m = kDefaultBreakpointM;
  double n = kDefaultBreakpointN;

  nlohmann::json to_json() const;
};

SweepSpec parse_sweep_spec(const std::string& json_text);

struct SweepCell {
  ClipStrategy strategy{};
  std::size_t k = 0;
  int bits = 0;
  QuantScheme scheme{};
  std::size_t calib_size = 0;
  SamplingKind sampling{};
  std::uint64_t seed = 0;
  ErrorMetrics metrics;
  /// Empty on success. A failing cell does not stop the sweep.
  std::string error;

  std::string key() const;
};

struct SweepTable {
  std::vector<SweepCell> cells;
  nlohmann::json config;
};

/// Cartesian product of the axes. Each cell samples a calibration set with a
/// seed derived from (spec seed, cell key), calibrates, and measures the
/// aggregate reconstruction error over the whole dump.
SweepTable run_sweep(const DumpManifest& manifest, const SweepSpec& spec);
SweepTable run_sweep(const LoadedDump& dump, const SweepSpec& spec);

std::string sweep_to_csv(const SweepTable& table);
nlohmann::json sweep_to_json(const SweepTable& table);

}  // namespace ptq
