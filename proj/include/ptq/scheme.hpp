#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ptq/calibration.hpp"
#include "ptq/piecewise.hpp"
#include "ptq/tensor.hpp"

namespace ptq {

inline constexpr std::string_view kWeightTag = "weight";

enum class QuantScheme { UniformSymmetric, UniformAsymmetric, Piecewise };

std::string_view to_string(QuantScheme s) noexcept;
QuantScheme parse_quant_scheme(std::string_view text);

/// "W8A8", "W8Afp", "WfpA6". nullopt means leave unquantized.
struct BitSpec {
  std::optional<int> weight_bits = 8;
  std::optional<int> act_bits = 8;

  friend bool operator==(const BitSpec&, const BitSpec&) = default;
};

BitSpec parse_bit_spec(std::string_view text);
std::string to_string(const BitSpec& bits);

/// How activations are quantized. Weights always use the signed symmetric
/// grid over [-max|w|, max|w|].
struct QuantizerConfig {
  QuantScheme scheme = QuantScheme::Piecewise;
  BitSpec bits;
  BreakpointMode breakpoints = BreakpointMode::ClosedForm;
  double m = kDefaultBreakpointM;
  double n = kDefaultBreakpointN;

  nlohmann::json to_json() const;
};

struct QuantOutcome {
  Tensor tensor;
  /// Sidecar description of the parameters actually used.
  nlohmann::json params;
};

QuantOutcome quantize_activation(const Tensor& t, const RangeEstimate& range, int bits,
                                 const QuantizerConfig& config);
QuantOutcome quantize_weight(const Tensor& t, int bits);

nlohmann::json uniform_params_json(const UniformParams& p, QuantScheme scheme);
nlohmann::json piecewise_params_json(const PiecewiseParams& p, BreakpointMode mode);

}  // namespace ptq
