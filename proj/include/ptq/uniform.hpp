#pragma once

#include <cstdint>

#include "ptq/tensor.hpp"

namespace ptq {

/// b-bit affine quantizer parameters.
///
/// Signed: z = 0, codes in [-2^(b-1), 2^(b-1) - 1].
/// Unsigned: z = r_l, codes in [0, 2^b - 1].
/// In both cases s = (r_u - r_l) / (2^b - 1). When r_l == r_u the scale is
/// zero (`degenerate`) and every input maps to code 0, dequantizing to r_l.
struct UniformParams {
  int bits = 8;
  double r_l = 0.0;
  double r_u = 0.0;
  double offset = 0.0;
  double scale = 0.0;
  std::int64_t levels = 256;
  bool is_signed = false;
  bool degenerate = false;

  std::int64_t code_min() const noexcept;
  std::int64_t code_max() const noexcept;

  friend bool operator==(const UniformParams&, const UniformParams&) = default;
};

inline constexpr int kMinBits = 2;
inline constexpr int kMaxBits = 31;

UniformParams make_uniform_params(int bits, double r_l, double r_u, bool is_signed);

// Unsigned grid that also admits a single bit (two levels: the endpoints).
// Used for the pieces of a piecewise quantizer.
UniformParams make_subrange_params(int bits, double r_l, double r_u);

/// Round-half-to-even, independent of the floating-point environment.
double round_half_even(double x) noexcept;

std::int64_t quantize(double r, const UniformParams& params) noexcept;
double dequantize(std::int64_t code, const UniformParams& params);
double fake_quantize(double r, const UniformParams& params) noexcept;

Tensor fake_quantize_tensor(const Tensor& t, const UniformParams& params);

}  // namespace ptq
