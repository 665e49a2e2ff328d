#pragma once

#include <cstdint>
#include <vector>

#include "ptq/tensor.hpp"
#include "ptq/uniform.hpp"

namespace ptq {

inline constexpr double kDefaultBreakpointM = 0.8614;
inline constexpr double kDefaultBreakpointN = 0.6079;

/// Location/scale of the Gaussian the breakpoint rules assume.
struct GaussianModel {
  double mean = 0.0;
  double sigma = 1.0;
};

enum class BreakpointMode { ClosedForm, Oracle };

struct Breakpoints {
  double p_l = 0.0;
  double p_u = 0.0;
};

/// Two-region piecewise linear quantizer: a central piece [p_l, p_u] and
/// tail pieces [r_l, p_l) and (p_u, r_u], each an unsigned (b-1)-bit affine
/// grid whose offset is the piece's lower bound.
struct PiecewiseParams {
  int bits = 8;
  double r_l = 0.0;
  double r_u = 0.0;
  double p_l = 0.0;
  double p_u = 0.0;
  GaussianModel gaussian;
  double m = kDefaultBreakpointM;
  double n = kDefaultBreakpointN;
  UniformParams central;
  UniformParams lower_tail;
  UniformParams upper_tail;
};

enum class Piece : std::uint8_t { Central, LowerTail, UpperTail };

struct PiecewiseCode {
  Piece piece = Piece::Central;
  std::int64_t code = 0;

  friend bool operator==(const PiecewiseCode&, const PiecewiseCode&) = default;
};

/// Log-shaped breakpoint rule p = ln(m * t + n), applied to the normalized
/// distance t = |r - mean| / sigma on each side and mapped back. A side that
/// does not extend past the mean gets no tail. Results are clamped to
/// [r_l, r_u].
Breakpoints breakpoints_closed_form(double r_l, double r_u, const GaussianModel& gaussian,
                                    double m = kDefaultBreakpointM,
                                    double n = kDefaultBreakpointN);

/// Builds the three sub-quantizers for explicit breakpoints.
PiecewiseParams make_piecewise_params(int bits, double r_l, double r_u, Breakpoints breakpoints,
                                      const GaussianModel& gaussian = {},
                                      double m = kDefaultBreakpointM,
                                      double n = kDefaultBreakpointN);

/// Computes breakpoints with the chosen rule, then builds the sub-quantizers.
PiecewiseParams make_piecewise_params(int bits, double r_l, double r_u,
                                      const GaussianModel& gaussian, BreakpointMode mode,
                                      double m = kDefaultBreakpointM,
                                      double n = kDefaultBreakpointN);

Piece select_piece(double clamped, const PiecewiseParams& params) noexcept;
const UniformParams& piece_params(Piece piece, const PiecewiseParams& params) noexcept;

PiecewiseCode pw_quantize(double r, const PiecewiseParams& params) noexcept;
double pw_dequantize(const PiecewiseCode& code, const PiecewiseParams& params);
double pw_fake_quantize(double r, const PiecewiseParams& params) noexcept;

Tensor pw_fake_quantize_tensor(const Tensor& t, const PiecewiseParams& params);

}  // namespace ptq
