#pragma once

#include <cstddef>

#include "ptq/piecewise.hpp"
#include "ptq/uniform.hpp"

namespace ptq {

/// Integral of (r - level)^2 against the Gaussian density over [a, b].
double gaussian_cell_error(double a, double b, double level, const GaussianModel& g);

/// Expected squared error of the quantizer for r ~ N(mean, sigma^2) restricted
/// to the clipping range, summed cell by cell. Values outside [r_l, r_u] are
/// taken as already clipped and contribute nothing.
double expected_mse(const UniformParams& params, const GaussianModel& g);
double expected_mse(const PiecewiseParams& params, const GaussianModel& g);

/// Expected error of the piecewise quantizer at explicit breakpoints.
double expected_mse_at(int bits, double r_l, double r_u, Breakpoints bp, const GaussianModel& g);

enum class OracleMode { Auto, Symmetric, Asymmetric };

struct OracleResult {
  double p_l = 0.0;
  double p_u = 0.0;
  double expected_mse = 0.0;
  std::size_t evaluations = 0;
};

inline constexpr double kOracleTolerance = 1e-6;
inline constexpr std::size_t kOracleMaxEvaluations = 10000;

/// Numerically optimal breakpoints for Gaussian data. Symmetric ranges (about
/// the mean) search one mirrored parameter; otherwise p_l and p_u are searched
/// by alternating golden-section passes. Tolerance is in units of sigma.
/// Throws NonConvergence past kOracleMaxEvaluations objective calls.
OracleResult breakpoints_oracle(double r_l, double r_u, const GaussianModel& g, int bits = 8,
                                OracleMode mode = OracleMode::Auto);

}  // namespace ptq
