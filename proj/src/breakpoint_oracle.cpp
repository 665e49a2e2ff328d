#include "ptq/breakpoint_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ptq/error.hpp"
#include "ptq/golden_section.hpp"

namespace ptq {
namespace {

constexpr int kMaxIntegrationBits = 24;

double std_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// Phi(b) - Phi(a) using whichever of erf/erfc avoids cancellation.
double std_mass(double a, double b) {
  const double k = 1.0 / std::numbers::sqrt2;
  if (a >= 0.0) return 0.5 * (std::erfc(a * k) - std::erfc(b * k));
  if (b <= 0.0) return 0.5 * (std::erfc(-b * k) - std::erfc(-a * k));
  return 0.5 * (std::erf(b * k) - std::erf(a * k));
}

// Sum of cell errors for one affine grid whose input is confined to [lo, hi].
double grid_error(const UniformParams& params, double lo, double hi, const GaussianModel& g) {
  if (!(hi > lo)) return 0.0;
  if (params.degenerate) return gaussian_cell_error(lo, hi, params.r_l, g);
  if (params.bits > kMaxIntegrationBits) {
    throw Error(Errc::InvalidBitWidth, "expected-error integration supports at most " +
                                           std::to_string(kMaxIntegrationBits) + " bits");
  }
  const std::int64_t first = quantize(lo, params);
  const std::int64_t last = quantize(hi, params);
  double total = 0.0;
  for (std::int64_t c = first; c <= last; ++c) {
    double a = c == first ? lo : std::max(lo, params.offset + (static_cast<double>(c) - 0.5) * params.scale);
    double b = c == last ? hi : std::min(hi, params.offset + (static_cast<double>(c) + 0.5) * params.scale);
    if (b > a) total += gaussian_cell_error(a, b, dequantize(c, params), g);
  }
  return total;
}

void check_sigma(const GaussianModel& g) {
  if (!(g.sigma > 0.0) || !std::isfinite(g.sigma)) {
    throw Error(Errc::NonPositiveSigma, "sigma = " + std::to_string(g.sigma));
  }
}

}  // namespace

double gaussian_cell_error(double a, double b, double level, const GaussianModel& g) {
  const double alpha = (a - g.mean) / g.sigma;
  const double beta = (b - g.mean) / g.sigma;
  const double q = (level - g.mean) / g.sigma;
  // Standard-normal antiderivatives: x^2 phi -> Phi - x phi, x phi -> -phi.
  double value = (1.0 + q * q) * std_mass(alpha, beta) -
                 ((beta - 2.0 * q) * std_pdf(beta) - (alpha - 2.0 * q) * std_pdf(alpha));
  return std::max(0.0, value) * g.sigma * g.sigma;
}

double expected_mse(const UniformParams& params, const GaussianModel& g) {
  check_sigma(g);
  return grid_error(params, params.r_l, params.r_u, g);
}

double expected_mse(const PiecewiseParams& params, const GaussianModel& g) {
  check_sigma(g);
  return grid_error(params.lower_tail, params.r_l, params.p_l, g) +
         grid_error(params.central, params.p_l, params.p_u, g) +
         grid_error(params.upper_tail, params.p_u, params.r_u, g);
}

double expected_mse_at(int bits, double r_l, double r_u, Breakpoints bp, const GaussianModel& g) {
  return expected_mse(make_piecewise_params(bits, r_l, r_u, bp, g), g);
}

OracleResult breakpoints_oracle(double r_l, double r_u, const GaussianModel& g, int bits,
                                OracleMode mode) {
  check_sigma(g);
  const double c = g.mean;
  if (!(r_l < c && c < r_u)) {
    throw Error(Errc::InvalidSpec, "oracle needs r_l < mean < r_u");
  }
  const double tol = kOracleTolerance * g.sigma;
  auto objective = [&](double p_l, double p_u) {
    return expected_mse_at(bits, r_l, r_u, {p_l, p_u}, g);
  };

  if (mode == OracleMode::Auto) {
    double up = r_u - c;
    double down = c - r_l;
    mode = std::abs(up - down) <= 1e-12 * std::max(up, down) ? OracleMode::Symmetric
                                                             : OracleMode::Asymmetric;
  }

  OracleResult out;
  if (mode == OracleMode::Symmetric) {
    const double half = std::min(r_u - c, c - r_l);
    auto f = [&](double d) { return objective(c - d, c + d); };
    auto m = golden_section_minimize(f, 0.0, half, tol, kOracleMaxEvaluations);
    if (!m.converged) {
      throw Error(Errc::NonConvergence, "symmetric breakpoint search after " +
                                            std::to_string(m.evaluations) + " evaluations");
    }
    out = {c - m.x, c + m.x, m.fx, m.evaluations};
    return out;
  }

  // Coordinate descent from the midpoints of each side.
  double p_l = 0.5 * (r_l + c);
  double p_u = 0.5 * (c + r_u);
  std::size_t evals = 0;
  double best = objective(p_l, p_u);
  ++evals;
  while (true) {
    auto mu = golden_section_minimize([&](double x) { return objective(p_l, x); }, c, r_u, tol,
                                      kOracleMaxEvaluations - std::min(evals, kOracleMaxEvaluations));
    evals += mu.evaluations;
    auto ml = golden_section_minimize([&](double x) { return objective(x, mu.x); }, r_l, c, tol,
                                      kOracleMaxEvaluations - std::min(evals, kOracleMaxEvaluations));
    evals += ml.evaluations;
    if (!mu.converged || !ml.converged || evals > kOracleMaxEvaluations) {
      throw Error(Errc::NonConvergence,
                  "breakpoint coordinate search after " + std::to_string(evals) + " evaluations");
    }
    double shift = std::max(std::abs(mu.x - p_u), std::abs(ml.x - p_l));
    p_u = mu.x;
    p_l = ml.x;
    best = ml.fx;
    if (shift <= tol) break;
  }
  out = {p_l, p_u, best, evals};
  return out;
}

}  // namespace ptq
