#include "ptq/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ptq/breakpoint_oracle.hpp"
#include "ptq/error.hpp"

namespace ptq {
namespace {

double log_rule(double distance, const GaussianModel& g, double m, double n) {
  double arg = m * (distance / g.sigma) + n;
  if (!(arg > 0.0)) {
    throw Error(Errc::LogDomainError, "m * t + n = " + std::to_string(arg) + " for t = " +
                                          std::to_string(distance / g.sigma));
  }
  return g.sigma * std::log(arg);
}

}  // namespace

Breakpoints breakpoints_closed_form(double r_l, double r_u, const GaussianModel& gaussian,
                                    double m, double n) {
  if (!(gaussian.sigma > 0.0) || !std::isfinite(gaussian.sigma)) {
    throw Error(Errc::NonPositiveSigma, "sigma = " + std::to_string(gaussian.sigma));
  }
  if (r_l > r_u) throw Error(Errc::InvertedRange, "r_l > r_u");

  const double c = gaussian.mean;
  Breakpoints bp;
  bp.p_u = r_u > c ? c + log_rule(r_u - c, gaussian, m, n) : r_u;
  bp.p_l = r_l < c ? c - log_rule(c - r_l, gaussian, m, n) : r_l;
  bp.p_u = std::clamp(bp.p_u, r_l, r_u);
  bp.p_l = std::clamp(bp.p_l, r_l, r_u);
  if (bp.p_l > bp.p_u) {
    throw Error(Errc::BreakpointOrderViolation,
                "p_l " + std::to_string(bp.p_l) + " > p_u " + std::to_string(bp.p_u) +
                    " for range [" + std::to_string(r_l) + ", " + std::to_string(r_u) + "]");
  }
  return bp;
}

PiecewiseParams make_piecewise_params(int bits, double r_l, double r_u, Breakpoints bp,
                                      const GaussianModel& gaussian, double m, double n) {
  if (bits < kMinBits || bits > kMaxBits) {
    throw Error(Errc::InvalidBitWidth, "bit-width " + std::to_string(bits));
  }
  if (!(r_l < r_u)) throw Error(Errc::InvertedRange, "piecewise range needs r_l < r_u");
  if (!(r_l <= bp.p_l && bp.p_l <= bp.p_u && bp.p_u <= r_u)) {
    throw Error(Errc::BreakpointOrderViolation, "need r_l <= p_l <= p_u <= r_u");
  }
  PiecewiseParams p;
  p.bits = bits;
  p.r_l = r_l;
  p.r_u = r_u;
  p.p_l = bp.p_l;
  p.p_u = bp.p_u;
  p.gaussian = gaussian;
  p.m = m;
  p.n = n;
  p.central = make_subrange_params(bits - 1, bp.p_l, bp.p_u);
  p.lower_tail = make_subrange_params(bits - 1, r_l, bp.p_l);
  p.upper_tail = make_subrange_params(bits - 1, bp.p_u, r_u);
  return p;
}

PiecewiseParams make_piecewise_params(int bits, double r_l, double r_u,
                                      const GaussianModel& gaussian, BreakpointMode mode,
                                      double m, double n) {
  if (bits < kMinBits || bits > kMaxBits) {
    throw Error(Errc::InvalidBitWidth, "bit-width " + std::to_string(bits));
  }
  if (!(r_l < r_u)) throw Error(Errc::InvertedRange, "piecewise range needs r_l < r_u");
  Breakpoints bp;
  if (mode == BreakpointMode::ClosedForm) {
    bp = breakpoints_closed_form(r_l, r_u, gaussian, m, n);
  } else {
    auto result = breakpoints_oracle(r_l, r_u, gaussian, bits);
    bp = {result.p_l, result.p_u};
  }
  return make_piecewise_params(bits, r_l, r_u, bp, gaussian, m, n);
}

Piece select_piece(double clamped, const PiecewiseParams& params) noexcept {
  if (clamped < params.p_l) return Piece::LowerTail;
  if (clamped > params.p_u) return Piece::UpperTail;
  return Piece::Central;
}

const UniformParams& piece_params(Piece piece, const PiecewiseParams& params) noexcept {
  switch (piece) {
    case Piece::LowerTail: return params.lower_tail;
    case Piece::UpperTail: return params.upper_tail;
    case Piece::Central: break;
  }
  return params.central;
}

PiecewiseCode pw_quantize(double r, const PiecewiseParams& params) noexcept {
  double clamped = std::min(std::max(r, params.r_l), params.r_u);
  Piece piece = select_piece(clamped, params);
  return {piece, quantize(clamped, piece_params(piece, params))};
}

double pw_dequantize(const PiecewiseCode& code, const PiecewiseParams& params) {
  return dequantize(code.code, piece_params(code.piece, params));
}

double pw_fake_quantize(double r, const PiecewiseParams& params) noexcept {
  return pw_dequantize(pw_quantize(r, params), params);
}

Tensor pw_fake_quantize_tensor(const Tensor& t, const PiecewiseParams& params) {
  std::vector<double> out(t.size());
  auto in = t.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = pw_fake_quantize(in[i], params);
  return t.with_data(std::move(out));
}

}  // namespace ptq
