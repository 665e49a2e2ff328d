#include "ptq/uniform.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ptq/error.hpp"

namespace ptq {

std::int64_t UniformParams::code_min() const noexcept {
  return is_signed ? -(levels / 2) : 0;
}

std::int64_t UniformParams::code_max() const noexcept {
  return is_signed ? levels / 2 - 1 : levels - 1;
}

namespace {

UniformParams build_params(int bits, int min_bits, double r_l, double r_u, bool is_signed) {
  if (bits < min_bits || bits > kMaxBits) {
    throw Error(Errc::InvalidBitWidth, "bit-width " + std::to_string(bits) + " outside [" +
                                           std::to_string(min_bits) + ", " +
                                           std::to_string(kMaxBits) + "]");
  }
  if (!std::isfinite(r_l) || !std::isfinite(r_u)) {
    throw Error(Errc::InvertedRange, "range bounds must be finite");
  }
  if (r_l > r_u) {
    throw Error(Errc::InvertedRange,
                "r_l " + std::to_string(r_l) + " > r_u " + std::to_string(r_u));
  }
  UniformParams p;
  p.bits = bits;
  p.r_l = r_l;
  p.r_u = r_u;
  p.levels = std::int64_t{1} << bits;
  p.is_signed = is_signed;
  p.offset = is_signed ? 0.0 : r_l;
  p.scale = (r_u - r_l) / static_cast<double>(p.levels - 1);
  p.degenerate = !(p.scale > 0.0);
  if (p.degenerate) p.scale = 0.0;
  return p;
}

}  // namespace

UniformParams make_uniform_params(int bits, double r_l, double r_u, bool is_signed) {
  return build_params(bits, kMinBits, r_l, r_u, is_signed);
}

UniformParams make_subrange_params(int bits, double r_l, double r_u) {
  return build_params(bits, 1, r_l, r_u, false);
}

double round_half_even(double x) noexcept {
  double fl = std::floor(x);
  double diff = x - fl;
  if (diff > 0.5) return fl + 1.0;
  if (diff < 0.5) return fl;
  return std::fmod(fl, 2.0) == 0.0 ? fl : fl + 1.0;
}

std::int64_t quantize(double r, const UniformParams& params) noexcept {
  if (params.degenerate) return 0;
  double clamped = std::min(std::max(r, params.r_l), params.r_u);
  double q = round_half_even((clamped - params.offset) / params.scale);
  q = std::clamp(q, static_cast<double>(params.code_min()), static_cast<double>(params.code_max()));
  return static_cast<std::int64_t>(q);
}

double dequantize(std::int64_t code, const UniformParams& params) {
  if (params.degenerate) {
    if (code != 0) throw Error(Errc::CodeOutOfDomain, "degenerate params only admit code 0");
    return params.r_l;
  }
  if (code < params.code_min() || code > params.code_max()) {
    throw Error(Errc::CodeOutOfDomain, "code " + std::to_string(code) + " outside [" +
                                           std::to_string(params.code_min()) + ", " +
                                           std::to_string(params.code_max()) + "]");
  }
  if (params.is_signed) return params.scale * static_cast<double>(code) + params.offset;
  // Unsigned grids span exactly [r_l, r_u]; pin the top code so the endpoint
  // survives rounding in s * (N - 1).
  if (code == params.code_max()) return params.r_u;
  return std::min(params.scale * static_cast<double>(code) + params.offset, params.r_u);
}

double fake_quantize(double r, const UniformParams& params) noexcept {
  return dequantize(quantize(r, params), params);
}

Tensor fake_quantize_tensor(const Tensor& t, const UniformParams& params) {
  std::vector<double> out(t.size());
  auto in = t.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fake_quantize(in[i], params);
  return t.with_data(std::move(out));
}

}  // namespace ptq
