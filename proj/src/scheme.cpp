#include "ptq/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ptq/error.hpp"
#include "ptq/uniform.hpp"

using json = nlohmann::json;

namespace ptq {
namespace {

std::optional<int> parse_bits_field(std::string_view text, std::string_view whole) {
  if (text == "fp") return std::nullopt;
  if (text.empty() || text.size() > 2 ||
      !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(Errc::InvalidConfig, "bad bit spec '" + std::string(whole) + "'");
  }
  int bits = std::stoi(std::string(text));
  if (bits < 2 || bits > 16) {
    throw Error(Errc::InvalidConfig, "bit-width in '" + std::string(whole) + "' must be in 2..16 or fp");
  }
  return bits;
}

}  // namespace

std::string_view to_string(QuantScheme s) noexcept {
  switch (s) {
    case QuantScheme::UniformSymmetric: return "uniform-symmetric";
    case QuantScheme::UniformAsymmetric: return "uniform-asymmetric";
    case QuantScheme::Piecewise: return "piecewise";
  }
  return "piecewise";
}

QuantScheme parse_quant_scheme(std::string_view text) {
  if (text == "uniform-symmetric") return QuantScheme::UniformSymmetric;
  if (text == "uniform-asymmetric") return QuantScheme::UniformAsymmetric;
  if (text == "piecewise") return QuantScheme::Piecewise;
  throw Error(Errc::InvalidConfig, "unknown scheme '" + std::string(text) + "'");
}

BitSpec parse_bit_spec(std::string_view text) {
  if (text.size() < 4 || text.front() != 'W') {
    throw Error(Errc::InvalidConfig, "bit spec must look like W8A8, got '" + std::string(text) + "'");
  }
  auto a = text.find('A');
  if (a == std::string_view::npos) {
    throw Error(Errc::InvalidConfig, "bit spec must look like W8A8, got '" + std::string(text) + "'");
  }
  BitSpec spec;
  spec.weight_bits = parse_bits_field(text.substr(1, a - 1), text);
  spec.act_bits = parse_bits_field(text.substr(a + 1), text);
  return spec;
}

std::string to_string(const BitSpec& bits) {
  auto field = [](const std::optional<int>& b) { return b ? std::to_string(*b) : std::string("fp"); };
  return "W" + field(bits.weight_bits) + "A" + field(bits.act_bits);
}

json QuantizerConfig::to_json() const {
  return {{"scheme", std::string(to_string(scheme))},
          {"bits", to_string(bits)},
          {"breakpoints", breakpoints == BreakpointMode::ClosedForm ? "closed-form" : "oracle"},
          {"m", m},
          {"n", n}};
}

json uniform_params_json(const UniformParams& p, QuantScheme scheme) {
  return {{"scheme", std::string(to_string(scheme))},
          {"b", p.bits},
          {"r_l", p.r_l},
          {"r_u", p.r_u},
          {"s", p.scale},
          {"z", p.offset},
          {"signed", p.is_signed}};
}

json piecewise_params_json(const PiecewiseParams& p, BreakpointMode mode) {
  return {{"scheme", "piecewise"},
          {"b", p.bits},
          {"r_l", p.r_l},
          {"r_u", p.r_u},
          {"p_l", p.p_l},
          {"p_u", p.p_u},
          {"sigma", p.gaussian.sigma},
          {"mean", p.gaussian.mean},
          {"m", p.m},
          {"n", p.n},
          {"breakpoints", mode == BreakpointMode::ClosedForm ? "closed-form" : "oracle"}};
}

QuantOutcome quantize_activation(const Tensor& t, const RangeEstimate& range, int bits,
                                 const QuantizerConfig& config) {
  switch (config.scheme) {
    case QuantScheme::UniformSymmetric: {
      // z = 0 grids are centred on zero, so the clip range is mirrored.
      double bound = std::max(std::abs(range.r_l), std::abs(range.r_u));
      auto p = make_uniform_params(bits, -bound, bound, true);
      return {fake_quantize_tensor(t, p), uniform_params_json(p, config.scheme)};
    }
    case QuantScheme::UniformAsymmetric: {
      auto p = make_uniform_params(bits, range.r_l, range.r_u, false);
      return {fake_quantize_tensor(t, p), uniform_params_json(p, config.scheme)};
    }
    case QuantScheme::Piecewise: {
      if (!(range.r_l < range.r_u) || !(range.stddev > 0.0)) {
        auto p = make_uniform_params(bits, range.r_l, range.r_u, false);
        json params = uniform_params_json(p, QuantScheme::UniformAsymmetric);
        params["fallback"] = "degenerate range or zero spread; piecewise not applicable";
        return {fake_quantize_tensor(t, p), params};
      }
      GaussianModel g{range.mean, range.stddev};
      // The oracle searches each side of the mean; with the mean outside the
      // clip range only the closed form is defined.
      BreakpointMode mode = config.breakpoints;
      if (mode == BreakpointMode::Oracle && !(range.r_l < g.mean && g.mean < range.r_u)) {
        mode = BreakpointMode::ClosedForm;
      }
      auto p = make_piecewise_params(bits, range.r_l, range.r_u, g, mode, config.m, config.n);
      return {pw_fake_quantize_tensor(t, p), piecewise_params_json(p, mode)};
    }
  }
  throw Error(Errc::InvalidConfig, "unhandled scheme");
}

QuantOutcome quantize_weight(const Tensor& t, int bits) {
  if (bits < kMinBits || bits > kMaxBits) {
    throw Error(Errc::InvalidBitWidth, "weight bit-width " + std::to_string(bits));
  }
  double bound = 0.0;
  for (double v : t.data()) bound = std::max(bound, std::abs(v));
  // Restricted symmetric grid: codes in [-qmax, qmax], the outermost pinned to
  // +-bound so a second pass recovers the same bound and scale.
  const std::int64_t qmax = (std::int64_t{1} << (bits - 1)) - 1;
  const double scale = bound / static_cast<double>(qmax);
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(scale > 0.0)) {
      out[i] = 0.0;
      continue;
    }
    double c = std::clamp(round_half_even(t[i] / scale), -static_cast<double>(qmax),
                          static_cast<double>(qmax));
    out[i] = std::abs(c) == static_cast<double>(qmax) ? std::copysign(bound, c) : c * scale;
  }
  nlohmann::json params = {{"scheme", "uniform-symmetric"},
                           {"b", bits},
                           {"r_l", -bound},
                           {"r_u", bound},
                           {"scale", scale},
                           {"zero_point", 0},
                           {"code_min", -qmax},
                           {"code_max", qmax}};
  return {t.with_data(std::move(out)), std::move(params)};
}

}  // namespace ptq
