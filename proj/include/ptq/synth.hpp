#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ptq/manifest.hpp"
#include "ptq/tensor.hpp"

namespace ptq {

enum class SynthKind { Gaussian, ShiftedGaussian, TwoSidedAsymmetric, Uniform };

std::string_view to_string(SynthKind k) noexcept;
SynthKind parse_synth_kind(std::string_view text);

/// Seeded synthetic activations. TwoSidedAsymmetric scales negative normal
/// draws by left_scale and positive ones by right_scale, then adds the mean.
/// Uniform draws from [low, high].
struct SynthSpec {
  SynthKind kind = SynthKind::Gaussian;
  double mean = 0.0;
  double std = 1.0;
  double left_scale = 1.0;
  double right_scale = 1.0;
  double low = 0.0;
  double high = 1.0;
  std::size_t n = 1;
  std::uint64_t seed = 0;
};

Tensor synth_generate(const SynthSpec& spec);
/// Same draws as synth_generate, reshaped.
Tensor synth_generate(const SynthSpec& spec, std::vector<std::size_t> shape);

/// Stable 64-bit seed for a named stream derived from a parent seed.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view name) noexcept;

struct SynthTagSpec {
  std::string tag;
  SynthSpec values;  // n and seed are overridden per tensor
};

/// A population of per-sequence activation dumps plus optional weights.
struct SynthDumpSpec {
  std::size_t sequences = 200;
  std::size_t min_len = 16;
  std::size_t max_len = 256;
  std::size_t hidden = 8;
  std::size_t weights = 2;
  std::vector<SynthTagSpec> tags;
  std::uint64_t seed = 0;
  Precision precision = Precision::F32;
};

/// Five activation tags: layernorm_input drawn two-sided asymmetric with a 30x
/// negative side, the rest N(0, 1). The skew only approximates the dumped
/// pre-LayerNorm statistics; exact per-layer values are not available.
SynthDumpSpec default_dump_spec();

/// Writes tensors under dir/tensors and dir/manifest.json.
DumpManifest write_synthetic_dump(const SynthDumpSpec& spec, const std::filesystem::path& dir);

}  // namespace ptq
