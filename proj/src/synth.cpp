#include "ptq/synth.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "ptq/error.hpp"
#include "ptq/npy.hpp"

namespace fs = std::filesystem;

namespace ptq {

std::string_view to_string(SynthKind k) noexcept {
  switch (k) {
    case SynthKind::Gaussian: return "gaussian";
    case SynthKind::ShiftedGaussian: return "shifted-gaussian";
    case SynthKind::TwoSidedAsymmetric: return "two-sided-asymmetric";
    case SynthKind::Uniform: return "uniform";
  }
  return "gaussian";
}

SynthKind parse_synth_kind(std::string_view text) {
  if (text == "gaussian") return SynthKind::Gaussian;
  if (text == "shifted-gaussian") return SynthKind::ShiftedGaussian;
  if (text == "two-sided-asymmetric") return SynthKind::TwoSidedAsymmetric;
  if (text == "uniform") return SynthKind::Uniform;
  throw Error(Errc::InvalidSpec, "unknown synth kind '" + std::string(text) + "'");
}

std::uint64_t derive_seed(std::uint64_t parent, std::string_view name) noexcept {
  // FNV-1a over the name, folded into the parent and finished with splitmix64.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t z = parent ^ h;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Tensor synth_generate(const SynthSpec& spec) {
  return synth_generate(spec, {spec.n});
}

Tensor synth_generate(const SynthSpec& spec, std::vector<std::size_t> shape) {
  if (spec.n < 1) throw Error(Errc::InvalidSpec, "n must be >= 1");
  if (shape_product(shape) != spec.n) throw Error(Errc::InvalidSpec, "shape does not match n");
  if (spec.kind == SynthKind::Uniform) {
    if (!(spec.low < spec.high)) throw Error(Errc::InvalidSpec, "uniform needs low < high");
  } else if (!(spec.std > 0.0)) {
    throw Error(Errc::InvalidSpec, "std must be > 0");
  }
  if (spec.kind == SynthKind::TwoSidedAsymmetric && !(spec.left_scale > 0.0 && spec.right_scale > 0.0)) {
    throw Error(Errc::InvalidSpec, "side scales must be > 0");
  }

  std::mt19937_64 rng(spec.seed);
  std::vector<double> data(spec.n);
  if (spec.kind == SynthKind::Uniform) {
    std::uniform_real_distribution<double> dist(spec.low, spec.high);
    for (auto& v : data) v = dist(rng);
  } else {
    std::normal_distribution<double> dist(0.0, spec.std);
    for (auto& v : data) {
      double z = dist(rng);
      if (spec.kind == SynthKind::TwoSidedAsymmetric) z *= z < 0.0 ? spec.left_scale : spec.right_scale;
      v = spec.mean + z;
    }
  }
  return Tensor(std::move(shape), std::move(data));
}

SynthDumpSpec default_dump_spec() {
  SynthDumpSpec spec;
  SynthSpec normal;
  SynthSpec skewed;
  skewed.kind = SynthKind::TwoSidedAsymmetric;
  skewed.left_scale = 30.0;
  skewed.right_scale = 1.0;
  spec.tags = {{"layernorm_input", skewed},
               {"attention_input", normal},
               {"softmax_output", normal},
               {"ffn_input", normal},
               {"ffn_output", normal}};
  return spec;
}

DumpManifest write_synthetic_dump(const SynthDumpSpec& spec, const fs::path& dir) {
  if (spec.min_len < 1 || spec.min_len > spec.max_len || spec.hidden < 1) {
    throw Error(Errc::InvalidSpec, "need 1 <= min_len <= max_len and hidden >= 1");
  }
  std::error_code ec;
  fs::create_directories(dir / "tensors", ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + (dir / "tensors").string() + ": " + ec.message());

  std::mt19937_64 len_rng(derive_seed(spec.seed, "lengths"));
  std::uniform_int_distribution<std::size_t> len_dist(spec.min_len, spec.max_len);

  std::vector<ManifestEntry> entries;
  char name[32];
  for (std::size_t s = 0; s < spec.sequences; ++s) {
    std::size_t len = len_dist(len_rng);
    std::snprintf(name, sizeof name, "seq%05zu", s);
    for (const auto& tag : spec.tags) {
      std::string id = std::string(name) + "/" + tag.tag;
      SynthSpec values = tag.values;
      values.n = len * spec.hidden;
      values.seed = derive_seed(spec.seed, id);
      Tensor t = synth_generate(values, {len, spec.hidden});
      std::string rel = "tensors/" + std::string(name) + "_" + tag.tag + ".npy";
      save_npy(t, dir / rel, spec.precision);
      entries.push_back({id, fs::path(rel), rel, tag.tag, len});
    }
  }
  for (std::size_t w = 0; w < spec.weights; ++w) {
    std::snprintf(name, sizeof name, "weight%03zu", w);
    SynthSpec values;
    values.std = 0.02;
    values.n = spec.hidden * spec.hidden;
    values.seed = derive_seed(spec.seed, name);
    Tensor t = synth_generate(values, {spec.hidden, spec.hidden});
    std::string rel = "tensors/" + std::string(name) + ".npy";
    save_npy(t, dir / rel, spec.precision);
    entries.push_back({name, fs::path(rel), rel, "weight", 0});
  }
  DumpManifest manifest(std::move(entries), dir);
  save_manifest(manifest, dir / "manifest.json");
  return manifest;
}

}  // namespace ptq
