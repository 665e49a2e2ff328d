#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ptq/calibration.hpp"
#include "ptq/manifest.hpp"
#include "ptq/metrics.hpp"
#include "ptq/scheme.hpp"

namespace ptq {

struct AblationVariant {
  std::string name;
  std::set<std::string> quantize_tags;
  /// Weight-tagged tensors stay in full precision unless this is set.
  std::optional<int> weight_bits;
  /// Falls back to the quantizer config's activation bits.
  std::optional<int> act_bits;
};

struct AblationPlan {
  std::vector<AblationVariant> variants;
};

AblationPlan parse_ablation_plan(const std::string& json_text);
AblationPlan load_ablation_plan(const std::filesystem::path& path);

/// In-memory copy of every tensor in a manifest, loaded once for repeated runs.
struct LoadedDump {
  const DumpManifest* manifest = nullptr;
  std::vector<Tensor> tensors;  // parallel to manifest->entries()
};

LoadedDump load_dump(const DumpManifest& manifest);

/// One report per variant. Tensors whose tag is not selected pass through and
/// count as exact; per-key metrics are grouped by tag.
std::vector<ErrorReport> run_ablation(const LoadedDump& dump, const AblationPlan& plan,
                                      const RangeRegistry& ranges, const QuantizerConfig& config);
std::vector<ErrorReport> run_ablation(const DumpManifest& manifest, const AblationPlan& plan,
                                      const RangeRegistry& ranges, const QuantizerConfig& config);

}  // namespace ptq
