#include "ptq/ablation.hpp"

#include <map>
#include <unordered_set>

#include "ptq/error.hpp"
#include "ptq/fs_util.hpp"

using json = nlohmann::json;

namespace ptq {
namespace {

std::optional<int> optional_bits(const json& item, const char* key) {
  if (!item.contains(key) || item[key].is_null()) return std::nullopt;
  if (item[key].is_string() && item[key].get<std::string>() == "fp") return std::nullopt;
  int bits = item[key].get<int>();
  if (bits < kMinBits || bits > 16) {
    throw Error(Errc::InvalidConfig, std::string(key) + " must be in 2..16 or \"fp\"");
  }
  return bits;
}

}  // namespace

AblationPlan parse_ablation_plan(const std::string& json_text) {
  AblationPlan plan;
  std::unordered_set<std::string> names;
  try {
    json doc = json::parse(json_text);
    for (const auto& item : doc.at("variants")) {
      AblationVariant v;
      v.name = item.at("name").get<std::string>();
      if (v.name.empty() || !names.insert(v.name).second) {
        throw Error(Errc::InvalidConfig, "variant names must be unique and non-empty: '" + v.name + "'");
      }
      for (const auto& tag : item.at("quantize_tags")) v.quantize_tags.insert(tag.get<std::string>());
      v.weight_bits = optional_bits(item, "weight_bits");
      v.act_bits = optional_bits(item, "act_bits");
      plan.variants.push_back(std::move(v));
    }
  } catch (const json::exception& ex) {
    throw Error(Errc::InvalidConfig, std::string("ablation plan: ") + ex.what());
  }
  return plan;
}

AblationPlan load_ablation_plan(const std::filesystem::path& path) {
  return parse_ablation_plan(read_file(path));
}

LoadedDump load_dump(const DumpManifest& manifest) {
  LoadedDump dump;
  dump.manifest = &manifest;
  dump.tensors.reserve(manifest.entries().size());
  for (const auto& e : manifest.entries()) dump.tensors.push_back(manifest.load_tensor(e.tensor_id));
  return dump;
}

std::vector<ErrorReport> run_ablation(const LoadedDump& dump, const AblationPlan& plan,
                                      const RangeRegistry& ranges, const QuantizerConfig& config) {
  const auto& entries = dump.manifest->entries();
  std::set<std::string> known_tags;
  for (const auto& e : entries) known_tags.insert(e.tag);

  for (const auto& v : plan.variants) {
    for (const auto& tag : v.quantize_tags) {
      if (!known_tags.count(tag)) {
        throw Error(Errc::UnknownTag, "variant '" + v.name + "' names tag '" + tag + "'");
      }
    }
  }

  std::vector<ErrorReport> reports;
  for (const auto& v : plan.variants) {
    std::map<std::string, MetricAccumulator> per_tag;
    MetricAccumulator total;
    std::optional<int> act_bits = v.act_bits ? v.act_bits : config.bits.act_bits;

    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& e = entries[i];
      const Tensor& t = dump.tensors[i];
      auto& acc = per_tag[e.tag];
      bool is_weight = e.tag == kWeightTag;
      if (is_weight && v.weight_bits) {
        acc.add(t, quantize_weight(t, *v.weight_bits).tensor);
      } else if (!is_weight && act_bits && v.quantize_tags.count(e.tag)) {
        auto range = ranges.find(e.tensor_id, e.tag);
        if (!range) {
          throw Error(Errc::MissingRange, "no calibrated range for tensor '" + e.tensor_id +
                                              "' (tag '" + e.tag + "')");
        }
        acc.add(t, quantize_activation(t, *range, *act_bits, config).tensor);
      } else {
        acc.add_exact(t);
      }
    }

    ErrorReport report;
    report.name = v.name;
    for (const auto& [tag, acc] : per_tag) {
      report.per_key[tag] = acc.result();
      total.merge(acc);
    }
    report.aggregate = total.result();
    json tags = json::array();
    for (const auto& tag : v.quantize_tags) tags.push_back(tag);
    report.config = config.to_json();
    report.config["variant"] = {{"name", v.name},
                                {"quantize_tags", tags},
                                {"weight_bits", v.weight_bits ? json(*v.weight_bits) : json("fp")},
                                {"act_bits", act_bits ? json(*act_bits) : json("fp")}};
    reports.push_back(std::move(report));
  }
  return reports;
}

std::vector<ErrorReport> run_ablation(const DumpManifest& manifest, const AblationPlan& plan,
                                      const RangeRegistry& ranges, const QuantizerConfig& config) {
  return run_ablation(load_dump(manifest), plan, ranges, config);
}

}  // namespace ptq
