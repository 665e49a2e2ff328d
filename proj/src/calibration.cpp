#include "ptq/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include <json.hpp>

#include "ptq/error.hpp"
#include "ptq/fs_util.hpp"

using json = nlohmann::json;

namespace ptq {
namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of_sorted(std::span<const double> v) {
  std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double reduce(std::span<const double> sorted, ClipStrategy s) {
  return s == ClipStrategy::Average ? mean_of(sorted) : median_of_sorted(sorted);
}

}  // namespace

std::string_view to_string(ClipStrategy s) noexcept {
  return s == ClipStrategy::Median ? "median" : "average";
}

ClipStrategy parse_clip_strategy(std::string_view text) {
  if (text == "median") return ClipStrategy::Median;
  if (text == "average") return ClipStrategy::Average;
  throw Error(Errc::InvalidConfig, "unknown clip strategy '" + std::string(text) + "'");
}

std::string_view to_string(SamplingKind k) noexcept {
  switch (k) {
    case SamplingKind::Random: return "random";
    case SamplingKind::PreferShort: return "prefer-short";
    case SamplingKind::PreferLong: return "prefer-long";
    case SamplingKind::Uniform: return "uniform";
  }
  return "uniform";
}

SamplingKind parse_sampling_kind(std::string_view text) {
  if (text == "random") return SamplingKind::Random;
  if (text == "prefer-short") return SamplingKind::PreferShort;
  if (text == "prefer-long") return SamplingKind::PreferLong;
  if (text == "uniform") return SamplingKind::Uniform;
  throw Error(Errc::InvalidConfig, "unknown sampling mode '" + std::string(text) + "'");
}

RangeEstimate estimate_range(std::span<const double> samples, const ClipConfig& config) {
  const std::size_t n = samples.size();
  if (n == 0) throw Error(Errc::EmptySamples, "no calibration values");
  if (config.k < 1) throw Error(Errc::InvalidConfig, "top-k must be >= 1");
  if (config.k > n) {
    throw Error(Errc::KExceedsSamples,
                "k = " + std::to_string(config.k) + " but only " + std::to_string(n) + " samples");
  }
  for (double v : samples) {
    if (!std::isfinite(v)) throw Error(Errc::NonFiniteValue, "calibration sample is not finite");
  }

  const std::size_t k = config.k;
  std::vector<double> work(samples.begin(), samples.end());
  std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(n - k), work.end());
  std::vector<double> top(work.begin() + static_cast<std::ptrdiff_t>(n - k), work.end());
  std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(k - 1), work.end());
  std::vector<double> bottom(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(top.begin(), top.end());
  std::sort(bottom.begin(), bottom.end());

  RangeEstimate est;
  est.r_u = reduce(top, config.strategy);
  est.r_l = reduce(bottom, config.strategy);
  est.sample_count = n;
  est.config_used = config;
  est.mean = mean_of(samples);
  double ss = 0.0;
  for (double v : samples) ss += (v - est.mean) * (v - est.mean);
  est.stddev = std::sqrt(ss / static_cast<double>(n));
  return est;
}

std::vector<std::string> sample_calibration(const DumpManifest& manifest, std::size_t size,
                                            const SamplingMode& mode) {
  if (size == 0) throw Error(Errc::InvalidConfig, "calibration size must be positive");
  std::vector<const ManifestEntry*> population;
  for (const auto& e : manifest.entries()) {
    if (e.seq_len > 0) population.push_back(&e);
  }
  if (population.empty()) throw Error(Errc::NoLengthData, "no manifest entry has seq_len > 0");
  if (size > population.size()) {
    throw Error(Errc::SizeExceedsPopulation,
                "requested " + std::to_string(size) + " calibration tensors but only " +
                    std::to_string(population.size()) + " entries have seq_len > 0");
  }

  std::mt19937_64 rng(mode.seed);
  std::vector<std::string> out;
  out.reserve(size);

  auto by_length = [](const ManifestEntry* a, const ManifestEntry* b) {
    if (a->seq_len != b->seq_len) return a->seq_len < b->seq_len;
    return a->tensor_id < b->tensor_id;
  };

  switch (mode.kind) {
    case SamplingKind::Random: {
      // Partial Fisher-Yates.
      for (std::size_t i = 0; i < size; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, population.size() - 1);
        std::swap(population[i], population[pick(rng)]);
        out.push_back(population[i]->tensor_id);
      }
      break;
    }
    case SamplingKind::PreferShort:
    case SamplingKind::PreferLong: {
      auto ordered = population;
      if (mode.kind == SamplingKind::PreferShort) {
        std::sort(ordered.begin(), ordered.end(), by_length);
      } else {
        std::sort(ordered.begin(), ordered.end(), [](const ManifestEntry* a, const ManifestEntry* b) {
          if (a->seq_len != b->seq_len) return a->seq_len > b->seq_len;
          return a->tensor_id < b->tensor_id;
        });
      }
      for (std::size_t i = 0; i < size; ++i) out.push_back(ordered[i]->tensor_id);
      break;
    }
    case SamplingKind::Uniform: {
      if (mode.bins < 1) throw Error(Errc::InvalidConfig, "uniform sampling needs bins >= 1");
      auto [lo_it, hi_it] = std::minmax_element(
          population.begin(), population.end(),
          [](const ManifestEntry* a, const ManifestEntry* b) { return a->seq_len < b->seq_len; });
      const std::uint64_t lo = (*lo_it)->seq_len;
      const std::uint64_t span = (*hi_it)->seq_len - lo;
      std::vector<std::vector<const ManifestEntry*>> bins(mode.bins);
      for (const auto* e : population) {
        std::size_t b = 0;
        if (span > 0) {
          auto scaled = static_cast<unsigned __int128>(e->seq_len - lo) * mode.bins / span;
          b = static_cast<std::size_t>(std::min<unsigned __int128>(scaled, mode.bins - 1));
        }
        bins[b].push_back(e);
      }
      while (out.size() < size) {
        for (auto& bin : bins) {
          if (out.size() == size) break;
          if (bin.empty()) continue;
          std::uniform_int_distribution<std::size_t> pick(0, bin.size() - 1);
          std::size_t i = pick(rng);
          out.push_back(bin[i]->tensor_id);
          bin[i] = bin.back();
          bin.pop_back();
        }
      }
      break;
    }
  }
  return out;
}

std::vector<std::string> sample_calibration_per_tag(const DumpManifest& manifest, std::size_t size,
                                                    const SamplingMode& mode) {
  std::map<std::string, std::vector<ManifestEntry>> by_tag;
  for (const auto& e : manifest.entries()) {
    if (e.seq_len > 0) by_tag[e.tag].push_back(e);
  }
  if (by_tag.empty()) throw Error(Errc::NoLengthData, "no manifest entry has seq_len > 0");
  std::vector<std::string> out;
  for (auto& [tag, entries] : by_tag) {
    if (size > entries.size()) {
      throw Error(Errc::SizeExceedsPopulation,
                  "requested " + std::to_string(size) + " calibration tensors but tag '" + tag +
                      "' has only " + std::to_string(entries.size()));
    }
    auto ids = sample_calibration(DumpManifest(std::move(entries)), size, mode);
    out.insert(out.end(), ids.begin(), ids.end());
  }
  return out;
}

std::optional<RangeEstimate> RangeRegistry::find(const std::string& tensor_id,
                                                 const std::string& tag) const {
  if (auto it = entries_.find(tensor_id); it != entries_.end()) return it->second;
  if (auto it = entries_.find(tag); it != entries_.end()) return it->second;
  return std::nullopt;
}

const RangeEstimate& RangeRegistry::at(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw Error(Errc::MissingRange, "no range for '" + key + "'");
  return it->second;
}

RangeRegistry calibrate_all(const DumpManifest& manifest, const std::vector<std::string>& selected,
                            const ClipConfig& config, bool group_by_tag) {
  std::map<std::string, std::vector<double>> pools;
  for (const auto& id : selected) {
    const auto& entry = manifest.entry(id);
    Tensor t = manifest.load_tensor(id);
    auto& pool = pools[group_by_tag ? entry.tag : id];
    pool.insert(pool.end(), t.data().begin(), t.data().end());
  }
  RangeRegistry registry;
  for (const auto& [key, pool] : pools) registry.set(key, estimate_range(pool, config));
  return registry;
}

std::string ranges_to_json(const RangeRegistry& registry, const std::string& config_json) {
  json entries = json::array();
  for (const auto& [key, e] : registry.entries()) {
    entries.push_back({{"key", key},
                       {"r_l", e.r_l},
                       {"r_u", e.r_u},
                       {"sample_count", e.sample_count},
                       {"strategy", std::string(to_string(e.config_used.strategy))},
                       {"k", e.config_used.k},
                       {"mean", e.mean},
                       {"sigma", e.stddev}});
  }
  json doc = {{"version", RangeRegistry::kVersion}, {"entries", entries}};
  if (!config_json.empty()) doc["config"] = json::parse(config_json);
  return doc.dump(2) + "\n";
}

RangeRegistry parse_ranges(const std::string& json_text) {
  RangeRegistry registry;
  try {
    json doc = json::parse(json_text);
    if (doc.at("version").get<int>() != RangeRegistry::kVersion) {
      throw Error(Errc::MalformedManifest, "ranges version must be 1");
    }
    for (const auto& item : doc.at("entries")) {
      RangeEstimate e;
      e.r_l = item.at("r_l").get<double>();
      e.r_u = item.at("r_u").get<double>();
      e.sample_count = item.at("sample_count").get<std::size_t>();
      e.config_used.strategy = parse_clip_strategy(item.at("strategy").get<std::string>());
      e.config_used.k = item.at("k").get<std::size_t>();
      e.mean = item.value("mean", 0.5 * (e.r_l + e.r_u));
      e.stddev = item.value("sigma", 0.0);
      if (!(e.r_l <= e.r_u)) throw Error(Errc::InvertedRange, "range entry with r_l > r_u");
      registry.set(item.at("key").get<std::string>(), e);
    }
  } catch (const json::exception& ex) {
    throw Error(Errc::MalformedManifest, std::string("ranges file: ") + ex.what());
  }
  return registry;
}

RangeRegistry load_ranges(const std::filesystem::path& path) {
  return parse_ranges(read_file(path));
}

}  // namespace ptq
