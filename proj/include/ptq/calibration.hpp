#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ptq/manifest.hpp"

namespace ptq {

enum class ClipStrategy { Median, Average };

struct ClipConfig {
  ClipStrategy strategy = ClipStrategy::Median;
  std::size_t k = 5;

  friend bool operator==(const ClipConfig&, const ClipConfig&) = default;
};

std::string_view to_string(ClipStrategy s) noexcept;
ClipStrategy parse_clip_strategy(std::string_view text);

/// Clipping range plus the pooled moments the piecewise breakpoint rule needs.
struct RangeEstimate {
  double r_l = 0.0;
  double r_u = 0.0;
  std::size_t sample_count = 0;
  ClipConfig config_used;
  double mean = 0.0;
  double stddev = 0.0;

  friend bool operator==(const RangeEstimate&, const RangeEstimate&) = default;
};

/// Top-k clipping: sort the pooled values, take the k largest and k smallest,
/// and reduce each set by mean (Average) or median (Median). An even-sized
/// set's median is the mean of its two middle values.
RangeEstimate estimate_range(std::span<const double> samples, const ClipConfig& config);

enum class SamplingKind { Random, PreferShort, PreferLong, Uniform };

struct SamplingMode {
  SamplingKind kind = SamplingKind::Uniform;
  std::uint64_t seed = 0;
  std::size_t bins = 10;
};

std::string_view to_string(SamplingKind k) noexcept;
SamplingKind parse_sampling_kind(std::string_view text);

inline constexpr std::size_t kDefaultCalibrationSize = 100;

/// Picks `size` distinct tensor ids among entries with seq_len > 0.
std::vector<std::string> sample_calibration(const DumpManifest& manifest, std::size_t size,
                                            const SamplingMode& mode);

/// Runs sample_calibration separately over each tag's entries with the same
/// mode and seed, so every activation location gets `size` tensors.
std::vector<std::string> sample_calibration_per_tag(const DumpManifest& manifest, std::size_t size,
                                                    const SamplingMode& mode);

/// Ranges keyed by tag (grouped) or tensor id.
class RangeRegistry {
 public:
  static constexpr int kVersion = 1;

  void set(const std::string& key, RangeEstimate estimate) { entries_[key] = std::move(estimate); }
  const std::map<std::string, RangeEstimate>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  /// Looks up the tensor id first, then its tag.
  std::optional<RangeEstimate> find(const std::string& tensor_id, const std::string& tag) const;
  const RangeEstimate& at(const std::string& key) const;

 private:
  std::map<std::string, RangeEstimate> entries_;
};

RangeRegistry calibrate_all(const DumpManifest& manifest, const std::vector<std::string>& selected,
                            const ClipConfig& config, bool group_by_tag = true);

/// `config` is embedded verbatim when given (a JSON object text).
std::string ranges_to_json(const RangeRegistry& registry, const std::string& config_json = {});
RangeRegistry parse_ranges(const std::string& json_text);
RangeRegistry load_ranges(const std::filesystem::path& path);

}  // namespace ptq
