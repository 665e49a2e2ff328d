#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ptq/tensor.hpp"

namespace ptq {

struct ManifestEntry {
  std::string tensor_id;
  /// Resolved path (relative entries are joined onto the manifest's directory).
  std::filesystem::path path;
  /// Path exactly as written in the manifest file.
  std::string raw_path;
  std::string tag;
  /// 0 for tensors without a sequence (weights).
  std::uint64_t seq_len = 0;
};

/// Index of dumped tensors. Tensor files are not touched until load_tensor.
class DumpManifest {
 public:
  static constexpr int kVersion = 1;

  DumpManifest() = default;
  DumpManifest(std::vector<ManifestEntry> entries, std::filesystem::path base_dir = {});

  const std::vector<ManifestEntry>& entries() const noexcept { return entries_; }
  const std::filesystem::path& base_dir() const noexcept { return base_dir_; }

  const ManifestEntry& entry(const std::string& tensor_id) const;
  bool contains(const std::string& tensor_id) const;

  /// Throws MissingTensorFile naming the tensor id if the file is absent.
  Tensor load_tensor(const std::string& tensor_id) const;

  std::vector<std::string> tags() const;

 private:
  std::vector<ManifestEntry> entries_;
  std::filesystem::path base_dir_;
};

DumpManifest load_manifest(const std::filesystem::path& path);
DumpManifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir);
std::string manifest_to_json(const DumpManifest& manifest);
void save_manifest(const DumpManifest& manifest, const std::filesystem::path& path);

}  // namespace ptq
