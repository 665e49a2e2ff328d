#include "ptq/manifest.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "ptq/error.hpp"
#include "ptq/fs_util.hpp"
#include "ptq/npy.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace ptq {

DumpManifest::DumpManifest(std::vector<ManifestEntry> entries, fs::path base_dir)
    : entries_(std::move(entries)), base_dir_(std::move(base_dir)) {
  std::unordered_set<std::string> seen;
  for (auto& e : entries_) {
    if (e.tensor_id.empty()) throw Error(Errc::MalformedManifest, "empty tensor_id");
    if (e.tag.empty()) throw Error(Errc::MalformedManifest, "empty tag for " + e.tensor_id);
    if (!seen.insert(e.tensor_id).second) {
      throw Error(Errc::DuplicateTensorId, "tensor_id '" + e.tensor_id + "'");
    }
    if (e.raw_path.empty()) e.raw_path = e.path.generic_string();
    if (e.path.is_relative() && !base_dir_.empty()) e.path = base_dir_ / e.path;
  }
}

const ManifestEntry& DumpManifest::entry(const std::string& tensor_id) const {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const ManifestEntry& e) { return e.tensor_id == tensor_id; });
  if (it == entries_.end()) throw Error(Errc::UnknownTensorId, "'" + tensor_id + "'");
  return *it;
}

bool DumpManifest::contains(const std::string& tensor_id) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const ManifestEntry& e) { return e.tensor_id == tensor_id; });
}

Tensor DumpManifest::load_tensor(const std::string& tensor_id) const {
  const auto& e = entry(tensor_id);
  if (!fs::exists(e.path)) {
    throw Error(Errc::MissingTensorFile, "tensor '" + tensor_id + "' at " + e.path.string());
  }
  return load_npy(e.path);
}

std::vector<std::string> DumpManifest::tags() const {
  std::set<std::string> tags;
  for (const auto& e : entries_) tags.insert(e.tag);
  return {tags.begin(), tags.end()};
}

DumpManifest parse_manifest(const std::string& json_text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& ex) {
    throw Error(Errc::MalformedManifest, ex.what());
  }
  if (!doc.is_object()) throw Error(Errc::MalformedManifest, "top level must be an object");
  if (!doc.contains("version") || !doc["version"].is_number_integer() ||
      doc["version"].get<int>() != DumpManifest::kVersion) {
    throw Error(Errc::MalformedManifest, "version must be 1");
  }
  if (!doc.contains("entries") || !doc["entries"].is_array()) {
    throw Error(Errc::MalformedManifest, "entries must be an array");
  }
  std::vector<ManifestEntry> entries;
  for (const auto& item : doc["entries"]) {
    if (!item.is_object()) throw Error(Errc::MalformedManifest, "entry must be an object");
    auto get_string = [&](const char* key) {
      if (!item.contains(key) || !item[key].is_string()) {
        throw Error(Errc::MalformedManifest, std::string("entry field '") + key + "' must be a string");
      }
      return item[key].get<std::string>();
    };
    ManifestEntry e;
    e.tensor_id = get_string("tensor_id");
    e.raw_path = get_string("path");
    e.path = fs::path(e.raw_path);
    e.tag = get_string("tag");
    if (!item.contains("seq_len") || !item["seq_len"].is_number_unsigned()) {
      throw Error(Errc::MalformedManifest, "seq_len of '" + e.tensor_id + "' must be a non-negative integer");
    }
    e.seq_len = item["seq_len"].get<std::uint64_t>();
    entries.push_back(std::move(e));
  }
  return DumpManifest(std::move(entries), base_dir);
}

DumpManifest load_manifest(const fs::path& path) {
  return parse_manifest(read_file(path), path.parent_path());
}

std::string manifest_to_json(const DumpManifest& manifest) {
  json entries = json::array();
  for (const auto& e : manifest.entries()) {
    entries.push_back({{"tensor_id", e.tensor_id},
                       {"path", e.raw_path},
                       {"tag", e.tag},
                       {"seq_len", e.seq_len}});
  }
  json doc = {{"version", DumpManifest::kVersion}, {"entries", entries}};
  return doc.dump(2) + "\n";
}

void save_manifest(const DumpManifest& manifest, const fs::path& path) {
  write_file_atomic(path, manifest_to_json(manifest));
}

}  // namespace ptq
