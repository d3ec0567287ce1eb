#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "cloop/mlprov/forest.hpp"

namespace cloop::mlprov {

/// Directory-backed versioned model store. One JSON document per model
/// version plus an in-memory index rebuilt from the directory at startup;
/// writes are durable (temp file + fsync + rename). Concurrent reads,
/// serialized writes.
class ModelRegistry {
 public:
  explicit ModelRegistry(std::filesystem::path dir);

  /// Stores the model under the next version for its name (1 for a new
  /// name) and stamps createdAt. Throws std::invalid_argument when the
  /// model fails validation.
  ModelDescriptor register_model(ForestModel model);

  /// Descriptors matching eventId and every filter (exact match on
  /// descriptor fields "name", "eventId", "version"), ordered name
  /// ascending then version descending.
  std::vector<ModelDescriptor> query(const std::string& eventId,
                                     const std::map<std::string, std::string>& filters = {}) const;

  std::optional<ForestModel> load(const std::string& name, int version) const;
  std::optional<ModelDescriptor> latest(const std::string& name) const;
  int latest_version(const std::string& name) const;  // 0 when name unknown

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path model_path(const std::string& name, int version) const;

  mutable std::shared_mutex mutex_;
  std::filesystem::path dir_;
  std::map<std::string, std::vector<ModelDescriptor>> byName_;  // version ascending
};

}  // namespace cloop::mlprov
