#include "cloop/mlprov/registry.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "cloop/util/log.hpp"

namespace cloop::mlprov {

namespace fs = std::filesystem;

namespace {

void write_durable(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.parent_path() / (path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  int fd = ::open(tmp.c_str(), O_RDONLY);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
  fs::rename(tmp, path);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ModelRegistry::ModelRegistry(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (entry.path().extension() != ".json") continue;
    try {
      ForestModel m = forest_from_json(slurp(entry.path()));
      byName_[m.descriptor.name].push_back(m.descriptor);
    } catch (const std::exception& e) {
      util::log_warn("mlprov", "skipping unreadable model file " + entry.path().string() + ": " +
                                   e.what());
    }
  }
  for (auto& [name, versions] : byName_) {
    std::sort(versions.begin(), versions.end(),
              [](const ModelDescriptor& a, const ModelDescriptor& b) { return a.version < b.version; });
  }
}

fs::path ModelRegistry::model_path(const std::string& name, int version) const {
  return dir_ / (name + "-v" + std::to_string(version) + ".json");
}

ModelDescriptor ModelRegistry::register_model(ForestModel model) {
  model.validate();
  std::unique_lock lock(mutex_);
  const int next = byName_.count(model.descriptor.name)
                       ? byName_[model.descriptor.name].back().version + 1
                       : 1;
  model.descriptor.version = next;
  model.descriptor.createdAt = util::now_sys();
  write_durable(model_path(model.descriptor.name, next), forest_to_json(model));
  byName_[model.descriptor.name].push_back(model.descriptor);
  return model.descriptor;
}

std::vector<ModelDescriptor> ModelRegistry::query(
    const std::string& eventId, const std::map<std::string, std::string>& filters) const {
  std::shared_lock lock(mutex_);
  std::vector<ModelDescriptor> out;
  for (const auto& [name, versions] : byName_) {
    for (auto it = versions.rbegin(); it != versions.rend(); ++it) {
      if (it->eventId != eventId) continue;
      bool match = true;
      for (const auto& [k, v] : filters) {
        if (k == "name") match = match && it->name == v;
        else if (k == "eventId") match = match && it->eventId == v;
        else if (k == "version") match = match && std::to_string(it->version) == v;
        else match = false;  // unknown filter field matches nothing
      }
      if (match) out.push_back(*it);
    }
  }
  return out;
}

std::optional<ForestModel> ModelRegistry::load(const std::string& name, int version) const {
  std::shared_lock lock(mutex_);
  const fs::path path = model_path(name, version);
  if (!fs::exists(path)) return std::nullopt;
  try {
    return forest_from_json(slurp(path));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::optional<ModelDescriptor> ModelRegistry::latest(const std::string& name) const {
  std::shared_lock lock(mutex_);
  auto it = byName_.find(name);
  if (it == byName_.end() || it->second.empty()) return std::nullopt;
  return it->second.back();
}

int ModelRegistry::latest_version(const std::string& name) const {
  auto d = latest(name);
  return d ? d->version : 0;
}

}  // namespace cloop::mlprov
