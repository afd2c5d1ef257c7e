#include "evanno/oracle.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "evanno/hashing.hpp"
#include "evanno/timeutil.hpp"

namespace evanno {

namespace fs = std::filesystem;

std::string_view to_string(CacheMode mode) {
  switch (mode) {
    case CacheMode::record: return "record";
    case CacheMode::replay: return "replay";
    case CacheMode::passthrough: return "passthrough";
  }
  return "?";
}

CacheMode cache_mode_from_string(std::string_view name) {
  if (name == "record") return CacheMode::record;
  if (name == "replay") return CacheMode::replay;
  if (name == "passthrough") return CacheMode::passthrough;
  throw InputError("unknown cache mode: " + std::string(name));
}

ReplayCache::ReplayCache(fs::path directory, CacheMode mode)
    : directory_(std::move(directory)), mode_(mode) {
  if (mode_ == CacheMode::passthrough) return;
  if (!fs::exists(directory_)) {
    if (mode_ == CacheMode::replay) return;  // every lookup will miss
    fs::create_directories(directory_);
  }
  for (const auto& entry : fs::directory_iterator(directory_)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    const auto key = entry.path().stem().string();
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      const auto record = nlohmann::json::parse(buf.str());
      const auto raw = record.at("response").get<std::string>();
      if (record.at("key").get<std::string>() != key) {
        corrupted_.emplace(key, "record key does not match file name");
      } else if (record.at("response_sha256").get<std::string>() != sha256_hex(raw)) {
        corrupted_.emplace(key, "response hash mismatch");
      } else {
        loaded_.emplace(key, raw);
      }
    } catch (const nlohmann::json::exception& e) {
      corrupted_.emplace(key, std::string("unreadable record: ") + e.what());
    }
  }
}

std::optional<std::string> ReplayCache::lookup(const OracleRequest& request) const {
  if (mode_ == CacheMode::passthrough) return std::nullopt;
  if (const auto it = corrupted_.find(request.cache_key); it != corrupted_.end()) {
    throw CacheIntegrityError(request.kind, request.cache_key, "corrupted cache record: " + it->second);
  }
  if (const auto it = loaded_.find(request.cache_key); it != loaded_.end()) return it->second;
  std::lock_guard lock(write_mutex_);
  if (const auto it = recorded_.find(request.cache_key); it != recorded_.end()) return it->second;
  return std::nullopt;
}

void ReplayCache::store(const OracleRequest& request, const std::string& raw) {
  if (mode_ != CacheMode::record) return;
  nlohmann::json record;
  record["key"] = request.cache_key;
  record["kind"] = to_string(request.kind);
  record["model"] = request.model_id;
  record["payload_sha256"] = sha256_hex(request.payload);
  record["timestamp"] = format_iso8601(std::chrono::time_point_cast<std::chrono::milliseconds>(
      std::chrono::system_clock::now()));
  record["response_sha256"] = sha256_hex(raw);
  record["response"] = raw;

  std::lock_guard lock(write_mutex_);
  const auto target = directory_ / (request.cache_key + ".json");
  const auto tmp = directory_ / (request.cache_key + ".json.tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write cache record " + tmp.string());
    out << record.dump(2) << '\n';
  }
  fs::rename(tmp, target);
  recorded_[request.cache_key] = raw;
}

std::size_t ReplayCache::size() const {
  std::lock_guard lock(write_mutex_);
  std::size_t extra = 0;
  for (const auto& [k, v] : recorded_) extra += loaded_.contains(k) ? 0 : 1;
  return loaded_.size() + extra;
}

}  // namespace evanno
