#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "evanno/error.hpp"

namespace evanno {

enum class RequestKind { same_event, segment, extract_variables, embed };

std::string_view to_string(RequestKind kind);
RequestKind request_kind_from_string(std::string_view name);

struct ProviderConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string chat_path = "/chat/completions";
  std::string embeddings_path = "/embeddings";
  std::string model_id = "gpt-4o-mini-2024-07-18";
  std::string embedding_model_id = "BAAI/bge-large-en-v1.5";
  double temperature = 0.0;
  double timeout_seconds = 60.0;
  int max_in_flight = 4;
  std::string api_key_env = "ORACLE_API_KEY";
  int transport_retries = 3;
  double backoff_seconds = 0.5;  // first transport retry delay, doubled per retry
};

nlohmann::json to_json(const ProviderConfig& config);
ProviderConfig provider_config_from_json(const nlohmann::json& j);

// One oracle call. The cache key is SHA-256 over (kind, model id, payload),
// so any byte difference in the payload gives a different key.
struct OracleRequest {
  RequestKind kind;
  std::string model_id;
  std::string payload;
  std::string cache_key;

  static OracleRequest make(RequestKind kind, std::string model_id, std::string payload);
};

// Failure talking to or interpreting the provider. Carries the request kind
// and cache key.
class OracleError : public Error {
 public:
  OracleError(RequestKind kind, std::string key, const std::string& what)
      : Error(std::string(to_string(kind)) + " [" + key + "]: " + what), kind_(kind), key_(std::move(key)) {}

  RequestKind kind() const noexcept { return kind_; }
  const std::string& key() const noexcept { return key_; }

 private:
  RequestKind kind_;
  std::string key_;
};

class CacheMissError : public OracleError {
 public:
  using OracleError::OracleError;
};

class CacheIntegrityError : public OracleError {
 public:
  using OracleError::OracleError;
};

// Response that could not be interpreted, after the allowed retry.
class ResponseParseError : public OracleError {
 public:
  ResponseParseError(RequestKind kind, std::string key, std::string raw, const std::string& what)
      : OracleError(kind, std::move(key), what), raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

// Thrown by transports. Retryable errors (connection failures, timeouts,
// 429/5xx) are retried with backoff; others fail immediately.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, bool retryable) : Error(what), retryable_(retryable) {}
  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

// Synchronous JSON-over-HTTP POST. Implementations must be safe to call from
// several threads at once.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string post(const std::string& path, const std::string& json_body) = 0;
};

// cpp-httplib backed transport. The API key is read from the environment
// variable named in the config on every request and never persisted.
std::shared_ptr<Transport> make_http_transport(const ProviderConfig& config);

enum class CacheMode { record, replay, passthrough };

std::string_view to_string(CacheMode mode);
CacheMode cache_mode_from_string(std::string_view name);

// Content-addressed store of raw oracle responses, one JSON file per key.
// Records found on disk are loaded once at construction and then read without
// locking; records written during the run go through a single writer lock.
class ReplayCache {
 public:
  ReplayCache(std::filesystem::path directory, CacheMode mode);

  CacheMode mode() const noexcept { return mode_; }
  const std::filesystem::path& directory() const noexcept { return directory_; }

  // Cached raw response, nullopt on miss. Throws CacheIntegrityError when the
  // stored record for this key is corrupted.
  std::optional<std::string> lookup(const OracleRequest& request) const;

  // Persists a record (write to temp file, then rename).
  void store(const OracleRequest& request, const std::string& raw);

  std::size_t size() const;

 private:
  std::filesystem::path directory_;
  CacheMode mode_;
  std::unordered_map<std::string, std::string> loaded_;
  std::unordered_map<std::string, std::string> corrupted_;  // key -> reason
  mutable std::mutex write_mutex_;
  std::unordered_map<std::string, std::string> recorded_;
};

// Verbatim prompt templates for pairwise classification and segmentation.
inline constexpr std::string_view kSameEventPrompt =
    "Determine whether the following articles describe the same incident:";
inline constexpr std::string_view kSegmentPrompt =
    "The following document describes zero or more incidents. Segment the document based on "
    "incidents mentioned and return an array.";
inline constexpr std::string_view kYesNoRetry = "Answer yes or no.";
inline constexpr std::string_view kArrayRetry = "Return only a JSON array of strings.";

std::string render_same_event_prompt(std::string_view a, std::string_view b);
std::string render_segment_prompt(std::string_view document);

// Leading yes/no of a verdict, case-insensitive; nullopt otherwise.
std::optional<bool> parse_verdict(std::string_view content);
// JSON array of strings, optionally inside a ``` fence; nullopt otherwise.
std::optional<std::vector<std::string>> parse_segments(std::string_view content);
// Strips a surrounding markdown code fence, if any.
std::string_view strip_code_fence(std::string_view content);

// Provider-neutral access to chat-completion and embedding endpoints, routed
// through the replay cache. Shareable across threads; at most
// config.max_in_flight transport calls are outstanding at once.
class Oracle {
 public:
  Oracle(ProviderConfig config, std::shared_ptr<Transport> transport,
         std::shared_ptr<ReplayCache> cache = nullptr);

  const ProviderConfig& config() const noexcept { return config_; }
  CacheMode cache_mode() const noexcept;

  // Raw response for `request`: from the cache when present (record and
  // replay modes), otherwise from the transport (record and passthrough).
  std::string call_cached(const OracleRequest& request);

  // Chat completion content for a rendered prompt.
  std::string chat(RequestKind kind, const std::string& prompt);

  bool same_event(std::string_view a, std::string_view b);
  std::vector<std::string> segment(std::string_view document);
  // One unit-norm vector per text, all of the same dimension.
  std::vector<Eigen::VectorXd> embed(std::span<const std::string> texts);

  std::size_t network_calls() const noexcept { return network_calls_.load(); }
  std::size_t cache_hits() const noexcept { return cache_hits_.load(); }

 private:
  std::string build_body(const OracleRequest& request) const;
  std::string send(const OracleRequest& request);

  ProviderConfig config_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<ReplayCache> cache_;
  std::counting_semaphore<> in_flight_;
  std::atomic<std::size_t> network_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

}  // namespace evanno
