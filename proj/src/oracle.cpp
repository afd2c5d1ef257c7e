#include "evanno/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "evanno/hashing.hpp"
#include "evanno/text.hpp"

namespace evanno {

std::string_view to_string(RequestKind kind) {
  switch (kind) {
    case RequestKind::same_event: return "same_event";
    case RequestKind::segment: return "segment";
    case RequestKind::extract_variables: return "extract_variables";
    case RequestKind::embed: return "embed";
  }
  return "?";
}

RequestKind request_kind_from_string(std::string_view name) {
  for (auto k : {RequestKind::same_event, RequestKind::segment, RequestKind::extract_variables,
                 RequestKind::embed}) {
    if (to_string(k) == name) return k;
  }
  throw InputError("unknown request kind: " + std::string(name));
}

nlohmann::json to_json(const ProviderConfig& c) {
  return {{"base_url", c.base_url},
          {"chat_path", c.chat_path},
          {"embeddings_path", c.embeddings_path},
          {"model_id", c.model_id},
          {"embedding_model_id", c.embedding_model_id},
          {"temperature", c.temperature},
          {"timeout_seconds", c.timeout_seconds},
          {"max_in_flight", c.max_in_flight},
          {"api_key_env", c.api_key_env},
          {"transport_retries", c.transport_retries},
          {"backoff_seconds", c.backoff_seconds}};
}

ProviderConfig provider_config_from_json(const nlohmann::json& j) {
  ProviderConfig c;
  try {
    c.base_url = j.value("base_url", c.base_url);
    c.chat_path = j.value("chat_path", c.chat_path);
    c.embeddings_path = j.value("embeddings_path", c.embeddings_path);
    c.model_id = j.value("model_id", c.model_id);
    c.embedding_model_id = j.value("embedding_model_id", c.embedding_model_id);
    c.temperature = j.value("temperature", c.temperature);
    c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    c.transport_retries = j.value("transport_retries", c.transport_retries);
    c.backoff_seconds = j.value("backoff_seconds", c.backoff_seconds);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("provider config: ") + e.what());
  }
  if (c.max_in_flight < 1) throw InputError("provider config: max_in_flight must be positive");
  if (c.timeout_seconds <= 0) throw InputError("provider config: timeout_seconds must be positive");
  return c;
}

OracleRequest OracleRequest::make(RequestKind kind, std::string model_id, std::string payload) {
  std::string material(to_string(kind));
  material.push_back('\0');
  material += model_id;
  material.push_back('\0');
  material += payload;
  auto key = sha256_hex(material);
  return OracleRequest{kind, std::move(model_id), std::move(payload), std::move(key)};
}

std::string render_same_event_prompt(std::string_view a, std::string_view b) {
  std::string out(kSameEventPrompt);
  out += '\n';
  out += a;
  out += '\n';
  out += b;
  return out;
}

std::string render_segment_prompt(std::string_view document) {
  std::string out(kSegmentPrompt);
  out += '\n';
  out += document;
  return out;
}

std::optional<bool> parse_verdict(std::string_view content) {
  const auto tokens = tokenize(content);
  if (tokens.empty()) return std::nullopt;
  if (tokens.front() == "yes") return true;
  if (tokens.front() == "no") return false;
  return std::nullopt;
}

std::string_view strip_code_fence(std::string_view content) {
  auto s = trim(content);
  if (s.starts_with("```")) {
    const auto nl = s.find('\n');
    if (nl == std::string_view::npos) return s;
    s.remove_prefix(nl + 1);
    if (const auto end = s.rfind("```"); end != std::string_view::npos) s = s.substr(0, end);
    s = trim(s);
  }
  return s;
}

std::optional<std::vector<std::string>> parse_segments(std::string_view content) {
  const auto body = strip_code_fence(content);
  const auto parsed = nlohmann::json::parse(body, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_array()) return std::nullopt;
  std::vector<std::string> out;
  for (const auto& item : parsed) {
    if (!item.is_string()) return std::nullopt;
    const auto seg = trim(item.get_ref<const std::string&>());
    if (!seg.empty()) out.emplace_back(seg);
  }
  return out;
}

Oracle::Oracle(ProviderConfig config, std::shared_ptr<Transport> transport,
               std::shared_ptr<ReplayCache> cache)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      cache_(std::move(cache)),
      in_flight_(std::max(1, config_.max_in_flight)) {}

CacheMode Oracle::cache_mode() const noexcept {
  return cache_ ? cache_->mode() : CacheMode::passthrough;
}

std::string Oracle::build_body(const OracleRequest& request) const {
  nlohmann::json body;
  body["model"] = request.model_id;
  if (request.kind == RequestKind::embed) {
    body["input"] = nlohmann::json::parse(request.payload);
  } else {
    body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", request.payload}}});
    body["temperature"] = config_.temperature;
  }
  return body.dump();
}

std::string Oracle::send(const OracleRequest& request) {
  if (!transport_) {
    throw OracleError(request.kind, request.cache_key, "no transport configured");
  }
  const auto& path = request.kind == RequestKind::embed ? config_.embeddings_path : config_.chat_path;
  const auto body = build_body(request);
  auto delay = std::chrono::duration<double>(config_.backoff_seconds);
  for (int attempt = 0;; ++attempt) {
    try {
      in_flight_.acquire();
      struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
      } release{in_flight_};
      ++network_calls_;
      return transport_->post(path, body);
    } catch (const TransportError& e) {
      if (!e.retryable() || attempt >= config_.transport_retries) {
        throw OracleError(request.kind, request.cache_key,
                          "transport failed after " + std::to_string(attempt + 1) + " attempt(s): " + e.what());
      }
    }
    std::this_thread::sleep_for(delay);
    delay *= 2;
  }
}

std::string Oracle::call_cached(const OracleRequest& request) {
  if (cache_) {
    if (auto hit = cache_->lookup(request)) {
      ++cache_hits_;
      return *hit;
    }
    if (cache_->mode() == CacheMode::replay) {
      throw CacheMissError(request.kind, request.cache_key, "replay cache miss");
    }
  }
  auto raw = send(request);
  if (cache_) cache_->store(request, raw);
  return raw;
}

std::string Oracle::chat(RequestKind kind, const std::string& prompt) {
  const auto request = OracleRequest::make(kind, config_.model_id, prompt);
  const auto raw = call_cached(request);
  const auto parsed = nlohmann::json::parse(raw, nullptr, false);
  if (parsed.is_discarded()) {
    throw ResponseParseError(kind, request.cache_key, raw, "response is not JSON");
  }
  try {
    const auto& content = parsed.at("choices").at(0).at("message").at("content");
    if (content.is_null()) return {};
    return content.get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw ResponseParseError(kind, request.cache_key, raw, "response has no choices[0].message.content");
  }
}

bool Oracle::same_event(std::string_view a, std::string_view b) {
  if (trim(a).empty() || trim(b).empty()) throw InputError("same_event: empty text");
  const auto prompt = render_same_event_prompt(a, b);
  const auto first = chat(RequestKind::same_event, prompt);
  if (auto v = parse_verdict(first)) return *v;
  const auto retry_prompt = prompt + "\n" + std::string(kYesNoRetry);
  const auto second = chat(RequestKind::same_event, retry_prompt);
  if (auto v = parse_verdict(second)) return *v;
  throw ResponseParseError(RequestKind::same_event,
                           OracleRequest::make(RequestKind::same_event, config_.model_id, retry_prompt).cache_key,
                           second, "no yes/no verdict in response");
}

std::vector<std::string> Oracle::segment(std::string_view document) {
  if (trim(document).empty()) throw InputError("segment: empty document");
  const auto prompt = render_segment_prompt(document);
  if (auto segs = parse_segments(chat(RequestKind::segment, prompt))) return *segs;
  const auto retry_prompt = prompt + "\n" + std::string(kArrayRetry);
  const auto second = chat(RequestKind::segment, retry_prompt);
  if (auto segs = parse_segments(second)) return *segs;
  throw ResponseParseError(RequestKind::segment,
                           OracleRequest::make(RequestKind::segment, config_.model_id, retry_prompt).cache_key,
                           second, "response is not a JSON array of strings");
}

std::vector<Eigen::VectorXd> Oracle::embed(std::span<const std::string> texts) {
  if (texts.empty()) throw InputError("embed: no texts");
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (trim(texts[i]).empty()) throw InputError("embed: text " + std::to_string(i) + " is empty");
  }
  const auto request = OracleRequest::make(RequestKind::embed, config_.embedding_model_id,
                                           nlohmann::json(std::vector<std::string>(texts.begin(), texts.end())).dump());
  const auto raw = call_cached(request);
  const auto fail = [&](const std::string& why) -> ResponseParseError {
    return ResponseParseError(RequestKind::embed, request.cache_key, raw, why);
  };
  const auto parsed = nlohmann::json::parse(raw, nullptr, false);
  if (parsed.is_discarded() || !parsed.contains("data") || !parsed["data"].is_array()) {
    throw fail("response has no data array");
  }
  const auto& data = parsed["data"];
  if (data.size() != texts.size()) throw fail("expected " + std::to_string(texts.size()) + " embeddings");
  std::vector<Eigen::VectorXd> out(texts.size());
  std::vector<bool> filled(texts.size(), false);
  for (std::size_t pos = 0; pos < data.size(); ++pos) {
    const auto& item = data[pos];
    const std::size_t idx = item.contains("index") ? item["index"].get<std::size_t>() : pos;
    if (idx >= texts.size() || filled[idx]) throw fail("bad embedding index");
    if (!item.contains("embedding") || !item["embedding"].is_array()) throw fail("missing embedding vector");
    const auto values = item["embedding"].get<std::vector<double>>();
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    const double norm = v.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) throw fail("zero or non-finite embedding");
    out[idx] = v / norm;
    filled[idx] = true;
  }
  const auto dim = out.front().size();
  for (const auto& v : out) {
    if (v.size() != dim) throw fail("embedding dimension mismatch within batch");
  }
  return out;
}

}  // namespace evanno
