#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "evanno/oracle.hpp"

namespace evanno {

// Fixture markup read by the stub backend.
//
//   [[E1]]                incident marker: the text from here to the next
//                         marker belongs to event E1
//   <<vars {...}>>        planted extraction values for the enclosing text
//
// Production documents contain neither.
std::vector<std::string> event_markers(std::string_view text);
std::vector<nlohmann::json> planted_variable_blocks(std::string_view text);
// Splits at incident markers; text before the first marker is dropped.
std::vector<std::string> split_at_markers(std::string_view text);

// Deterministic offline backend that answers every request kind from fixture
// markup, speaking the same chat-completion / embeddings JSON as a real
// provider:
//   same_event         "Yes." iff the two articles share an incident marker
//   segment            JSON array of marker-delimited segments
//   extract_variables  JSON object merged from planted <<vars>> blocks; keys
//                      whose blocks disagree come back as {"candidates": [...]}
//   embed              sum of one-hot basis vectors, one per marker (untagged
//                      text hashes to its own basis vector)
class StubTransport final : public Transport {
 public:
  static constexpr std::size_t kDimension = 2048;

  std::string post(const std::string& path, const std::string& json_body) override;

  // Basis index used for a marker tag.
  static std::size_t tag_dimension(std::string_view tag);
};

// Decorator that counts calls and the peak number of concurrent calls.
class CountingTransport final : public Transport {
 public:
  explicit CountingTransport(std::shared_ptr<Transport> inner) : inner_(std::move(inner)) {}

  std::string post(const std::string& path, const std::string& json_body) override;

  std::size_t calls() const noexcept { return calls_.load(); }
  std::size_t peak_in_flight() const noexcept { return peak_.load(); }
  std::size_t calls_to(std::string_view path) const;
  void reset();

 private:
  std::shared_ptr<Transport> inner_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> current_{0};
  std::atomic<std::size_t> peak_{0};
  mutable std::mutex paths_mutex_;
  std::vector<std::string> paths_;
};

// Transport backed by a callable; used for scripted responses in tests.
class FunctionTransport final : public Transport {
 public:
  using Handler = std::function<std::string(const std::string& path, const std::string& body)>;
  explicit FunctionTransport(Handler handler) : handler_(std::move(handler)) {}
  std::string post(const std::string& path, const std::string& json_body) override {
    return handler_(path, json_body);
  }

 private:
  Handler handler_;
};

// Wraps assistant content in a chat-completion response envelope.
std::string chat_completion_response(std::string_view content);

}  // namespace evanno
