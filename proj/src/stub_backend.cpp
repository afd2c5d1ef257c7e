#include "evanno/stub_backend.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "evanno/hashing.hpp"
#include "evanno/text.hpp"

namespace evanno {

namespace {

const std::regex& marker_regex() {
  static const std::regex re(R"(\[\[([A-Za-z0-9_.:-]+)\]\])");
  return re;
}

std::uint64_t hash64(std::string_view s) {
  const auto hex = sha256_hex(s);
  return std::stoull(hex.substr(0, 16), nullptr, 16);
}

std::string same_event_answer(std::string_view body) {
  // Layout: header line, article 1 on one line, article 2 (plus any retry
  // instruction) after it.
  auto nl = body.find('\n');
  const auto rest = nl == std::string_view::npos ? std::string_view{} : body.substr(nl + 1);
  nl = rest.find('\n');
  const auto first = rest.substr(0, nl);
  const auto second = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
  const auto a = event_markers(first);
  const auto b = event_markers(second);
  const bool shared = std::any_of(a.begin(), a.end(), [&](const std::string& t) {
    return std::find(b.begin(), b.end(), t) != b.end();
  });
  return shared ? "Yes." : "No.";
}

std::string segment_answer(std::string_view body) {
  const auto nl = body.find('\n');
  const auto doc = nl == std::string_view::npos ? std::string_view{} : body.substr(nl + 1);
  return nlohmann::json(split_at_markers(doc)).dump();
}

std::string extraction_answer(std::string_view body) {
  // Collect candidate values per key in first-seen order.
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> slots;
  for (const auto& block : planted_variable_blocks(body)) {
    if (!block.is_object()) continue;
    for (const auto& [key, value] : block.items()) {
      auto it = std::find_if(slots.begin(), slots.end(), [&](const auto& s) { return s.first == key; });
      if (it == slots.end()) {
        slots.emplace_back(key, std::vector<nlohmann::json>{});
        it = std::prev(slots.end());
      }
      if (std::find(it->second.begin(), it->second.end(), value) == it->second.end()) {
        it->second.push_back(value);
      }
    }
  }
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [key, values] : slots) {
    if (values.size() == 1) {
      out[key] = values.front();
    } else {
      out[key] = {{"candidates", values}};
    }
  }
  return out.dump();
}

std::string embedding_answer(const nlohmann::json& input) {
  nlohmann::json data = nlohmann::json::array();
  std::size_t index = 0;
  for (const auto& item : input) {
    const auto text = item.get<std::string>();
    std::vector<double> v(StubTransport::kDimension, 0.0);
    const auto tags = event_markers(text);
    if (tags.empty()) {
      const auto half = StubTransport::kDimension / 2;
      v[half + hash64(text) % half] = 1.0;
    } else {
      for (const auto& t : tags) v[StubTransport::tag_dimension(t)] += 1.0;
    }
    data.push_back({{"object", "embedding"}, {"index", index++}, {"embedding", v}});
  }
  return nlohmann::json{{"object", "list"}, {"data", data}}.dump();
}

}  // namespace

std::vector<std::string> event_markers(std::string_view text) {
  std::vector<std::string> out;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), marker_regex()); it != std::sregex_iterator(); ++it) {
    auto tag = (*it)[1].str();
    if (std::find(out.begin(), out.end(), tag) == out.end()) out.push_back(std::move(tag));
  }
  return out;
}

std::vector<nlohmann::json> planted_variable_blocks(std::string_view text) {
  std::vector<nlohmann::json> out;
  constexpr std::string_view open = "<<vars ";
  std::size_t pos = 0;
  while ((pos = text.find(open, pos)) != std::string_view::npos) {
    const auto start = pos + open.size();
    const auto end = text.find(">>", start);
    if (end == std::string_view::npos) break;
    auto parsed = nlohmann::json::parse(text.substr(start, end - start), nullptr, false);
    if (!parsed.is_discarded()) out.push_back(std::move(parsed));
    pos = end + 2;
  }
  return out;
}

std::vector<std::string> split_at_markers(std::string_view text) {
  const std::string s(text);
  std::vector<std::size_t> starts;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), marker_regex()); it != std::sregex_iterator(); ++it) {
    starts.push_back(static_cast<std::size_t>(it->position()));
  }
  std::vector<std::string> out;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const auto end = k + 1 < starts.size() ? starts[k + 1] : s.size();
    const auto seg = trim(std::string_view(s).substr(starts[k], end - starts[k]));
    if (!seg.empty()) out.emplace_back(seg);
  }
  return out;
}

std::size_t StubTransport::tag_dimension(std::string_view tag) {
  return hash64(std::string("tag:") + std::string(tag)) % (kDimension / 2);
}

std::string StubTransport::post(const std::string& /*path*/, const std::string& json_body) {
  const auto request = nlohmann::json::parse(json_body);
  if (request.contains("input")) return embedding_answer(request["input"]);
  const auto content = request.at("messages").at(0).at("content").get<std::string>();
  const std::string_view body(content);
  if (body.starts_with(kSameEventPrompt)) return chat_completion_response(same_event_answer(body));
  if (body.starts_with(kSegmentPrompt)) return chat_completion_response(segment_answer(body));
  return chat_completion_response(extraction_answer(body));
}

std::string CountingTransport::post(const std::string& path, const std::string& json_body) {
  ++calls_;
  const auto now = ++current_;
  auto peak = peak_.load();
  while (now > peak && !peak_.compare_exchange_weak(peak, now)) {
  }
  {
    std::lock_guard lock(paths_mutex_);
    paths_.push_back(path);
  }
  struct Leave {
    std::atomic<std::size_t>& c;
    ~Leave() { --c; }
  } leave{current_};
  return inner_->post(path, json_body);
}

std::size_t CountingTransport::calls_to(std::string_view path) const {
  std::lock_guard lock(paths_mutex_);
  return static_cast<std::size_t>(std::count(paths_.begin(), paths_.end(), path));
}

void CountingTransport::reset() {
  calls_ = 0;
  peak_ = 0;
  std::lock_guard lock(paths_mutex_);
  paths_.clear();
}

std::string chat_completion_response(std::string_view content) {
  nlohmann::json j{{"object", "chat.completion"},
                   {"choices", nlohmann::json::array({{{"index", 0},
                                                       {"message", {{"role", "assistant"}, {"content", content}}},
                                                       {"finish_reason", "stop"}}})}};
  return j.dump();
}

}  // namespace evanno
