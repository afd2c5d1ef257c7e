// Eigen must come before httplib: <resolv.h> defines a `_res` macro that
// collides with Eigen parameter names.
#include "evanno/oracle.hpp"

#include <httplib.h>

#include <cstdlib>
#include <regex>

namespace evanno {

namespace {

class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(const ProviderConfig& config)
      : api_key_env_(config.api_key_env), timeout_(config.timeout_seconds) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(config.base_url, m, re)) {
      throw InputError("provider base_url is not an http(s) URL: " + config.base_url);
    }
    origin_ = m[1].str();
    prefix_ = m[2].matched ? m[2].str() : std::string();
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }

  std::string post(const std::string& path, const std::string& json_body) override {
    // httplib::Client is not safe for concurrent use, so each call gets one.
    httplib::Client client(origin_);
    const auto secs = static_cast<time_t>(timeout_);
    const auto usecs = static_cast<time_t>((timeout_ - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (const char* key = std::getenv(api_key_env_.c_str()); key != nullptr && *key != '\0') {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    auto res = client.Post(prefix_ + path, headers, json_body, "application/json");
    if (!res) {
      throw TransportError("request to " + origin_ + prefix_ + path + " failed: " + httplib::to_string(res.error()),
                           true);
    }
    if (res->status == 429 || res->status >= 500) {
      throw TransportError("HTTP " + std::to_string(res->status) + " from " + path, true);
    }
    if (res->status < 200 || res->status >= 300) {
      throw TransportError("HTTP " + std::to_string(res->status) + " from " + path + ": " + res->body, false);
    }
    return res->body;
  }

 private:
  std::string origin_;
  std::string prefix_;
  std::string api_key_env_;
  double timeout_;
};

}  // namespace

std::shared_ptr<Transport> make_http_transport(const ProviderConfig& config) {
  return std::make_shared<HttpTransport>(config);
}

}  // namespace evanno
