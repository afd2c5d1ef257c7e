#include <doctest.h>

#include <fstream>
#include <mutex>
#include <thread>

#include "evanno/hashing.hpp"
#include "evanno/oracle.hpp"
#include "evanno/stub_backend.hpp"
#include "fixtures.hpp"

using namespace evanno;

namespace {

ProviderConfig fast_config() {
  ProviderConfig c;
  c.backoff_seconds = 0.001;
  return c;
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("sha256 matches the standard test vector") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }

  TEST_CASE("cache key changes with any payload byte") {
    const auto a = OracleRequest::make(RequestKind::same_event, "m", "payload");
    const auto b = OracleRequest::make(RequestKind::same_event, "m", "payload ");
    const auto c = OracleRequest::make(RequestKind::segment, "m", "payload");
    const auto d = OracleRequest::make(RequestKind::same_event, "m2", "payload");
    CHECK(a.cache_key != b.cache_key);
    CHECK(a.cache_key != c.cache_key);
    CHECK(a.cache_key != d.cache_key);
    CHECK(a.cache_key == OracleRequest::make(RequestKind::same_event, "m", "payload").cache_key);
  }

  TEST_CASE("verdict and segment parsing") {
    CHECK(parse_verdict("Yes.") == std::optional<bool>(true));
    CHECK(parse_verdict("  no, they differ") == std::optional<bool>(false));
    CHECK(parse_verdict("YES") == std::optional<bool>(true));
    CHECK_FALSE(parse_verdict("maybe").has_value());
    CHECK(parse_segments("[\"a\", \"b\"]") == std::optional<std::vector<std::string>>({"a", "b"}));
    CHECK(parse_segments("```json\n[\"a\"]\n```") == std::optional<std::vector<std::string>>({"a"}));
    CHECK_FALSE(parse_segments("[1, 2]").has_value());
    CHECK_FALSE(parse_segments("not json").has_value());
  }

  TEST_CASE("record mode stores, replay mode answers from disk") {
    const auto dir = fixtures::temp_dir("cache");
    auto counting = std::make_shared<CountingTransport>(std::make_shared<StubTransport>());
    {
      Oracle oracle(fast_config(), counting, std::make_shared<ReplayCache>(dir, CacheMode::record));
      CHECK(oracle.same_event("[[E1]] one", "[[E1]] two"));
      CHECK_FALSE(oracle.same_event("[[E1]] one", "[[E2]] two"));
      CHECK(oracle.same_event("[[E1]] one", "[[E1]] two"));  // cache hit
      CHECK(oracle.network_calls() == 2);
      CHECK(oracle.cache_hits() == 1);
    }
    CHECK(counting->calls() == 2);
    Oracle replay(fast_config(), nullptr, std::make_shared<ReplayCache>(dir, CacheMode::replay));
    CHECK(replay.same_event("[[E1]] one", "[[E1]] two"));
    CHECK(replay.network_calls() == 0);
    CHECK_THROWS_AS(replay.same_event("[[E3]] x", "[[E3]] y"), CacheMissError);
  }

  TEST_CASE("corrupted cache records are reported, not used") {
    const auto dir = fixtures::temp_dir("corrupt");
    {
      Oracle oracle(fast_config(), std::make_shared<StubTransport>(),
                    std::make_shared<ReplayCache>(dir, CacheMode::record));
      oracle.same_event("[[E1]] one", "[[E1]] two");
    }
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      auto j = nlohmann::json::parse(std::ifstream(entry.path()));
      j["response"] = chat_completion_response("No.");
      std::ofstream(entry.path()) << j.dump();
    }
    Oracle replay(fast_config(), nullptr, std::make_shared<ReplayCache>(dir, CacheMode::replay));
    CHECK_THROWS_AS(replay.same_event("[[E1]] one", "[[E1]] two"), CacheIntegrityError);
  }

  TEST_CASE("passthrough mode writes nothing") {
    const auto dir = fixtures::temp_dir("pass");
    Oracle oracle(fast_config(), std::make_shared<StubTransport>(),
                  std::make_shared<ReplayCache>(dir / "cache", CacheMode::passthrough));
    oracle.same_event("[[E1]] a", "[[E1]] b");
    oracle.same_event("[[E1]] a", "[[E1]] b");
    CHECK(oracle.network_calls() == 2);
    CHECK_FALSE(std::filesystem::exists(dir / "cache"));
  }

  TEST_CASE("unparseable verdict is retried once with the stricter instruction") {
    std::vector<std::string> prompts;
    std::mutex m;
    auto transport = std::make_shared<FunctionTransport>([&](const std::string&, const std::string& body) {
      const auto content = nlohmann::json::parse(body)["messages"][0]["content"].get<std::string>();
      std::lock_guard lock(m);
      prompts.push_back(content);
      return chat_completion_response(prompts.size() == 1 ? "I think so" : "yes");
    });
    Oracle oracle(fast_config(), transport);
    CHECK(oracle.same_event("a", "b"));
    REQUIRE(prompts.size() == 2);
    CHECK(prompts[1].ends_with(std::string(kYesNoRetry)));

    auto never = std::make_shared<FunctionTransport>(
        [](const std::string&, const std::string&) { return chat_completion_response("perhaps"); });
    Oracle bad(fast_config(), never);
    CHECK_THROWS_AS(bad.same_event("a", "b"), ResponseParseError);
  }

  TEST_CASE("retryable transport errors back off, fatal ones do not") {
    int calls = 0;
    auto flaky = std::make_shared<FunctionTransport>([&](const std::string&, const std::string&) -> std::string {
      if (++calls < 3) throw TransportError("503", true);
      return chat_completion_response("Yes");
    });
    Oracle oracle(fast_config(), flaky);
    CHECK(oracle.same_event("a", "b"));
    CHECK(calls == 3);

    int fatal_calls = 0;
    auto fatal = std::make_shared<FunctionTransport>([&](const std::string&, const std::string&) -> std::string {
      ++fatal_calls;
      throw TransportError("401", false);
    });
    Oracle o2(fast_config(), fatal);
    CHECK_THROWS_AS(o2.same_event("a", "b"), OracleError);
    CHECK(fatal_calls == 1);
  }

  TEST_CASE("in-flight bound holds under concurrency") {
    auto slow = std::make_shared<FunctionTransport>([](const std::string&, const std::string&) {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      return chat_completion_response("Yes");
    });
    auto counting = std::make_shared<CountingTransport>(slow);
    auto config = fast_config();
    config.max_in_flight = 2;
    Oracle oracle(config, counting);
    std::vector<std::jthread> threads;
    for (int t = 0; t < 6; ++t) {
      threads.emplace_back([&, t] { oracle.same_event("x" + std::to_string(t), "y"); });
    }
    threads.clear();
    CHECK(counting->calls() == 6);
    CHECK(counting->peak_in_flight() <= 2);
  }

  TEST_CASE("stub backend answers from fixture markup") {
    Oracle oracle(fast_config(), std::make_shared<StubTransport>());
    const auto segs = oracle.segment("Intro. [[E1]] first part. [[E2]] second part.");
    CHECK(segs == std::vector<std::string>{"[[E1]] first part.", "[[E2]] second part."});
    const std::vector<std::string> texts{"[[E1]] a", "[[E1]] b", "[[E2]] c", "plain"};
    const auto v = oracle.embed(texts);
    REQUIRE(v.size() == 4);
    CHECK(v[0].dot(v[1]) == doctest::Approx(1.0));
    CHECK(v[0].dot(v[2]) == doctest::Approx(0.0));
    CHECK(v[0].norm() == doctest::Approx(1.0));
    const auto body = oracle.chat(RequestKind::extract_variables,
                                  "x <<vars {\"Country\":\"Mali\",\"Kills\":2}>> y <<vars {\"Kills\":3}>>");
    const auto j = nlohmann::json::parse(body);
    CHECK(j["Country"] == "Mali");
    CHECK(j["Kills"]["candidates"] == nlohmann::json::array({2, 3}));
  }

  TEST_CASE("embedding response validation") {
    auto wrong = std::make_shared<FunctionTransport>([](const std::string&, const std::string&) {
      return nlohmann::json{{"data", nlohmann::json::array({{{"index", 0}, {"embedding", {1.0, 0.0}}}})}}.dump();
    });
    Oracle oracle(fast_config(), wrong);
    const std::vector<std::string> two{"a", "b"};
    CHECK_THROWS_AS(oracle.embed(two), ResponseParseError);
    const std::vector<std::string> blank{" "};
    CHECK_THROWS_AS(oracle.embed(blank), InputError);
  }

  TEST_CASE("provider config round trip") {
    ProviderConfig c;
    c.base_url = "http://localhost:9";
    c.max_in_flight = 7;
    const auto back = provider_config_from_json(to_json(c));
    CHECK(back.base_url == c.base_url);
    CHECK(back.max_in_flight == 7);
    auto bad = to_json(c);
    bad["max_in_flight"] = 0;
    CHECK_THROWS_AS(provider_config_from_json(bad), InputError);
  }
}
