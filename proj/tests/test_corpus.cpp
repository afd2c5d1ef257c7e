#include <doctest.h>

#include <fstream>
#include <sstream>

#include "evanno/corpus.hpp"
#include "evanno/relevance.hpp"
#include "evanno/text.hpp"
#include "evanno/tfidf.hpp"
#include "fixtures.hpp"

using namespace evanno;

TEST_SUITE("corpus") {
  TEST_CASE("fold_text lowercases, strips punctuation and collapses whitespace") {
    CHECK(fold_text("  The  Attack, in KABUL!  ") == "the attack in kabul");
    CHECK(fold_text("Ünïcode “quotes” \xE2\x80\x94 dash") == "ünïcode quotes dash");
    CHECK(fold_text("") == "");
  }

  TEST_CASE("normalize_answer drops articles") {
    CHECK(normalize_answer("The New People's Army") == "new peoples army");
    CHECK(normalize_answer("an  attack on a bus") == "attack on bus");
    CHECK(answer_tokens("A bomb, the bomb") == std::vector<std::string>{"bomb", "bomb"});
  }

  TEST_CASE("collapse_whitespace keeps case and punctuation") {
    CHECK(collapse_whitespace("  Hello,\n\tWorld!  ") == "Hello, World!");
  }

  TEST_CASE("parse_jsonl reads documents and reports the failing line") {
    std::istringstream ok(R"({"id":"a","source":"s","published_at":"2022-02-01","title":"T","body":"B"}
{"id":"b","title":"U","body":"C"}
)");
    const auto docs = parse_jsonl(ok);
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].published_at == std::optional<std::string>("2022-02-01"));
    CHECK_FALSE(docs[1].published_at.has_value());

    std::istringstream missing(R"({"id":"a","title":"T","body":"B"}
{"id":"b","title":"U"}
)");
    try {
      parse_jsonl(missing);
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
      CHECK(std::string(e.what()).find("body") != std::string::npos);
    }

    std::istringstream dup(R"({"id":"a","title":"T","body":"B"}
{"id":"a","title":"U","body":"C"}
)");
    CHECK_THROWS_AS(parse_jsonl(dup), InputError);
  }

  TEST_CASE("jsonl round trip") {
    const auto dir = fixtures::temp_dir("corpus");
    const auto stub = fixtures::stub_corpus();
    std::vector<Document> docs = stub.docs;
    for (auto& d : docs) d.tags.clear();
    write_jsonl(dir / "c.jsonl", docs);
    CHECK(ingest_jsonl(dir / "c.jsonl") == docs);
  }

  TEST_CASE("dedupe_exact compares whitespace-normalized bodies") {
    std::vector<Document> docs{{"a", "", {}, "t", "x  y", {}}, {"b", "", {}, "t", "x y", {}}, {"c", "", {}, "t", "z", {}}};
    const auto out = dedupe_exact(docs);
    REQUIRE(out.size() == 2);
    CHECK(out[0].id == "a");
    CHECK(out[1].id == "c");
  }

  TEST_CASE("keyword_filter matches whole words and phrases") {
    std::vector<Document> docs{{"a", "", {}, "Gunmen attack", "", {}},
                               {"b", "", {}, "Market", "attackers seen", {}},
                               {"c", "", {}, "", "a car bomb exploded", {}},
                               {"d", "", {}, "", "car parts, bombastic", {}}};
    const std::vector<std::string> kw{"attack", "car bomb"};
    const auto out = keyword_filter(docs, kw);
    REQUIRE(out.size() == 2);
    CHECK(out[0].id == "a");
    CHECK(out[1].id == "c");
  }

  TEST_CASE("load_keywords skips comments and blanks") {
    const auto dir = fixtures::temp_dir("kw");
    std::ofstream(dir / "k.txt") << "# header\nattack\n\n  bomb  # trailing\n";
    CHECK(load_keywords(dir / "k.txt") == std::vector<std::string>{"attack", "bomb"});
  }

  TEST_CASE("tfidf uses smoothed idf and unit rows") {
    CHECK(smoothed_idf(3, 1) == doctest::Approx(std::log(4.0 / 2.0) + 1.0));
    const std::vector<std::string> texts{"bomb market", "bomb bus", "concert"};
    const auto model = build_tfidf(texts);
    CHECK(model.document_frequency("bomb") == 2);
    CHECK(model.features().idf("bomb") == doctest::Approx(smoothed_idf(3, 2)));
    CHECK(tfidf_similarity(model, "0", "0") == 1.0);
    CHECK(tfidf_similarity(model, "0", "2") == 0.0);
    // Independent cosine: shared term "bomb" only.
    const double wb = smoothed_idf(3, 2), wm = smoothed_idf(3, 1);
    const double expected = wb * wb / (wb * wb + wm * wm);
    CHECK(tfidf_similarity(model, "0", "1") == doctest::Approx(expected).epsilon(1e-12));
    const auto m = tfidf_similarity_matrix(model);
    CHECK(m.rows() == 3);
    CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("tfidf model does not depend on document order") {
    const std::vector<std::string> a{"alpha beta", "beta gamma", "gamma delta"};
    const std::vector<std::string> ids{"x", "y", "z"};
    const std::vector<std::string> b{"gamma delta", "alpha beta", "beta gamma"};
    const std::vector<std::string> ids_b{"z", "x", "y"};
    const auto ma = build_tfidf(a, ids);
    const auto mb = build_tfidf(b, ids_b);
    CHECK(ma.features().terms() == mb.features().terms());
    CHECK(tfidf_similarity(ma, "x", "y") == tfidf_similarity(mb, "x", "y"));
  }

  TEST_CASE("tfidf flags empty documents and rejects all-empty corpora") {
    const std::vector<std::string> texts{"!!!", "bomb"};
    const auto model = build_tfidf(texts);
    CHECK(model.empty_documents() == std::vector<std::string>{"0"});
    CHECK(tfidf_similarity(model, "0", "0") == 0.0);
    const std::vector<std::string> empty{"...", ""};
    CHECK_THROWS_AS(build_tfidf(empty), InputError);
  }

  TEST_CASE("relevance classifier separates the toy corpus and is reproducible") {
    const auto train = fixtures::toy_relevance_corpus(200, 11);
    const auto test = fixtures::toy_relevance_corpus(200, 12);
    const auto model = train_relevance(train);
    std::size_t correct = 0;
    for (const auto& [doc, label] : test) correct += score_relevance(model, doc).relevant == label;
    CHECK(static_cast<double>(correct) / static_cast<double>(test.size()) >= 0.95);

    const auto again = train_relevance(train);
    CHECK(again.weights == model.weights);
    CHECK(again.bias == model.bias);

    const auto restored = relevance_model_from_json(to_json(model));
    CHECK(restored.weights == model.weights);
    CHECK(score_relevance(restored, test[0].first).score == score_relevance(model, test[0].first).score);
  }

  TEST_CASE("relevance training rejects single-class input") {
    auto train = fixtures::toy_relevance_corpus(10, 3);
    for (auto& [doc, label] : train) label = true;
    CHECK_THROWS_AS(train_relevance(train), InputError);
  }
}
