#include <doctest.h>

#include "evanno/coding.hpp"
#include "evanno/stub_backend.hpp"
#include "fixtures.hpp"

using namespace evanno;
using nlohmann::json;

namespace {

const VariableSchema& schema() {
  static const auto s = VariableSchema::standard();
  return s;
}

ExtractedEvent fragment(const json& answer, const std::string& source) {
  const std::vector<std::string> sources{source};
  return interpret_extraction(schema(), "ev", answer, sources);
}

}  // namespace

TEST_SUITE("coding") {
  TEST_CASE("standard schema has nine variables in order") {
    const auto& s = schema();
    REQUIRE(s.size() == 9);
    CHECK(s[0].name == "Country");
    CHECK(s[8].name == "Wounds");
    CHECK(s.index_of("generic attack") == s.index_of("GenericAttack"));
    CHECK_THROWS_AS(s.index_of("Casualties"), InputError);
    CHECK(schema_from_json(to_json(s)).variables().size() == 9);
  }

  TEST_CASE("parse_count handles words, qualifiers and junk") {
    CHECK(parse_count("eight") == VariableValue(Count{8, CountQualifier::exact}));
    CHECK(parse_count("at least eight people wounded") == VariableValue(Count{8, CountQualifier::at_least}));
    CHECK(parse_count("more than 10") == VariableValue(Count{11, CountQualifier::at_least}));
    CHECK(parse_count("12") == VariableValue(Count{12, CountQualifier::exact}));
    CHECK(is_na(parse_count("several")));
    CHECK_THROWS_AS(parse_count("-3"), ValidationError);
    CHECK_THROWS_AS(parse_count(std::int64_t{-1}), ValidationError);
  }

  TEST_CASE("validate_value per kind") {
    const auto& s = schema();
    CHECK(is_na(validate_value(s, "Country", nullptr)));
    CHECK(is_na(validate_value(s, "Country", "N/A")));
    CHECK(validate_value(s, "Country", "  Mali ") == VariableValue(Text{"Mali"}));
    const auto weapons = validate_value(s, "GenericWeapon", "explosives; firearms");
    REQUIRE(std::holds_alternative<EnumSet>(weapons));
    // Schema order, regardless of input order.
    CHECK(std::get<EnumSet>(weapons).values == std::vector<std::string>{"Explosives", "Firearms"});
    const auto reversed = validate_value(s, "GenericWeapon", "firearms, EXPLOSIVES");
    CHECK(reversed == weapons);
    CHECK(validate_value(s, "GenericAttack", "Hostage Taking (Kidnapping)") ==
          validate_value(s, "GenericAttack", json::array({"hostage taking kidnapping"})));
    try {
      validate_value(s, "GenericWeapon", "Laser");
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(e.variable() == "GenericWeapon");
      CHECK(e.token() == "Laser");
    }
    CHECK(validate_value(s, "Kills", json{{"n", 4}, {"qualifier", "at_least"}}) ==
          VariableValue(Count{4, CountQualifier::at_least}));
    CHECK_THROWS_AS(validate_value(s, "Country", json::array({1})), ValidationError);
  }

  TEST_CASE("render and json round trip of values") {
    CHECK(render(Count{8, CountQualifier::at_least}) == "at least 8");
    CHECK(render(Na{}) == "NA");
    CHECK(render(EnumSet{{"Firearms", "Explosives"}}) == "Firearms; Explosives");
    const auto& s = schema();
    for (const auto& v : {VariableValue(Count{3, CountQualifier::exact}), VariableValue(Na{})}) {
      CHECK(validate_value(s, "Kills", value_to_json(v)) == v);
    }
  }

  TEST_CASE("interpret_extraction keeps invalid values as NA with a note") {
    const auto ev = fragment(json{{"Country", "Mali"}, {"GenericWeapon", "Laser"}, {"Kills", 2}}, "d1");
    CHECK(ev.value(schema(), "Country") == VariableValue(Text{"Mali"}));
    CHECK(is_na(ev.value(schema(), "GenericWeapon")));
    CHECK(is_na(ev.value(schema(), "Wounds")));
    REQUIRE(ev.conflicts.size() == 1);
    CHECK(ev.conflicts[0].variable == "GenericWeapon");
    CHECK(ev.provenance.at("Country") == std::vector<std::string>{"d1"});
  }

  TEST_CASE("merge rules") {
    const auto a = fragment(json{{"Country", "Mali"}, {"Target", "villagers"}, {"GenericWeapon", "Firearms"},
                                 {"Kills", 3}, {"Wounds", "NA"}},
                            "d1");
    const auto b = fragment(json{{"Country", "mali"}, {"Target", "the villagers of Mopti"},
                                 {"GenericWeapon", "Explosives"}, {"Kills", "at least 3"}, {"Wounds", 5}},
                            "d2");
    const auto c = fragment(json{{"Country", "Mali"}, {"Target", "NA"}}, "d3");
    const std::vector<ExtractedEvent> frags{a, b, c};
    const auto m = merge_extractions(schema(), frags);
    CHECK(m.value(schema(), "Country") == VariableValue(Text{"Mali"}));
    // Tie between two distinct normalized values: longer wins.
    CHECK(m.value(schema(), "Target") == VariableValue(Text{"the villagers of Mopti"}));
    CHECK(m.value(schema(), "GenericWeapon") == VariableValue(EnumSet{{"Explosives", "Firearms"}}));
    CHECK(m.value(schema(), "Kills") == VariableValue(Count{3, CountQualifier::at_least}));
    CHECK(m.value(schema(), "Wounds") == VariableValue(Count{5, CountQualifier::exact}));
    std::vector<std::string> conflicted;
    for (const auto& cf : m.conflicts) conflicted.push_back(cf.variable);
    CHECK(std::find(conflicted.begin(), conflicted.end(), "Target") != conflicted.end());
    CHECK(std::find(conflicted.begin(), conflicted.end(), "Kills") != conflicted.end());
    // NA never conflicts; case-only differences are not disagreements.
    CHECK(std::find(conflicted.begin(), conflicted.end(), "Wounds") == conflicted.end());
    CHECK(std::find(conflicted.begin(), conflicted.end(), "Country") == conflicted.end());

    const std::vector<ExtractedEvent> reversed{c, b, a};
    CHECK(merge_extractions(schema(), reversed) == m);
    const std::vector<ExtractedEvent> twice{m, m};
    CHECK(merge_extractions(schema(), twice) == m);
  }

  TEST_CASE("location equal to country raises a warning") {
    const auto ev = fragment(json{{"Country", "Mali"}, {"Location", "Mali"}}, "d1");
    CHECK(ev.warnings.size() == 1);
  }

  TEST_CASE("merge rejects mixed events") {
    auto a = fragment(json{{"Country", "Mali"}}, "d1");
    auto b = a;
    b.event_id = "other";
    const std::vector<ExtractedEvent> mixed{a, b};
    CHECK_THROWS_AS(merge_extractions(schema(), mixed), InputError);
  }

  TEST_CASE("candidate answers merge like fragments") {
    const auto ev = fragment(json{{"Kills", {{"candidates", {2, 4}}}}}, "d1");
    CHECK(ev.value(schema(), "Kills") == VariableValue(Count{4, CountQualifier::exact}));
    REQUIRE(ev.conflicts.size() == 1);
    CHECK(ev.conflicts[0].values == std::vector<std::string>{"2", "4"});
  }

  TEST_CASE("extraction through the stub oracle") {
    const auto stub = fixtures::stub_corpus();
    ProviderConfig config;
    Oracle oracle(config, std::make_shared<StubTransport>());
    // E7 has no multi-event document, so both prompting modes see the same values.
    const auto& set = stub.gold_documents[6];
    const auto members = resolve_member_texts(set, stub.docs);
    const auto prompt = render_extraction_prompt(schema(), members, kDefaultExtractionPrompt);
    CHECK(prompt.find("GenericWeapon") != std::string::npos);
    CHECK(prompt.find("{documents}") == std::string::npos);

    const auto ev = extract_variables(oracle, schema(), set, members);
    CHECK(ev.event_id == set.id);
    CHECK(ev.value(schema(), "Country") == VariableValue(Text{"Pakistan"}));

    ExtractionOptions per_doc;
    per_doc.per_document = true;
    const auto ev2 = extract_variables(oracle, schema(), set, members, per_doc);
    CHECK(ev2.values == ev.values);
  }

  TEST_CASE("segment members use stored segment text") {
    const auto stub = fixtures::stub_corpus();
    ProviderConfig config;
    Oracle oracle(config, std::make_shared<StubTransport>());
    const auto seg = cluster_llm_cls_seg(oracle, stub.docs);
    const auto all = extract_all(oracle, schema(), seg.sets, stub.docs, seg.segments);
    REQUIRE(all.size() == 12);
    for (const auto& ev : all) CHECK(ev.conflicts.empty());
    CHECK_THROWS_AS(resolve_member_texts(seg.sets.front(), stub.docs), InputError);
  }

  TEST_CASE("extracted events round trip through disk") {
    const auto dir = fixtures::temp_dir("extracted");
    const auto ev = fragment(json{{"Country", "Mali"}, {"Kills", "at least 2"}, {"GenericWeapon", "Laser"}}, "d1");
    const std::vector<ExtractedEvent> events{ev};
    save_extracted(schema(), dir / "x.json", events);
    CHECK(load_extracted(schema(), dir / "x.json") == events);
  }
}
