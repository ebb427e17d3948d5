#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "tcdst/corpus.hpp"
#include "tcdst/error.hpp"
#include "tcdst/generator.hpp"
#include "tcdst/schema.hpp"
#include "tcdst/stats.hpp"

using namespace tcdst;

namespace {

Corpus tiny_corpus() {
  Corpus c;
  c.schema = toy_schema();
  Dialogue d;
  d.id = "d0";
  Turn t;
  t.sys = "";
  t.usr = "i need a hotel with area north";
  t.intent = "find_hotel";
  SlotAnnotation ann;
  ann.gate = Gate::kValue;
  ann.value = "north";
  ann.has_span = true;
  ann.span_begin = 25;
  ann.span_end = 30;
  t.slots["hotel_area"] = ann;
  d.turns.push_back(t);
  c.dialogues.push_back(d);
  return c;
}

std::string temp_path(const char* stem) {
  return std::string("tcdst_test_") + stem + ".json";
}

}  // namespace

TEST_CASE("schema: validation rules") {
  Schema s = toy_schema();
  CHECK_NOTHROW(s.validate());
  CHECK(s.num_categorical() == 2);
  CHECK(s.categorical_keys() == std::vector<std::string>{"hotel_price", "restaurant_price"});
  CHECK(s.intent_index("none") == 0);
  CHECK(s.slot_index("restaurant_area") == 2);
  CHECK_THROWS_AS(s.intent_index("nope"), SchemaError);

  Schema no_none = s;
  no_none.intents = {"find_hotel"};
  CHECK_THROWS_AS(no_none.validate(), SchemaError);

  Schema dup = s;
  dup.slots.push_back(dup.slots[0]);
  CHECK_THROWS_AS(dup.validate(), SchemaError);

  Schema tiny_cat = s;
  tiny_cat.slots[1].values = {"cheap"};
  CHECK_THROWS_AS(tiny_cat.validate(), SchemaError);
}

TEST_CASE("schema: json round trip") {
  Schema s = toy_schema();
  Schema back = Schema::from_json(s.to_json());
  CHECK(back.intents == s.intents);
  CHECK(back.slots.size() == s.slots.size());
  CHECK(back.slots[1].kind == SlotKind::kCategorical);
  CHECK(back.slots[1].values == s.slots[1].values);
  CHECK_THROWS_AS(Schema::from_json("{"), SchemaError);
  CHECK_THROWS_AS(Schema::from_json("{\"intents\":[\"none\"]}"), SchemaError);
}

TEST_CASE("classify_slot_kind thresholds") {
  CHECK(classify_slot_kind(8, true) == SlotKind::kCategorical);
  CHECK(classify_slot_kind(12, true) == SlotKind::kCategorical);
  CHECK(classify_slot_kind(13, true) == SlotKind::kSpan);
  CHECK(classify_slot_kind(3, false) == SlotKind::kSpan);
}

TEST_CASE("corpus: validation catches bad annotations") {
  Corpus good = tiny_corpus();
  CHECK_NOTHROW(validate_corpus(good));

  Corpus bad_span = good;
  bad_span.dialogues[0].turns[0].slots["hotel_area"].span_begin = 0;
  bad_span.dialogues[0].turns[0].slots["hotel_area"].span_end = 5;
  CHECK_THROWS_WITH_AS(validate_corpus(bad_span),
                       doctest::Contains("does not match"), CorpusError);

  Corpus bad_value = good;
  bad_value.dialogues[0].turns[0].slots["hotel_price"] = {Gate::kValue, "free", false, 0, 0};
  CHECK_THROWS_WITH_AS(validate_corpus(bad_value),
                       doctest::Contains("outside the ontology"), CorpusError);

  Corpus bad_key = good;
  bad_key.dialogues[0].turns[0].slots["parking"] = {Gate::kDontcare, "", false, 0, 0};
  CHECK_THROWS_AS(validate_corpus(bad_key), CorpusError);

  Corpus bad_intent = good;
  bad_intent.dialogues[0].turns[0].intent = "order_pizza";
  CHECK_THROWS_AS(validate_corpus(bad_intent), CorpusError);
}

TEST_CASE("corpus: json and file round trip") {
  Corpus c = tiny_corpus();
  Corpus back = corpus_from_json(corpus_to_json(c));
  CHECK(back.dialogues.size() == 1);
  CHECK(back.dialogues[0].turns[0].usr == c.dialogues[0].turns[0].usr);
  CHECK(back.dialogues[0].turns[0].slots.at("hotel_area").span_begin == 25);
  CHECK(back.turn_count() == 1);

  const std::string path = temp_path("corpus");
  save_corpus(path, c);
  Corpus loaded = load_corpus(path);
  CHECK(corpus_to_json(loaded) == corpus_to_json(c));
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_corpus("does_not_exist.json"), IoError);
  CHECK_THROWS_AS(corpus_from_json("not json"), CorpusError);
}

TEST_CASE("cramers_v: closed forms") {
  CHECK(cramers_v({{10, 0}, {0, 10}}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cramers_v({{5, 5}, {5, 5}}) == doctest::Approx(0.0));
  CHECK(cramers_v({{8, 2}, {2, 8}}) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("cramers_v: degenerate handling and errors") {
  // zero column dropped, still a valid 2x2 left
  CHECK(cramers_v({{10, 0, 0}, {0, 0, 10}}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(cramers_v({{1, 2}}), DimensionError);
  CHECK_THROWS_AS(cramers_v({{1}, {2}}), DimensionError);
  CHECK_THROWS_AS(cramers_v({{0, 0}, {0, 0}}), UndefinedValueError);
  CHECK_THROWS_AS(cramers_v({{3, 4}, {0, 0}}), UndefinedValueError);
  CHECK_THROWS_AS(cramers_v({{-1, 2}, {3, 4}}), NumericError);
}

TEST_CASE("cramers_v: permutation tables score 1, proportional rows score 0") {
  CHECK(cramers_v({{0, 7, 0}, {0, 0, 3}, {5, 0, 0}}) == doctest::Approx(1.0));
  CHECK(cramers_v({{2, 4, 6}, {1, 2, 3}, {3, 6, 9}}) ==
        doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("generator: deterministic and validator-clean") {
  Schema s = toy_schema();
  auto a = generate_synthetic(s, 20, 0.8, 42);
  auto b = generate_synthetic(s, 20, 0.8, 42);
  REQUIRE(a.size() == 20);
  Corpus ca{s, a};
  Corpus cb{s, b};
  CHECK(corpus_to_json(ca) == corpus_to_json(cb));
  CHECK_NOTHROW(validate_corpus(ca));

  auto c = generate_synthetic(s, 20, 0.8, 43);
  CHECK(corpus_to_json(ca) != corpus_to_json(Corpus{s, c}));

  for (const auto& d : a) {
    CHECK(d.turns.size() >= 2);
    CHECK(d.turns.size() <= 5);
    CHECK(d.turns[0].sys.empty());
  }
}

TEST_CASE("generator: rho drives measured association monotonically") {
  Schema s = toy_schema();
  std::vector<double> vs;
  for (double rho : {0.0, 0.5, 1.0}) {
    GeneratorConfig cfg;
    cfg.rho = rho;
    Corpus c{s, generate_synthetic(s, 600, cfg, 7)};
    REQUIRE(c.turn_count() >= 1200);
    vs.push_back(measure_cramers_v(c));
  }
  CHECK(vs[0] <= 0.1);
  CHECK(vs[2] >= 0.95);
  CHECK(vs[0] < vs[1]);
  CHECK(vs[1] < vs[2]);
}

TEST_CASE("generator: paraphrased categorical mentions carry no span") {
  Schema s = toy_schema();
  GeneratorConfig cfg;
  cfg.rho = 1.0;
  cfg.paraphrase_prob = 1.0;
  auto ds = generate_synthetic(s, 50, cfg, 9);
  std::size_t cat_mentions = 0;
  for (const auto& d : ds)
    for (const auto& t : d.turns)
      for (const auto& [key, ann] : t.slots) {
        if (s.slot(key).kind != SlotKind::kCategorical || ann.gate != Gate::kValue)
          continue;
        ++cat_mentions;
        CHECK(!ann.has_span);
        CHECK(t.usr.find(ann.value) == std::string::npos);
      }
  CHECK(cat_mentions > 20);
}

TEST_CASE("generator: intent subsets partition slots in schema order") {
  Schema s = toy_schema();
  auto subsets = intent_slot_subsets(s);
  CHECK(subsets[0].empty());  // none
  CHECK(subsets[1] == std::vector<std::size_t>{0, 1});
  CHECK(subsets[2] == std::vector<std::size_t>{2, 3});
}
