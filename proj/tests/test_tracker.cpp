#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "tcdst/error.hpp"
#include "tcdst/generator.hpp"
#include "tcdst/rng.hpp"
#include "tcdst/tracker.hpp"

using namespace tcdst;

namespace {

TurnPrediction turn_of(std::initializer_list<std::pair<std::string, SlotOutcome>>
                           slots,
                       const std::string& intent = "") {
  TurnPrediction t;
  if (!intent.empty()) t.intent = intent;
  for (const auto& [k, o] : slots) t.slots[k] = o;
  return t;
}

SlotOutcome val(const std::string& v) { return {Gate::kValue, v}; }
SlotOutcome dontcare() { return {Gate::kDontcare, ""}; }
SlotOutcome none() { return {Gate::kNone, ""}; }

// rebuilds the state from scratch at every turn
double brute_jga(const std::vector<std::vector<TurnPrediction>>& pred,
                 const std::vector<std::vector<TurnPrediction>>& gold) {
  std::size_t turns = 0, hits = 0;
  for (std::size_t d = 0; d < pred.size(); ++d)
    for (std::size_t t = 0; t < pred[d].size(); ++t) {
      auto accumulate = [&](const std::vector<TurnPrediction>& seq) {
        DialogueState s;
        for (std::size_t i = 0; i <= t; ++i)
          for (const auto& [key, o] : seq[i].slots) {
            if (o.gate == Gate::kDontcare) s[key] = "dontcare";
            if (o.gate == Gate::kValue) s[key] = normalize_value(o.value);
          }
        return s;
      };
      ++turns;
      if (accumulate(pred[d]) == accumulate(gold[d])) ++hits;
    }
  return turns ? static_cast<double>(hits) / turns : 0.0;
}

std::vector<std::vector<TurnPrediction>> gold_of(
    const std::vector<Dialogue>& ds) {
  std::vector<std::vector<TurnPrediction>> out;
  for (const auto& d : ds) {
    std::vector<TurnPrediction> seq;
    for (const auto& t : d.turns) seq.push_back(gold_prediction(t));
    out.push_back(seq);
  }
  return out;
}

}  // namespace

TEST_CASE("normalize_value") {
  CHECK(normalize_value("  Palo  Alto ") == "palo alto");
  CHECK(normalize_value("CHEAP") == "cheap");
  CHECK(normalize_value("a\tb\n c") == "a b c");
  CHECK(normalize_value("") == "");
  CHECK(normalize_value("   ") == "");
}

TEST_CASE("update_state semantics") {
  Schema schema = toy_schema();
  DialogueState s;
  update_state(s, turn_of({{"hotel_price", val("cheap")}}), schema);
  CHECK(s == DialogueState{{"hotel_price", "cheap"}});
  // none leaves the key untouched
  update_state(s, turn_of({{"hotel_price", none()}}), schema);
  CHECK(s == DialogueState{{"hotel_price", "cheap"}});
  // replacement plus insertion
  update_state(s, turn_of({{"hotel_price", val("Moderate")},
                           {"hotel_area", val(" North ")}}),
               schema);
  CHECK(s == DialogueState{{"hotel_price", "moderate"},
                           {"hotel_area", "north"}});
  update_state(s, turn_of({{"hotel_area", dontcare()}}), schema);
  CHECK(s.at("hotel_area") == "dontcare");
  // idempotent on repeats
  auto before = s;
  update_state(s, turn_of({{"hotel_area", dontcare()}}), schema);
  CHECK(s == before);
  CHECK_THROWS_AS(update_state(s, turn_of({{"bogus", val("x")}}), schema),
                  SchemaError);
}

TEST_CASE("joint goal accuracy hand traces") {
  auto g1 = turn_of({{"hotel_price", val("cheap")}});
  auto g2 = turn_of({{"hotel_area", val("north")}});
  auto g3 = turn_of({});
  std::vector<std::vector<TurnPrediction>> gold{{g1, g2, g3}};

  // perfect
  CHECK(joint_goal_accuracy(gold, gold) == doctest::Approx(1.0));

  // turn 1 wrong, reclassified at turn 2, turn 3 coasts: 2/3
  auto p1 = turn_of({{"hotel_price", val("expensive")}});
  auto p2 = turn_of({{"hotel_price", val("cheap")},
                     {"hotel_area", val("north")}});
  CHECK(joint_goal_accuracy({{p1, p2, g3}}, gold) == doctest::Approx(2.0 / 3));

  // turn 1 wrong and never repaired: 0/3
  CHECK(joint_goal_accuracy({{p1, g2, g3}}, gold) == doctest::Approx(0.0));

  CHECK_THROWS_AS(joint_goal_accuracy({{p1}}, gold), AlignmentError);
  CHECK_THROWS_AS(joint_goal_accuracy({}, gold), AlignmentError);
}

TEST_CASE("joint goal accuracy matches the from-scratch oracle") {
  Schema schema = toy_schema();
  auto dialogues = generate_synthetic(schema, 40, 0.7, 123);
  auto gold = gold_of(dialogues);

  // corrupt a deterministic subset of predictions
  Rng rng(55);
  auto pred = gold;
  for (auto& d : pred)
    for (auto& t : d) {
      if (rng.coin(0.3) && !t.slots.empty()) {
        auto it = t.slots.begin();
        std::advance(it, rng.bounded(t.slots.size()));
        it->second = val("garbled");
      }
      if (rng.coin(0.15)) t.slots["hotel_area"] = dontcare();
    }
  CHECK(joint_goal_accuracy(pred, gold) ==
        doctest::Approx(brute_jga(pred, gold)));
  CHECK(joint_goal_accuracy(gold, gold) == doctest::Approx(1.0));
}

TEST_CASE("joint goal accuracy degrades monotonically with corruption") {
  Schema schema = toy_schema();
  auto dialogues = generate_synthetic(schema, 25, 1.0, 77);
  auto gold = gold_of(dialogues);
  auto pred = gold;
  double prev = joint_goal_accuracy(pred, gold);
  CHECK(prev == doctest::Approx(1.0));
  // corrupt one additional final turn each round; never repaired
  for (std::size_t d = 0; d < 10; ++d) {
    pred[d].back().slots["hotel_area"] = val("wrong value " + std::to_string(d));
    double now = joint_goal_accuracy(pred, gold);
    CHECK(now <= prev + 1e-12);
    prev = now;
  }
  CHECK(prev < 1.0);
}

TEST_CASE("slot f1 hand cases") {
  auto g = turn_of({{"hotel_price", val("cheap")},
                    {"hotel_area", val("north")}});
  CHECK(slot_f1({g}, {g}) == doctest::Approx(1.0));
  CHECK(slot_f1({turn_of({})}, {g}) == doctest::Approx(0.0));
  // 1 correct + 1 spurious vs 2 gold: P=0.5, R=0.5
  auto p = turn_of({{"hotel_price", val("cheap")},
                    {"restaurant_area", val("south")}});
  CHECK(slot_f1({p}, {g}) == doctest::Approx(0.5));
  // value mismatch is not a true positive
  auto p2 = turn_of({{"hotel_price", val("expensive")}});
  CHECK(slot_f1({p2}, {g}) == doctest::Approx(0.0));
  // normalization applies to both sides
  auto p3 = turn_of({{"hotel_price", val("  CHEAP ")},
                     {"hotel_area", val("North")}});
  CHECK(slot_f1({p3}, {g}) == doctest::Approx(1.0));
  // both empty scores 1
  CHECK(slot_f1({turn_of({})}, {turn_of({})}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(slot_f1({g, g}, {g}), AlignmentError);
}

TEST_CASE("slot f1 and intent accuracy are turn-permutation invariant") {
  Schema schema = toy_schema();
  auto dialogues = generate_synthetic(schema, 10, 0.5, 31);
  std::vector<TurnPrediction> gold, pred;
  Rng rng(8);
  for (const auto& d : dialogues)
    for (const auto& t : d.turns) {
      gold.push_back(gold_prediction(t));
      auto p = gold.back();
      if (rng.coin(0.4)) p.slots.clear();
      if (rng.coin(0.3)) p.intent = "none";
      pred.push_back(p);
    }
  const double f1 = slot_f1(pred, gold);
  const double acc = intent_accuracy(pred, gold);
  std::vector<std::size_t> perm(gold.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  rng.shuffle(perm);
  std::vector<TurnPrediction> gold_p, pred_p;
  for (auto i : perm) {
    gold_p.push_back(gold[i]);
    pred_p.push_back(pred[i]);
  }
  CHECK(slot_f1(pred_p, gold_p) == doctest::Approx(f1));
  CHECK(intent_accuracy(pred_p, gold_p) == doctest::Approx(acc));
}

TEST_CASE("intent accuracy") {
  std::vector<TurnPrediction> gold, pred;
  for (int i = 0; i < 10; ++i) {
    gold.push_back(turn_of({}, "find_hotel"));
    pred.push_back(turn_of({}, i == 0 ? "none" : "find_hotel"));
  }
  CHECK(intent_accuracy(pred, gold) == doctest::Approx(0.9));
  CHECK(intent_accuracy(gold, gold) == doctest::Approx(1.0));
  std::vector<TurnPrediction> blank(10);
  CHECK(intent_accuracy(blank, gold) == doctest::Approx(0.0));
  CHECK_THROWS_AS(intent_accuracy({}, gold), AlignmentError);
}

TEST_CASE("per-slot f1 splits by key") {
  Schema schema = toy_schema();
  auto g = turn_of({{"hotel_price", val("cheap")},
                    {"hotel_area", val("north")}});
  auto p = turn_of({{"hotel_price", val("cheap")},
                    {"hotel_area", val("south")}});
  auto f = per_slot_f1({p}, {g}, schema);
  CHECK(f.at("hotel_price") == doctest::Approx(1.0));
  CHECK(f.at("hotel_area") == doctest::Approx(0.0));
  CHECK(f.at("restaurant_area") == doctest::Approx(1.0));  // both empty
  CHECK(f.size() == schema.slots.size());
}

TEST_CASE("gold_prediction mirrors turn annotations") {
  Schema schema = toy_schema();
  auto dialogues = generate_synthetic(schema, 5, 1.0, 2);
  for (const auto& d : dialogues)
    for (const auto& t : d.turns) {
      auto g = gold_prediction(t);
      CHECK(g.intent == t.intent);
      CHECK(g.slots.size() == t.slots.size());
      for (const auto& [k, ann] : t.slots) {
        CHECK(g.slots.at(k).gate == ann.gate);
        CHECK(g.slots.at(k).value == ann.value);
      }
    }
}
