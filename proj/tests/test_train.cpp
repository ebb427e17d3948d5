#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tcdst/checkpoint.hpp"
#include "tcdst/corpus.hpp"
#include "tcdst/error.hpp"
#include "tcdst/generator.hpp"
#include "tcdst/schema.hpp"
#include "tcdst/train.hpp"
#include "tcdst/vocab.hpp"

using namespace tcdst;
using json = nlohmann::json;

namespace {

Schema toy_schema() {
  Schema s;
  s.intents = {"none", "book_hotel", "book_restaurant"};
  s.slots.push_back({"hotel_area", SlotKind::kSpan, {}});
  s.slots.push_back({"hotel_price", SlotKind::kCategorical, {"cheap", "moderate", "expensive"}});
  s.slots.push_back({"restaurant_food", SlotKind::kSpan, {}});
  s.slots.push_back({"restaurant_price", SlotKind::kCategorical, {"cheap", "moderate", "expensive"}});
  return s;
}

Corpus toy_corpus(std::size_t n, double rho, std::uint64_t seed) {
  Corpus c;
  c.schema = toy_schema();
  c.dialogues = generate_synthetic(c.schema, n, rho, seed);
  return c;
}

std::string temp_path(const std::string& name) {
  return std::string("/tmp/tcdst_train_") + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig tiny_config(const std::string& tag) {
  RunConfig c;
  c.variant = Variant::kBdstJ;
  c.encoder.num_layers = 1;
  c.encoder.hidden_size = 16;
  c.encoder.num_heads = 2;
  c.encoder.ffn_size = 32;
  c.encoder.max_len = 48;
  c.encoder.dropout_rate = 0.0;
  c.batch_size = 8;
  c.epochs = 2;
  c.seed = 31;
  c.train_corpus = temp_path(tag + "_train.json");
  c.checkpoint = temp_path(tag + ".ckpt");
  return c;
}

}  // namespace

TEST_CASE("run config json round trip and rejection") {
  const char* text = R"({
    "variant": "bdst-j",
    "encoder": {"num_layers": 3, "hidden_size": 96, "num_heads": 6,
                "max_len": 96, "dropout_rate": 0.2},
    "alpha": 0.4, "beta_intent": 0.25, "alpha_joint": 0.6,
    "batch_size": 16, "epochs": 7, "learning_rate": 0.001,
    "seed": 99, "history_window": 4,
    "train_corpus": "a.json", "val_corpus": "b.json",
    "checkpoint": "m.ckpt", "log_path": "log.jsonl", "precision": "f64"
  })";
  RunConfig c = run_config_from_json(text);
  CHECK(c.variant == Variant::kBdstJ);
  CHECK(c.encoder.num_layers == 3);
  CHECK(c.encoder.hidden_size == 96);
  CHECK(c.encoder.num_heads == 6);
  CHECK(c.encoder.ffn() == 384);
  CHECK(c.encoder.max_len == 96);
  CHECK(c.encoder.dropout_rate == doctest::Approx(0.2));
  CHECK(c.alpha == doctest::Approx(0.4));
  CHECK(c.beta_intent == doctest::Approx(0.25));
  CHECK(c.alpha_joint == doctest::Approx(0.6));
  CHECK(c.batch_size == 16);
  CHECK(c.epochs == 7);
  CHECK(c.learning_rate == doctest::Approx(0.001));
  CHECK(c.seed == 99);
  CHECK(c.history_window == 4);
  CHECK(c.train_corpus == "a.json");
  CHECK(c.val_corpus == "b.json");
  CHECK(c.checkpoint == "m.ckpt");
  CHECK(c.log_path == "log.jsonl");
  CHECK(c.precision == "f64");

  CHECK_THROWS_AS(run_config_from_json(R"({"unknown_key": 1})"), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(R"({"encoder": {"depth": 2}})"), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(R"({"variant": "bert"})"), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(R"({"precision": "f16"})"), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(R"({"batch_size": 0})"), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(R"({"epochs": 0})"), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(R"({"alpha": 1.5})"), ConfigError);
  CHECK_THROWS_AS(run_config_from_json("not json"), ConfigError);
  CHECK_THROWS_AS(run_config_from_json("[1,2]"), ConfigError);
  CHECK_THROWS_AS(load_run_config("/tmp/tcdst_no_such_config.json"), IoError);
}

TEST_CASE("eval report json shape") {
  EvalReport r;
  r.turn_count = 12;
  r.joint_goal = 0.75;
  r.slot_f1 = 0.5;
  r.intent_accuracy = 1.0;
  r.per_slot = {{"hotel_area", 0.25}, {"hotel_price", 1.0}};

  json with = json::parse(report_to_json(r, true));
  CHECK(with["joint_goal"] == doctest::Approx(0.75));
  CHECK(with["slot_f1"] == doctest::Approx(0.5));
  CHECK(with["intent_accuracy"] == doctest::Approx(1.0));
  CHECK(with["per_slot"]["hotel_area"] == doctest::Approx(0.25));
  CHECK(with["turn_count"] == 12);

  json without = json::parse(report_to_json(r, false));
  CHECK(!without.contains("intent_accuracy"));
  CHECK(without["slot_f1"] == doctest::Approx(0.5));

  EvalReport empty;
  json e = json::parse(report_to_json(empty, true));
  CHECK(e["joint_goal"].is_null());
  CHECK(e["slot_f1"].is_null());
  CHECK(e["intent_accuracy"].is_null());
  CHECK(e["per_slot"].is_null());
  CHECK(e["turn_count"] == 0);
}

TEST_CASE("dialogue inputs feed gold history in order") {
  Corpus corpus = toy_corpus(4, 1.0, 21);
  Vocabulary vocab = Vocabulary::build(corpus.dialogues, corpus.schema);

  for (const auto& d : corpus.dialogues) {
    auto seqs = dialogue_inputs(d, Variant::kBdstJ, corpus.schema, vocab, 128, 8);
    REQUIRE(seqs.size() == d.turns.size());
    // Count speaker tags: turn t sees all prior sys/usr plus its own
    // sys (when present) and usr, subject only to the window of 8.
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      std::size_t expect = 0;
      for (std::size_t u = 0; u + 1 <= t; ++u) {
        if (!d.turns[u].sys.empty()) ++expect;
        ++expect;
      }
      if (!d.turns[t].sys.empty()) ++expect;
      ++expect;  // current usr
      expect = std::min<std::size_t>(expect, 8 + 1);
      std::size_t tags = 0;
      for (std::size_t i = 0; i < seqs[t].length(); ++i) {
        std::size_t id = seqs[t].token_ids[i];
        if (id == Vocabulary::kSys || id == Vocabulary::kUsr) ++tags;
      }
      CHECK(tags == expect);
    }
  }
}

TEST_CASE("build_training_examples yields one example per turn") {
  Corpus corpus = toy_corpus(5, 1.0, 33);
  Vocabulary vocab = Vocabulary::build(corpus.dialogues, corpus.schema);
  auto ex = build_training_examples(corpus, Variant::kBdstJ, vocab, 128, 2);
  CHECK(ex.size() == corpus.turn_count());
  for (const auto& e : ex) {
    CHECK(e.seq.length() >= 4);
    CHECK(e.targets.span_slots.count("hotel_area") == 1);
    CHECK(e.targets.cat_targets.count("hotel_price") == 1);
  }
}

TEST_CASE("oracle evaluation is perfect by construction") {
  Corpus corpus = toy_corpus(6, 0.8, 44);
  Vocabulary vocab = Vocabulary::build(corpus.dialogues, corpus.schema);
  EncoderConfig cfg;
  cfg.num_layers = 1;
  cfg.hidden_size = 16;
  cfg.num_heads = 2;
  cfg.max_len = 64;
  cfg.dropout_rate = 0.0;
  auto model = make_model<double>(corpus.schema, vocab, Variant::kBdstJ, cfg, 1, 3);

  EvalReport r = evaluate_model(model, corpus, true);
  CHECK(r.turn_count == corpus.turn_count());
  CHECK(r.joint_goal == doctest::Approx(1.0));
  CHECK(r.slot_f1 == doctest::Approx(1.0));
  REQUIRE(r.intent_accuracy.has_value());
  CHECK(*r.intent_accuracy == doctest::Approx(1.0));
  for (const auto& [k, v] : r.per_slot) CHECK(v == doctest::Approx(1.0));

  Corpus empty;
  empty.schema = corpus.schema;
  EvalReport e = evaluate_model(model, empty, true);
  CHECK(e.turn_count == 0);
  CHECK(!e.has_metrics());
}

TEST_CASE("untrained model evaluation stays in range and respects variant") {
  Corpus corpus = toy_corpus(4, 1.0, 50);
  Vocabulary vocab = Vocabulary::build(corpus.dialogues, corpus.schema);
  EncoderConfig cfg;
  cfg.num_layers = 1;
  cfg.hidden_size = 16;
  cfg.num_heads = 2;
  cfg.max_len = 64;
  cfg.dropout_rate = 0.0;

  auto j = make_model<double>(corpus.schema, vocab, Variant::kBdstJ, cfg, 1, 3);
  EvalReport rj = evaluate_model(j, corpus, false);
  CHECK(rj.joint_goal >= 0.0);
  CHECK(rj.joint_goal <= 1.0);
  CHECK(rj.intent_accuracy.has_value());

  auto b = make_model<double>(corpus.schema, vocab, Variant::kBaseline, cfg, 1, 3);
  EvalReport rb = evaluate_model(b, corpus, false);
  CHECK(!rb.intent_accuracy.has_value());
  CHECK(!json::parse(report_to_json(rb, rb.intent_accuracy.has_value()))
             .contains("intent_accuracy"));
}

TEST_CASE("training loop runs, logs, and checkpoints the best epoch") {
  Corpus corpus = toy_corpus(6, 1.0, 60);
  RunConfig cfg = tiny_config("loop");
  cfg.log_path = temp_path("loop.jsonl");
  save_corpus(cfg.train_corpus, corpus);

  std::ostringstream diag;
  TrainResult result = train_model<double>(cfg, diag);
  REQUIRE(result.log_lines.size() == cfg.epochs);
  CHECK(result.best_epoch >= 1);
  CHECK(result.best_epoch <= cfg.epochs);
  CHECK(result.best_val_joint_goal >= 0.0);
  CHECK(result.best_val_joint_goal <= 1.0);

  for (std::size_t i = 0; i < result.log_lines.size(); ++i) {
    json line = json::parse(result.log_lines[i]);
    CHECK(line["epoch"] == i + 1);
    CHECK(line["loss"].is_number());
    CHECK(line["loss"].get<double>() > 0.0);
    CHECK(line["gate_span"].is_number());
    CHECK(line["intent"].is_number());
    CHECK(line["cat"].is_number());
    CHECK(line["val_joint_goal"].is_number());
  }

  // The log file mirrors log_lines exactly.
  std::string file_text = slurp(cfg.log_path);
  std::string joined;
  for (const auto& l : result.log_lines) joined += l + "\n";
  CHECK(file_text == joined);

  auto model = load_model<double>(cfg.checkpoint);
  CHECK(model.variant == Variant::kBdstJ);
  CHECK(model.adam.step_count > 0);

  // Re-evaluating the saved best checkpoint reproduces the best logged metric.
  EvalReport r = evaluate_model(model, corpus, false);
  CHECK(r.joint_goal == doctest::Approx(result.best_val_joint_goal));

  std::remove(cfg.train_corpus.c_str());
  std::remove(cfg.checkpoint.c_str());
  std::remove(cfg.log_path.c_str());
}

TEST_CASE("one epoch takes exactly ceil(turns/batch) optimizer steps") {
  Corpus corpus = toy_corpus(8, 1.0, 65);
  RunConfig cfg = tiny_config("steps");
  cfg.epochs = 1;
  cfg.batch_size = 32;
  save_corpus(cfg.train_corpus, corpus);

  std::ostringstream diag;
  train_model<double>(cfg, diag);
  auto model = load_model<double>(cfg.checkpoint);
  const auto turns = corpus.turn_count();
  CHECK(model.adam.step_count ==
        static_cast<std::int64_t>((turns + 31) / 32));

  std::remove(cfg.train_corpus.c_str());
  std::remove(cfg.checkpoint.c_str());
}

TEST_CASE("training is deterministic for a fixed seed") {
  Corpus corpus = toy_corpus(5, 1.0, 70);
  RunConfig a = tiny_config("det_a");
  RunConfig b = tiny_config("det_b");
  save_corpus(a.train_corpus, corpus);
  save_corpus(b.train_corpus, corpus);

  std::ostringstream diag_a, diag_b;
  TrainResult ra = train_model<double>(a, diag_a);
  TrainResult rb = train_model<double>(b, diag_b);
  CHECK(ra.log_lines == rb.log_lines);
  CHECK(ra.best_epoch == rb.best_epoch);
  CHECK(slurp(a.checkpoint) == slurp(b.checkpoint));

  RunConfig c = tiny_config("det_c");
  c.seed = 32;
  save_corpus(c.train_corpus, corpus);
  std::ostringstream diag_c;
  TrainResult rc = train_model<double>(c, diag_c);
  CHECK(ra.log_lines != rc.log_lines);

  for (const auto& cfg : {a, b, c}) {
    std::remove(cfg.train_corpus.c_str());
    std::remove(cfg.checkpoint.c_str());
  }
}

TEST_CASE("loss decreases over a few epochs on a tiny corpus") {
  Corpus corpus = toy_corpus(4, 1.0, 80);
  RunConfig cfg = tiny_config("descent");
  cfg.epochs = 8;
  cfg.learning_rate = 1e-3;
  save_corpus(cfg.train_corpus, corpus);

  std::ostringstream diag;
  TrainResult result = train_model<double>(cfg, diag);
  double first = json::parse(result.log_lines.front())["loss"].get<double>();
  double last = json::parse(result.log_lines.back())["loss"].get<double>();
  CHECK(last < first);

  std::remove(cfg.train_corpus.c_str());
  std::remove(cfg.checkpoint.c_str());
}

TEST_CASE("resume restores optimizer state and keeps training") {
  Corpus corpus = toy_corpus(4, 1.0, 90);
  RunConfig first = tiny_config("resume_1");
  first.epochs = 1;
  save_corpus(first.train_corpus, corpus);
  std::ostringstream diag1;
  train_model<double>(first, diag1);
  auto warm = load_model<double>(first.checkpoint);
  const auto steps_before = warm.adam.step_count;
  CHECK(steps_before > 0);

  RunConfig second = tiny_config("resume_2");
  second.epochs = 1;
  second.train_corpus = first.train_corpus;
  second.resume = first.checkpoint;
  std::ostringstream diag2;
  TrainResult r2 = train_model<double>(second, diag2);
  CHECK(r2.log_lines.size() == 1);
  auto resumed = load_model<double>(second.checkpoint);
  CHECK(resumed.adam.step_count > steps_before);
  CHECK(resumed.adam.learning_rate == doctest::Approx(2e-6));

  RunConfig wrong = tiny_config("resume_3");
  wrong.variant = Variant::kBdstC;
  wrong.train_corpus = first.train_corpus;
  wrong.resume = first.checkpoint;
  std::ostringstream diag3;
  CHECK_THROWS_AS(train_model<double>(wrong, diag3), ConfigError);

  std::remove(first.train_corpus.c_str());
  std::remove(first.checkpoint.c_str());
  std::remove(second.checkpoint.c_str());
}

TEST_CASE("bdst-j downgrades to bdst-i when the schema has no categorical slots") {
  Schema schema;
  schema.intents = {"none", "book_hotel", "book_restaurant"};
  schema.slots.push_back({"hotel_area", SlotKind::kSpan, {}});
  schema.slots.push_back({"restaurant_food", SlotKind::kSpan, {}});
  Corpus corpus;
  corpus.schema = schema;
  corpus.dialogues = generate_synthetic(schema, 4, 1.0, 13);

  RunConfig cfg = tiny_config("downgrade");
  cfg.epochs = 1;
  save_corpus(cfg.train_corpus, corpus);

  std::ostringstream diag;
  train_model<double>(cfg, diag);
  CHECK(diag.str().find("bdst-i") != std::string::npos);
  auto model = load_model<double>(cfg.checkpoint);
  CHECK(model.variant == Variant::kBdstI);

  std::remove(cfg.train_corpus.c_str());
  std::remove(cfg.checkpoint.c_str());
}

TEST_CASE("training configuration errors surface early") {
  RunConfig cfg = tiny_config("errs");
  cfg.train_corpus = "";
  std::ostringstream diag;
  CHECK_THROWS_AS(train_model<double>(cfg, diag), ConfigError);

  cfg = tiny_config("errs");
  cfg.checkpoint = "";
  CHECK_THROWS_AS(train_model<double>(cfg, diag), ConfigError);

  cfg = tiny_config("errs");
  cfg.train_corpus = "/tmp/tcdst_no_such_corpus.json";
  CHECK_THROWS_AS(train_model<double>(cfg, diag), IoError);
}
