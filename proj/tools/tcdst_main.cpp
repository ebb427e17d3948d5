#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tcdst/checkpoint.hpp"
#include "tcdst/corpus.hpp"
#include "tcdst/error.hpp"
#include "tcdst/generator.hpp"
#include "tcdst/gradcheck.hpp"
#include "tcdst/heads.hpp"
#include "tcdst/input.hpp"
#include "tcdst/model.hpp"
#include "tcdst/schema.hpp"
#include "tcdst/stats.hpp"
#include "tcdst/tracker.hpp"
#include "tcdst/train.hpp"
#include "tcdst/vocab.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace tcdst;

struct TrainArgs {
  std::string config;
  std::string variant;
  std::string corpus;
  std::string out;
  std::uint64_t seed = 0;
  bool has_seed = false;
};

int cmd_train(const TrainArgs& args) {
  RunConfig cfg = load_run_config(args.config);
  if (!args.variant.empty()) cfg.variant = variant_from_name(args.variant);
  if (!args.corpus.empty()) cfg.train_corpus = args.corpus;
  if (!args.out.empty()) cfg.checkpoint = args.out;
  if (args.has_seed) cfg.seed = args.seed;
  cfg.validate();

  TrainResult result;
  if (cfg.precision == "f64")
    result = train_model<double>(cfg, std::cerr);
  else
    result = train_model<float>(cfg, std::cerr);
  for (const auto& line : result.log_lines) std::cout << line << "\n";
  std::cerr << "best epoch " << result.best_epoch << " val_joint_goal "
            << result.best_val_joint_goal << "\n";
  return 0;
}

template <class T>
std::string eval_with(const std::string& checkpoint, const Corpus& corpus,
                      bool oracle) {
  Model<T> model = load_model<T>(checkpoint);
  if (model.schema.to_json() != corpus.schema.to_json())
    throw ConfigError("checkpoint schema differs from corpus schema");
  EvalReport report = evaluate_model(model, corpus, oracle);
  return report_to_json(report, report.intent_accuracy.has_value());
}

int cmd_eval(const std::string& checkpoint, const std::string& corpus_path,
             bool oracle, const std::string& out) {
  Corpus corpus = load_corpus(corpus_path);
  validate_corpus(corpus);
  std::string text = checkpoint_precision(checkpoint) == "f64"
                         ? eval_with<double>(checkpoint, corpus, oracle)
                         : eval_with<float>(checkpoint, corpus, oracle);
  std::cout << text << "\n";
  if (!out.empty()) {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw IoError("cannot write report '" + out + "'");
    f << text << "\n";
  }
  return 0;
}

template <class T>
void print_turn(const Model<T>& model, const TurnPrediction& pred,
                const DialogueState& state) {
  if (pred.intent) std::cout << "intent: " << *pred.intent << "\n";
  for (const auto& slot : model.schema.slots) {
    auto it = pred.slots.find(slot.key);
    if (it == pred.slots.end()) continue;
    std::cout << slot.key << ": ";
    switch (it->second.gate) {
      case Gate::kNone: std::cout << "none"; break;
      case Gate::kDontcare: std::cout << "dontcare"; break;
      case Gate::kValue: std::cout << "\"" << it->second.value << "\""; break;
    }
    std::cout << "\n";
  }
  json st = json::object();
  for (const auto& [k, v] : state) st[k] = v;
  std::cout << "state: " << st.dump() << "\n";
}

constexpr const char* kReplHelp =
    "lines alternate system / user; prediction runs after each user line\n"
    "  /reset  clear dialogue state and history\n"
    "  /quit   exit\n";

template <class T>
int repl_with(const std::string& checkpoint) {
  Model<T> model = load_model<T>(checkpoint);
  std::vector<HistoryUtterance> history;
  DialogueState state;
  bool expect_system = true;

  std::cout << kReplHelp;
  std::string line;
  while (true) {
    std::cout << (expect_system ? "sys> " : "usr> ") << std::flush;
    if (!std::getline(std::cin, line)) break;
    if (!line.empty() && line[0] == '/') {
      if (line == "/quit") return 0;
      if (line == "/reset") {
        history.clear();
        state.clear();
        expect_system = true;
        std::cout << "state: {}\n";
        continue;
      }
      std::cout << kReplHelp;
      continue;
    }
    if (expect_system) {
      if (!line.empty()) history.push_back({false, line});
      expect_system = false;
      continue;
    }
    try {
      InputSequence seq = build_input_sequence(
          model.variant, model.schema, model.vocab, history, line,
          model.cfg.max_len, model.history_window);
      TurnPrediction pred =
          predict_turn(model.store, model.cfg, model.variant, model.schema, seq);
      update_state(state, pred, model.schema);
      print_turn(model, pred, state);
    } catch (const ValidationError& e) {
      std::cout << "error: " << e.what() << "\n" << kReplHelp;
    }
    history.push_back({true, line});
    expect_system = true;
  }
  return 0;
}

int cmd_repl(const std::string& checkpoint) {
  if (checkpoint_precision(checkpoint) == "f64")
    return repl_with<double>(checkpoint);
  return repl_with<float>(checkpoint);
}

int cmd_generate(const std::string& schema_path, std::size_t n, double rho,
                 std::uint64_t seed, const std::string& out) {
  Schema schema = schema_path.empty() ? toy_schema() : load_schema(schema_path);
  Corpus corpus;
  corpus.schema = schema;
  corpus.dialogues = generate_synthetic(schema, n, rho, seed);
  save_corpus(out, corpus);
  std::cout << "dialogues: " << corpus.dialogues.size() << "\n";
  std::cout << "turns: " << corpus.turn_count() << "\n";
  try {
    std::cout << "cramers_v: " << measure_cramers_v(corpus) << "\n";
  } catch (const UndefinedValueError&) {
    std::cout << "cramers_v: undefined\n";
  }
  return 0;
}

int cmd_gradcheck(std::uint64_t seed) {
  Schema schema = toy_schema();
  Corpus corpus;
  corpus.schema = schema;
  corpus.dialogues = generate_synthetic(schema, 4, 1.0, seed);
  Vocabulary vocab = Vocabulary::build(corpus.dialogues, schema);

  EncoderConfig cfg;
  cfg.num_layers = 2;
  cfg.hidden_size = 32;
  cfg.num_heads = 4;
  cfg.max_len = 24;
  cfg.dropout_rate = 0.0;
  auto model =
      make_model<double>(schema, vocab, Variant::kBdstJ, cfg, 1, seed + 1);

  auto examples = build_training_examples(corpus, Variant::kBdstJ, vocab,
                                          cfg.max_len, 1);
  std::vector<TrainExample> batch(examples.begin(),
                                  examples.begin() + std::min<std::size_t>(
                                                         2, examples.size()));
  Rng rng(7);
  auto loss_fn = [&](bool record) -> double {
    Tape<double> tape(record);
    auto r = batch_loss(tape, model.store, model.cfg, model.variant,
                        model.schema, model.weights, batch, Mode::kEval, rng);
    if (record) {
      model.store.zero_grads();
      tape.backward(r.total);
    }
    return tape.scalar_value(r.total);
  };
  auto rep = grad_check<double>(model.store, loss_fn);
  std::cout << "checked: " << rep.checked << "\n";
  std::cout << "max_rel_error: " << rep.max_rel_error << "\n";
  std::cout << "worst_param: " << rep.worst_param << "[" << rep.worst_offset
            << "] analytic " << rep.worst_analytic << " numeric "
            << rep.worst_numeric << "\n";
  const bool ok = rep.max_rel_error <= 1e-4;
  std::cout << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 2;
}

int cmd_analyze(const std::string& corpus_path) {
  Corpus corpus = load_corpus(corpus_path);
  validate_corpus(corpus);
  auto table = intent_slot_contingency(corpus);

  std::cout << "intent";
  for (const auto& slot : corpus.schema.slots) std::cout << "\t" << slot.key;
  std::cout << "\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    std::cout << corpus.schema.intents[i];
    for (double cell : table[i]) std::cout << "\t" << cell;
    std::cout << "\n";
  }
  try {
    std::cout << "cramers_v: " << measure_cramers_v(corpus) << "\n";
  } catch (const UndefinedValueError&) {
    std::cout << "cramers_v: undefined\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"task-conditioned dialogue state tracking"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train a model from a run config");
  train->add_option("--config", train_args.config, "run config JSON path")
      ->required();
  train->add_option("--variant", train_args.variant,
                    "baseline|bdst-i|bdst-c|bdst-j");
  train->add_option("--corpus", train_args.corpus, "training corpus override");
  train->add_option("--out", train_args.out, "checkpoint path override");
  auto* seed_opt =
      train->add_option("--seed", train_args.seed, "seed override");

  std::string eval_ckpt, eval_corpus, eval_out;
  bool eval_oracle = false;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a corpus");
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint path")->required();
  eval->add_option("--corpus", eval_corpus, "corpus path")->required();
  eval->add_flag("--oracle", eval_oracle, "score gold predictions");
  eval->add_option("--out", eval_out, "also write the report here");

  std::string repl_ckpt;
  auto* repl = app.add_subcommand("repl", "interactive turn-by-turn tracker");
  repl->add_option("--checkpoint", repl_ckpt, "checkpoint path")->required();

  std::string gen_schema, gen_out;
  std::size_t gen_n = 0;
  double gen_rho = 1.0;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("generate", "write a synthetic corpus");
  gen->add_option("--schema", gen_schema,
                  "schema JSON path (built-in toy schema when omitted)");
  gen->add_option("-n,--num", gen_n, "number of dialogues")->required();
  gen->add_option("--rho", gen_rho, "intent/slot coupling in [0,1]");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "corpus output path")->required();

  std::uint64_t gc_seed = 5;
  auto* gc = app.add_subcommand("gradcheck",
                                "finite-difference check of the full loss");
  gc->add_option("--seed", gc_seed, "fixture seed");

  std::string an_corpus;
  auto* an = app.add_subcommand("analyze", "intent/slot contingency report");
  an->add_option("--corpus", an_corpus, "corpus path")->required();

  CLI11_PARSE(app, argc, argv);
  train_args.has_seed = seed_opt->count() > 0;

  try {
    if (train->parsed()) return cmd_train(train_args);
    if (eval->parsed()) return cmd_eval(eval_ckpt, eval_corpus, eval_oracle, eval_out);
    if (repl->parsed()) return cmd_repl(repl_ckpt);
    if (gen->parsed()) return cmd_generate(gen_schema, gen_n, gen_rho, gen_seed, gen_out);
    if (gc->parsed()) return cmd_gradcheck(gc_seed);
    if (an->parsed()) return cmd_analyze(an_corpus);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
