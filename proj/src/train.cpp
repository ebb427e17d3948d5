#include "tcdst/train.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "tcdst/error.hpp"
#include "tcdst/rng.hpp"
#include "tcdst/tracker.hpp"

namespace tcdst {

using json = nlohmann::ordered_json;

void RunConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (learning_rate < 0.0) throw ConfigError("learning_rate must be >= 0");
  if (precision != "f32" && precision != "f64")
    throw ConfigError("precision must be f32 or f64");
  if (history_window == 0)
    throw ConfigError("history_window must be >= 1");
  LossWeights w;
  w.alpha = alpha;
  w.beta_intent = beta_intent;
  w.alpha_joint = alpha_joint;
  w.validate();
}

RunConfig run_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");

  RunConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "variant") c.variant = variant_from_name(value.get<std::string>());
      else if (key == "alpha") c.alpha = value.get<double>();
      else if (key == "beta_intent") c.beta_intent = value.get<double>();
      else if (key == "alpha_joint") c.alpha_joint = value.get<double>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "epochs") c.epochs = value.get<std::size_t>();
      else if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "history_window") c.history_window = value.get<std::size_t>();
      else if (key == "train_corpus") c.train_corpus = value.get<std::string>();
      else if (key == "val_corpus") c.val_corpus = value.get<std::string>();
      else if (key == "checkpoint") c.checkpoint = value.get<std::string>();
      else if (key == "resume") c.resume = value.get<std::string>();
      else if (key == "log_path") c.log_path = value.get<std::string>();
      else if (key == "precision") c.precision = value.get<std::string>();
      else if (key == "encoder") {
        for (const auto& [ek, ev] : value.items()) {
          if (ek == "num_layers") c.encoder.num_layers = ev.get<std::size_t>();
          else if (ek == "hidden_size") c.encoder.hidden_size = ev.get<std::size_t>();
          else if (ek == "num_heads") c.encoder.num_heads = ev.get<std::size_t>();
          else if (ek == "ffn_size") c.encoder.ffn_size = ev.get<std::size_t>();
          else if (ek == "max_len") c.encoder.max_len = ev.get<std::size_t>();
          else if (ek == "dropout_rate") c.encoder.dropout_rate = ev.get<double>();
          else throw ConfigError("unknown encoder key '" + ek + "'");
        }
      } else {
        throw ConfigError("unknown run config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return run_config_from_json(ss.str());
}

std::string report_to_json(const EvalReport& r, bool with_intent) {
  json j;
  if (r.has_metrics()) {
    j["joint_goal"] = r.joint_goal;
    j["slot_f1"] = r.slot_f1;
    if (with_intent && r.intent_accuracy) j["intent_accuracy"] = *r.intent_accuracy;
    json per = json::object();
    for (const auto& [k, v] : r.per_slot) per[k] = v;
    j["per_slot"] = std::move(per);
  } else {
    j["joint_goal"] = nullptr;
    j["slot_f1"] = nullptr;
    if (with_intent) j["intent_accuracy"] = nullptr;
    j["per_slot"] = nullptr;
  }
  j["turn_count"] = r.turn_count;
  return j.dump();
}

std::vector<InputSequence> dialogue_inputs(const Dialogue& dialogue,
                                           Variant variant,
                                           const Schema& schema,
                                           const Vocabulary& vocab,
                                           std::size_t max_len,
                                           std::size_t history_window) {
  std::vector<InputSequence> out;
  std::vector<HistoryUtterance> hist;
  for (const auto& turn : dialogue.turns) {
    if (!turn.sys.empty()) hist.push_back({false, turn.sys});
    out.push_back(build_input_sequence(variant, schema, vocab, hist, turn.usr,
                                       max_len, history_window));
    hist.push_back({true, turn.usr});
  }
  return out;
}

std::vector<TrainExample> build_training_examples(const Corpus& corpus,
                                                  Variant variant,
                                                  const Vocabulary& vocab,
                                                  std::size_t max_len,
                                                  std::size_t history_window) {
  std::vector<TrainExample> out;
  for (const auto& d : corpus.dialogues) {
    auto seqs = dialogue_inputs(d, variant, corpus.schema, vocab, max_len,
                                history_window);
    for (std::size_t t = 0; t < d.turns.size(); ++t)
      out.push_back(
          {seqs[t], build_targets(corpus.schema, seqs[t], d.turns[t])});
  }
  return out;
}

template <class T>
EvalReport evaluate_model(Model<T>& model, const Corpus& corpus, bool oracle) {
  EvalReport report;
  report.turn_count = corpus.turn_count();
  if (report.turn_count == 0) return report;

  std::vector<std::vector<TurnPrediction>> pred, gold;
  for (const auto& d : corpus.dialogues) {
    auto seqs = dialogue_inputs(d, model.variant, corpus.schema, model.vocab,
                                model.cfg.max_len, model.history_window);
    std::vector<TurnPrediction> p, g;
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      g.push_back(gold_prediction(d.turns[t]));
      p.push_back(oracle ? g.back()
                         : predict_turn(model.store, model.cfg, model.variant,
                                        corpus.schema, seqs[t]));
    }
    pred.push_back(std::move(p));
    gold.push_back(std::move(g));
  }

  report.joint_goal = joint_goal_accuracy(pred, gold);
  std::vector<TurnPrediction> pflat, gflat;
  for (std::size_t d = 0; d < pred.size(); ++d)
    for (std::size_t t = 0; t < pred[d].size(); ++t) {
      pflat.push_back(pred[d][t]);
      gflat.push_back(gold[d][t]);
    }
  report.slot_f1 = slot_f1(pflat, gflat);
  report.per_slot = per_slot_f1(pflat, gflat, corpus.schema);
  if (oracle || conditions_on_intent(model.variant))
    report.intent_accuracy = intent_accuracy(pflat, gflat);
  return report;
}

namespace {

template <class T>
double run_epoch(Model<T>& model, std::vector<TrainExample>& examples,
                 std::size_t batch_size, Rng& shuffle_rng, Rng& dropout_rng,
                 double* slot, double* intent, double* cat) {
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  shuffle_rng.shuffle(order);

  double total = 0, s = 0, in = 0, c = 0;
  std::size_t batches = 0;
  for (std::size_t at = 0; at < order.size(); at += batch_size) {
    std::vector<TrainExample> batch;
    for (std::size_t i = at; i < std::min(at + batch_size, order.size()); ++i)
      batch.push_back(examples[order[i]]);
    Tape<T> tape(true);
    auto r = batch_loss(tape, model.store, model.cfg, model.variant,
                        model.schema, model.weights, batch, Mode::kTrain,
                        dropout_rng);
    model.store.zero_grads();
    tape.backward(r.total);
    adam_step(model.store, model.adam);
    total += static_cast<double>(tape.scalar_value(r.total));
    s += r.slot;
    in += r.intent;
    c += r.cat;
    ++batches;
  }
  *slot = s / batches;
  *intent = in / batches;
  *cat = c / batches;
  return total / batches;
}

}  // namespace

template <class T>
TrainResult train_model(const RunConfig& config, std::ostream& diag) {
  config.validate();
  if (config.train_corpus.empty()) throw ConfigError("train_corpus not set");
  if (config.checkpoint.empty()) throw ConfigError("checkpoint not set");

  Corpus train = load_corpus(config.train_corpus);
  validate_corpus(train);
  if (train.dialogues.empty())
    throw CorpusError("training corpus has no dialogues");
  Corpus val = train;
  if (!config.val_corpus.empty()) {
    val = load_corpus(config.val_corpus);
    validate_corpus(val);
    if (val.schema.to_json() != train.schema.to_json())
      throw ConfigError("validation corpus schema differs from training");
  }

  Variant variant = config.variant;
  if (variant == Variant::kBdstJ && train.schema.num_categorical() == 0) {
    diag << "warning: no categorical slots; running bdst-j as bdst-i\n";
    variant = Variant::kBdstI;
  }

  Model<T> model;
  if (!config.resume.empty()) {
    model = load_model<T>(config.resume);
    if (model.schema.to_json() != train.schema.to_json())
      throw ConfigError("resumed checkpoint schema differs from corpus");
    if (model.variant != variant)
      throw ConfigError("resumed checkpoint variant differs from config");
    model.adam.learning_rate =
        T(config.learning_rate > 0 ? config.learning_rate : 2e-6);
  } else {
    Vocabulary vocab = Vocabulary::build(train.dialogues, train.schema);
    model = make_model<T>(train.schema, vocab, variant, config.encoder,
                          config.history_window, config.seed);
    model.adam.learning_rate =
        T(config.learning_rate > 0 ? config.learning_rate : 1e-4);
  }
  model.weights.alpha = config.alpha;
  model.weights.beta_intent = config.beta_intent;
  model.weights.alpha_joint = config.alpha_joint;
  model.weights.validate();

  auto examples = build_training_examples(train, variant, model.vocab,
                                          model.cfg.max_len,
                                          model.history_window);
  if (examples.empty()) throw CorpusError("no training examples built");

  Rng shuffle_rng(Rng::derive(config.seed, 1));
  Rng dropout_rng(Rng::derive(config.seed, 2));

  TrainResult result;
  result.best_val_joint_goal = -1.0;
  std::ofstream log_file;
  if (!config.log_path.empty()) {
    log_file.open(config.log_path, std::ios::binary | std::ios::trunc);
    if (!log_file) throw IoError("cannot write log '" + config.log_path + "'");
  }

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    double slot = 0, intent = 0, cat = 0;
    double loss = run_epoch(model, examples, config.batch_size, shuffle_rng,
                            dropout_rng, &slot, &intent, &cat);
    EvalReport val_report = evaluate_model(model, val, false);

    json line;
    line["epoch"] = epoch;
    line["loss"] = loss;
    line["gate_span"] = slot;
    line["intent"] = intent;
    line["cat"] = cat;
    line["val_joint_goal"] = val_report.joint_goal;
    result.log_lines.push_back(line.dump());
    if (log_file) log_file << result.log_lines.back() << "\n";

    if (val_report.joint_goal > result.best_val_joint_goal) {
      result.best_val_joint_goal = val_report.joint_goal;
      result.best_epoch = epoch;
      save_model(config.checkpoint, model);
    }
  }
  return result;
}

template EvalReport evaluate_model<float>(Model<float>&, const Corpus&, bool);
template EvalReport evaluate_model<double>(Model<double>&, const Corpus&, bool);
template TrainResult train_model<float>(const RunConfig&, std::ostream&);
template TrainResult train_model<double>(const RunConfig&, std::ostream&);

}  // namespace tcdst
