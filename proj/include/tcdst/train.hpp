#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tcdst/checkpoint.hpp"
#include "tcdst/corpus.hpp"
#include "tcdst/model.hpp"

namespace tcdst {

struct RunConfig {
  Variant variant = Variant::kBaseline;
  EncoderConfig encoder;     // vocab_size and seed are filled at build time
  double alpha = 0.5;
  double beta_intent = 0.3;
  double alpha_joint = 0.5;  // beta_cat always derives from the schema
  std::size_t batch_size = 32;
  std::size_t epochs = 100;
  double learning_rate = 0.0;  // 0 = auto: 1e-4 fresh, 2e-6 on resume
  std::uint64_t seed = 0;
  std::size_t history_window = 1;
  std::string train_corpus;
  std::string val_corpus;  // empty = validate on the training split
  std::string checkpoint;  // output (train) or input (eval/repl)
  std::string resume;      // optional checkpoint to fine-tune from
  std::string log_path;    // optional JSONL loss log
  std::string precision = "f32";

  void validate() const;
};

RunConfig run_config_from_json(const std::string& text);
RunConfig load_run_config(const std::string& path);

struct EvalReport {
  std::size_t turn_count = 0;
  double joint_goal = 0.0;
  double slot_f1 = 0.0;
  std::optional<double> intent_accuracy;  // absent without an intent head
  std::map<std::string, double> per_slot;

  bool has_metrics() const { return turn_count > 0; }
};

// {"joint_goal":…, "slot_f1":…, "intent_accuracy":…, "per_slot":{…},
//  "turn_count":…}; metrics are null on an empty corpus and
// intent_accuracy is omitted when the variant has no intent head.
std::string report_to_json(const EvalReport& report, bool with_intent);

// Per-turn inputs for one dialogue, teacher-forced gold history.
std::vector<InputSequence> dialogue_inputs(const Dialogue& dialogue,
                                           Variant variant,
                                           const Schema& schema,
                                           const Vocabulary& vocab,
                                           std::size_t max_len,
                                           std::size_t history_window);

std::vector<TrainExample> build_training_examples(const Corpus& corpus,
                                                  Variant variant,
                                                  const Vocabulary& vocab,
                                                  std::size_t max_len,
                                                  std::size_t history_window);

template <class T>
EvalReport evaluate_model(Model<T>& model, const Corpus& corpus, bool oracle);

struct TrainResult {
  double best_val_joint_goal = 0.0;
  std::size_t best_epoch = 0;
  std::vector<std::string> log_lines;  // one JSON object per epoch
};

// Full training run: seeded epoch shuffles, Adam updates, per-epoch loss
// components and validation joint-goal, best checkpoint kept on disk.
// `diag` receives human-readable warnings (never parsed).
template <class T>
TrainResult train_model(const RunConfig& config, std::ostream& diag);

}  // namespace tcdst
