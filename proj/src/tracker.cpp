#include "tcdst/tracker.hpp"

#include <algorithm>
#include <cctype>

#include "tcdst/error.hpp"

namespace tcdst {

std::string normalize_value(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool in_space = true;  // trims leading whitespace
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!in_space) out.push_back(' ');
      in_space = true;
    } else {
      out.push_back(static_cast<char>(
          std::tolower(static_cast<unsigned char>(c))));
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

TurnPrediction gold_prediction(const Turn& turn) {
  TurnPrediction p;
  p.intent = turn.intent;
  for (const auto& [key, ann] : turn.slots) {
    SlotOutcome o;
    o.gate = ann.gate;
    o.value = ann.value;
    p.slots[key] = o;
  }
  return p;
}

void update_state(DialogueState& state, const TurnPrediction& turn,
                  const Schema& schema) {
  for (const auto& [key, outcome] : turn.slots) {
    if (!schema.has_slot(key))
      throw SchemaError("update_state: unknown slot '" + key + "'");
    switch (outcome.gate) {
      case Gate::kNone:
        break;
      case Gate::kDontcare:
        state[key] = "dontcare";
        break;
      case Gate::kValue:
        state[key] = normalize_value(outcome.value);
        break;
    }
  }
}

namespace {

// Metrics accept whatever keys the predictions carry; schema validation of
// predicted keys happens in update_state upstream.
void apply_unchecked(DialogueState& state, const TurnPrediction& turn) {
  for (const auto& [key, o] : turn.slots) {
    if (o.gate == Gate::kDontcare) state[key] = "dontcare";
    else if (o.gate == Gate::kValue) state[key] = normalize_value(o.value);
  }
}

void check_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw AlignmentError(std::string(what) + ": " + std::to_string(a) +
                         " vs " + std::to_string(b));
}

}  // namespace

double joint_goal_accuracy(
    const std::vector<std::vector<TurnPrediction>>& predicted,
    const std::vector<std::vector<TurnPrediction>>& gold) {
  check_aligned(predicted.size(), gold.size(), "dialogue count");
  std::size_t turns = 0, hits = 0;
  for (std::size_t d = 0; d < predicted.size(); ++d) {
    check_aligned(predicted[d].size(), gold[d].size(), "turn count");
    DialogueState ps, gs;
    for (std::size_t t = 0; t < predicted[d].size(); ++t) {
      apply_unchecked(ps, predicted[d][t]);
      apply_unchecked(gs, gold[d][t]);
      ++turns;
      if (ps == gs) ++hits;
    }
  }
  if (turns == 0) return 0.0;
  return static_cast<double>(hits) / static_cast<double>(turns);
}

namespace {

using Pair = std::pair<std::string, std::string>;

std::vector<Pair> turn_pairs(const TurnPrediction& t,
                             const std::string& only_key) {
  std::vector<Pair> out;
  for (const auto& [key, o] : t.slots) {
    if (!only_key.empty() && key != only_key) continue;
    if (o.gate == Gate::kDontcare) out.emplace_back(key, "dontcare");
    else if (o.gate == Gate::kValue)
      out.emplace_back(key, normalize_value(o.value));
  }
  return out;
}

double pair_f1(const std::vector<TurnPrediction>& predicted,
               const std::vector<TurnPrediction>& gold,
               const std::string& only_key) {
  check_aligned(predicted.size(), gold.size(), "turn count");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t t = 0; t < predicted.size(); ++t) {
    auto p = turn_pairs(predicted[t], only_key);
    auto g = turn_pairs(gold[t], only_key);
    for (const auto& pr : p) {
      if (std::find(g.begin(), g.end(), pr) != g.end()) ++tp;
      else ++fp;
    }
    for (const auto& gd : g)
      if (std::find(p.begin(), p.end(), gd) == p.end()) ++fn;
  }
  if (tp + fp + fn == 0) return 1.0;
  return 2.0 * static_cast<double>(tp) /
         static_cast<double>(2 * tp + fp + fn);
}

}  // namespace

double slot_f1(const std::vector<TurnPrediction>& predicted,
               const std::vector<TurnPrediction>& gold) {
  return pair_f1(predicted, gold, "");
}

std::map<std::string, double> per_slot_f1(
    const std::vector<TurnPrediction>& predicted,
    const std::vector<TurnPrediction>& gold, const Schema& schema) {
  std::map<std::string, double> out;
  for (const auto& slot : schema.slots)
    out[slot.key] = pair_f1(predicted, gold, slot.key);
  return out;
}

double intent_accuracy(const std::vector<TurnPrediction>& predicted,
                       const std::vector<TurnPrediction>& gold) {
  check_aligned(predicted.size(), gold.size(), "turn count");
  if (predicted.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t t = 0; t < predicted.size(); ++t)
    if (predicted[t].intent.has_value() && gold[t].intent.has_value() &&
        *predicted[t].intent == *gold[t].intent)
      ++hits;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

}  // namespace tcdst
