#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tcdst/corpus.hpp"
#include "tcdst/schema.hpp"

namespace tcdst {

// lowercase + trim + collapse internal whitespace
std::string normalize_value(const std::string& s);

struct SlotOutcome {
  Gate gate = Gate::kNone;
  std::string value;  // meaningful when gate == kValue
};

struct TurnPrediction {
  std::optional<std::string> intent;
  std::map<std::string, SlotOutcome> slots;
};

// slot_key -> normalized value ("dontcare" is a literal value)
using DialogueState = std::map<std::string, std::string>;

// Gold annotations of a turn expressed as the same update type.
TurnPrediction gold_prediction(const Turn& turn);

// none leaves the key untouched; dontcare and value overwrite.
void update_state(DialogueState& state, const TurnPrediction& turn,
                  const Schema& schema);

// Mean over every turn of every dialogue of [accumulated predicted state
// equals accumulated gold state].
double joint_goal_accuracy(
    const std::vector<std::vector<TurnPrediction>>& predicted,
    const std::vector<std::vector<TurnPrediction>>& gold);

// Micro-averaged F1 over per-turn (key, normalized value) pairs; dontcare
// participates as the literal pair value. Both sides empty scores 1.
double slot_f1(const std::vector<TurnPrediction>& predicted,
               const std::vector<TurnPrediction>& gold);

// Same pair F1 restricted to one slot key at a time.
std::map<std::string, double> per_slot_f1(
    const std::vector<TurnPrediction>& predicted,
    const std::vector<TurnPrediction>& gold, const Schema& schema);

// Fraction of turns whose predicted intent matches gold exactly; a missing
// prediction never matches.
double intent_accuracy(const std::vector<TurnPrediction>& predicted,
                       const std::vector<TurnPrediction>& gold);

}  // namespace tcdst
