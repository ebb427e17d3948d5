#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tcdst/autodiff.hpp"
#include "tcdst/corpus.hpp"
#include "tcdst/encoder.hpp"
#include "tcdst/heads.hpp"
#include "tcdst/input.hpp"
#include "tcdst/schema.hpp"
#include "tcdst/tracker.hpp"
#include "tcdst/vocab.hpp"

namespace tcdst {

struct SlotTargets {
  std::size_t gate = kGateNone;
  bool has_span = false;  // span token indices resolved against the sequence
  std::size_t start_tok = 0;
  std::size_t end_tok = 0;
};

struct ExampleTargets {
  std::size_t intent = 0;
  std::map<std::string, SlotTargets> span_slots;
  std::map<std::string, std::size_t> cat_targets;  // class index per cat slot
};

struct TrainExample {
  InputSequence seq;
  ExampleTargets targets;
};

// Gold targets for one turn against its built input sequence. A gold span
// whose tokens were truncated away keeps its gate label but is excluded
// from the span loss.
inline ExampleTargets build_targets(const Schema& schema,
                                    const InputSequence& seq,
                                    const Turn& turn) {
  ExampleTargets t;
  t.intent = schema.intent_index(turn.intent);
  for (const auto& slot : schema.slots) {
    auto it = turn.slots.find(slot.key);
    if (slot.kind == SlotKind::kCategorical) {
      if (it == turn.slots.end()) t.cat_targets[slot.key] = slot.values.size();
      else t.cat_targets[slot.key] = cat_target_class(slot, it->second);
      continue;
    }
    SlotTargets st;
    if (it != turn.slots.end()) {
      st.gate = gate_class(it->second.gate);
      if (it->second.gate == Gate::kValue && it->second.has_span) {
        bool lo = false, hi = false;
        for (std::size_t i = 0; i < seq.length(); ++i) {
          if (!seq.span_mask[i]) continue;
          if (!lo && seq.align_begin[i] == it->second.span_begin) {
            st.start_tok = i;
            lo = true;
          }
          if (seq.align_end[i] == it->second.span_end) {
            st.end_tok = i;
            hi = true;
          }
        }
        st.has_span = lo && hi && st.start_tok <= st.end_tok;
      }
    }
    t.span_slots[slot.key] = st;
  }
  return t;
}

template <class T>
struct BatchLossResult {
  typename Tape<T>::Id total = 0;
  double slot = 0.0;    // component values, for logging
  double intent = 0.0;
  double cat = 0.0;
};

// One tape over the whole batch: per-component mean cross-entropies, the
// per-slot convex gate/span mix, then the variant's convex combination.
template <class T>
BatchLossResult<T> batch_loss(Tape<T>& tape, ParamStore<T>& store,
                              const EncoderConfig& cfg, Variant variant,
                              const Schema& schema, const LossWeights& w,
                              const std::vector<TrainExample>& batch,
                              Mode mode, Rng& rng) {
  using Id = typename Tape<T>::Id;
  if (batch.empty()) throw DimensionError("batch_loss: empty batch");
  w.validate();

  std::map<std::string, std::vector<Id>> gate_ce, start_ce, end_ce, cat_ce;
  std::vector<Id> intent_ce;
  for (const auto& ex : batch) {
    Id out = encoder_forward(tape, store, cfg, ex.seq, mode, rng);
    HeadIds<T> heads = heads_forward(tape, store, variant, schema, ex.seq, out);
    for (const auto& [key, st] : ex.targets.span_slots) {
      gate_ce[key].push_back(tape.nll(heads.gate_probs.at(key), st.gate));
      if (st.gate == kGateSpan && st.has_span) {
        start_ce[key].push_back(
            tape.nll(heads.start_probs.at(key), st.start_tok));
        end_ce[key].push_back(tape.nll(heads.end_probs.at(key), st.end_tok));
      }
    }
    if (heads.intent_probs)
      intent_ce.push_back(tape.nll(*heads.intent_probs, ex.targets.intent));
    for (const auto& [key, cls] : ex.targets.cat_targets)
      if (heads.cat_probs.count(key))
        cat_ce[key].push_back(tape.nll(heads.cat_probs.at(key), cls));
  }

  auto mean_of = [&](const std::vector<Id>& parts) {
    return tape.weighted_sum(
        parts, std::vector<T>(parts.size(), T(1) / T(parts.size())));
  };

  std::vector<Id> slot_losses;
  for (const auto& [key, ces] : gate_ce) {
    Id gate_mean = mean_of(ces);
    const auto& starts = start_ce[key];
    if (starts.empty()) {
      slot_losses.push_back(
          tape.weighted_sum({gate_mean}, {T(w.alpha)}));
    } else {
      const T half = T((1.0 - w.alpha) / 2.0);
      slot_losses.push_back(tape.weighted_sum(
          {gate_mean, mean_of(starts), mean_of(end_ce[key])},
          {T(w.alpha), half, half}));
    }
  }

  BatchLossResult<T> r;
  std::vector<Id> components;
  std::vector<T> coeffs;
  ComponentWeights cw = variant_component_weights(variant, w);

  Id l_slot = slot_losses.empty() ? tape.scalar_input(T(0))
                                  : mean_of(slot_losses);
  r.slot = static_cast<double>(tape.scalar_value(l_slot));
  components.push_back(l_slot);
  coeffs.push_back(T(cw.slot));

  if (!intent_ce.empty()) {
    Id l_intent = mean_of(intent_ce);
    r.intent = static_cast<double>(tape.scalar_value(l_intent));
    components.push_back(l_intent);
    coeffs.push_back(T(cw.intent));
  }
  if (!cat_ce.empty()) {
    std::vector<Id> per_slot;
    for (const auto& [key, ces] : cat_ce) per_slot.push_back(mean_of(ces));
    Id l_cat = mean_of(per_slot);
    r.cat = static_cast<double>(tape.scalar_value(l_cat));
    components.push_back(l_cat);
    coeffs.push_back(T(cw.cat));
  }
  r.total = tape.weighted_sum(components, coeffs);
  return r;
}

// Greedy decoded update for one turn, eval mode.
template <class T>
TurnPrediction predict_turn(ParamStore<T>& store, const EncoderConfig& cfg,
                            Variant variant, const Schema& schema,
                            const InputSequence& seq) {
  Tape<T> tape(false);
  Rng rng(0);
  auto out = encoder_forward(tape, store, cfg, seq, Mode::kEval, rng);
  HeadIds<T> heads = heads_forward(tape, store, variant, schema, seq, out);

  auto argmax = [&](typename Tape<T>::Id id) {
    auto v = tape.values_copy(id);
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] > v[best]) best = i;
    return best;
  };

  TurnPrediction pred;
  std::vector<unsigned char> mask(seq.span_mask.begin(), seq.span_mask.end());
  for (const auto& [key, gid] : heads.gate_probs) {
    SlotOutcome o;
    const std::size_t g = argmax(gid);
    if (g == kGateDontcare) {
      o.gate = Gate::kDontcare;
    } else if (g == kGateSpan) {
      auto [s, e] = decode_span(tape.values_copy(heads.start_logits.at(key)),
                                tape.values_copy(heads.end_logits.at(key)),
                                mask);
      o.gate = Gate::kValue;
      o.value = detokenize_span(seq, s, e);
    }
    pred.slots[key] = o;
  }
  if (heads.intent_probs)
    pred.intent = schema.intents.at(argmax(*heads.intent_probs));
  for (const auto& [key, cid] : heads.cat_probs) {
    const SlotDef& slot = schema.slot(key);
    const std::size_t c = argmax(cid);
    SlotOutcome o;
    if (c < slot.values.size()) {
      o.gate = Gate::kValue;
      o.value = slot.values[c];
    } else if (c == slot.values.size() + 1) {
      o.gate = Gate::kDontcare;
    }
    pred.slots[key] = o;
  }
  return pred;
}

// Registers encoder plus head parameters and applies the conditioning-token
// initialization, in checkpoint order.
template <class T>
void register_model_params(ParamStore<T>& store, const EncoderConfig& cfg,
                           const Schema& schema, const Vocabulary& vocab,
                           Variant variant) {
  register_encoder_params(store, cfg);
  register_head_params<T>(store, schema, variant, cfg.hidden_size, cfg.seed);
  init_conditioning_embeddings(store, vocab, variant, cfg.seed);
}

}  // namespace tcdst
