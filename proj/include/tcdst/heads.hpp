#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tcdst/autodiff.hpp"
#include "tcdst/corpus.hpp"
#include "tcdst/error.hpp"
#include "tcdst/input.hpp"
#include "tcdst/rng.hpp"
#include "tcdst/schema.hpp"

namespace tcdst {

// Slot-gate classes for non-categorical slots.
inline constexpr std::size_t kGateNone = 0;
inline constexpr std::size_t kGateDontcare = 1;
inline constexpr std::size_t kGateSpan = 2;
inline constexpr std::size_t kNumGateClasses = 3;
inline constexpr std::size_t kMaxSpanLen = 10;

inline std::size_t gate_class(Gate g) {
  switch (g) {
    case Gate::kNone: return kGateNone;
    case Gate::kDontcare: return kGateDontcare;
    case Gate::kValue: return kGateSpan;
  }
  return kGateNone;
}

// Categorical heads classify over the slot's value list plus two trailing
// classes: none, then dontcare.
inline std::size_t cat_class_count(const SlotDef& slot) {
  return slot.values.size() + 2;
}

inline std::size_t cat_target_class(const SlotDef& slot,
                                    const SlotAnnotation& ann) {
  if (ann.gate == Gate::kNone) return slot.values.size();
  if (ann.gate == Gate::kDontcare) return slot.values.size() + 1;
  for (std::size_t i = 0; i < slot.values.size(); ++i)
    if (slot.values[i] == ann.value) return i;
  throw CorpusError("value '" + ann.value + "' not in ontology of '" +
                    slot.key + "'");
}

struct LossWeights {
  double alpha = 0.5;        // gate vs span inside the slot loss
  double beta_intent = 0.3;  // intent vs slot mixing
  double beta_cat = 0.0;     // categorical vs slot mixing, schema-derived
  double alpha_joint = 0.5;  // joint mixing of the two composed losses

  void validate() const {
    for (double w : {alpha, beta_intent, beta_cat, alpha_joint})
      if (!(w >= 0.0 && w <= 1.0))
        throw ConfigError("loss weights must lie in [0, 1]");
  }
};

inline double fixed_beta_cat(const Schema& schema) {
  if (schema.slots.empty()) throw SchemaError("schema has no slots");
  return static_cast<double>(schema.num_categorical()) /
         static_cast<double>(schema.slots.size());
}

inline LossWeights make_loss_weights(const Schema& schema) {
  LossWeights w;
  w.beta_cat = fixed_beta_cat(schema);
  return w;
}

inline double combine_slot_loss(double l_gate, double l_start, double l_end,
                                double alpha) {
  return alpha * l_gate + (1.0 - alpha) / 2.0 * (l_start + l_end);
}

struct ComponentWeights {
  double slot = 1.0;
  double intent = 0.0;
  double cat = 0.0;
};

inline ComponentWeights variant_component_weights(Variant variant,
                                                  const LossWeights& w) {
  w.validate();
  ComponentWeights c;
  switch (variant) {
    case Variant::kBaseline:
      break;
    case Variant::kBdstI:
      c.slot = 1.0 - w.beta_intent;
      c.intent = w.beta_intent;
      break;
    case Variant::kBdstC:
      c.slot = 1.0 - w.beta_cat;
      c.cat = w.beta_cat;
      break;
    case Variant::kBdstJ:
      c.intent = w.alpha_joint * w.beta_intent;
      c.cat = (1.0 - w.alpha_joint) * w.beta_cat;
      c.slot = w.alpha_joint * (1.0 - w.beta_intent) +
               (1.0 - w.alpha_joint) * (1.0 - w.beta_cat);
      break;
  }
  return c;
}

inline double loss_variant(Variant variant, double l_slot,
                           std::optional<double> l_intent,
                           std::optional<double> l_cat,
                           const LossWeights& w) {
  if (conditions_on_intent(variant) && !l_intent.has_value())
    throw ConfigError("variant needs an intent loss component");
  if (conditions_on_categorical(variant) && !l_cat.has_value())
    throw ConfigError("variant needs a categorical loss component");
  ComponentWeights c = variant_component_weights(variant, w);
  return c.slot * l_slot + c.intent * l_intent.value_or(0.0) +
         c.cat * l_cat.value_or(0.0);
}

// Best (start, end) with start <= end <= start + max_span_len, both mask-true,
// maximizing start_logits[start] + end_logits[end]; ties prefer the smallest
// start, then the smallest end.
template <class T>
std::pair<std::size_t, std::size_t> decode_span(
    const std::vector<T>& start_logits, const std::vector<T>& end_logits,
    const std::vector<unsigned char>& mask,
    std::size_t max_span_len = kMaxSpanLen) {
  const std::size_t n = mask.size();
  if (start_logits.size() != n || end_logits.size() != n)
    throw DimensionError("decode_span: logit/mask length mismatch");
  bool found = false;
  std::size_t bi = 0, bj = 0;
  T best = T(0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    for (std::size_t j = i; j < n && j <= i + max_span_len; ++j) {
      if (!mask[j]) continue;
      const T score = start_logits[i] + end_logits[j];
      if (!found || score > best) {
        found = true;
        best = score;
        bi = i;
        bj = j;
      }
    }
  }
  if (!found) throw NoSpanError("decode_span: no span-eligible position");
  return {bi, bj};
}

// Head parameters, registered after the encoder's. Span heads are single
// rows scored against every position; the position softmax is shift
// invariant, so they carry no bias.
template <class T>
void register_head_params(ParamStore<T>& store, const Schema& schema,
                          Variant variant, std::size_t hidden,
                          std::uint64_t seed, T stddev = T(0.02)) {
  Rng rng(Rng::derive(seed, 0x68656164u));
  for (const auto& slot : schema.slots) {
    if (slot.kind != SlotKind::kSpan) continue;
    store.add_normal("gate." + slot.key, hidden, kNumGateClasses, stddev, rng);
    store.add_normal("gate." + slot.key + ".bias", 1, kNumGateClasses, T(0), rng);
    store.add_normal("span_start." + slot.key, 1, hidden, stddev, rng);
    store.add_normal("span_end." + slot.key, 1, hidden, stddev, rng);
  }
  if (conditions_on_intent(variant)) {
    store.add_normal("intent", hidden, schema.intents.size(), stddev, rng);
    store.add_normal("intent.bias", 1, schema.intents.size(), T(0), rng);
  }
  if (conditions_on_categorical(variant))
    for (const auto& slot : schema.slots) {
      if (slot.kind != SlotKind::kCategorical) continue;
      store.add_normal("cat." + slot.key, hidden, cat_class_count(slot), stddev,
                       rng);
      store.add_normal("cat." + slot.key + ".bias", 1, cat_class_count(slot),
                       T(0), rng);
    }
}

// Tape ids of every active head's outputs for one example.
template <class T>
struct HeadIds {
  using Id = typename Tape<T>::Id;
  std::map<std::string, Id> gate_probs;    // [1 x 3] per span slot
  std::map<std::string, Id> start_logits;  // [1 x n]
  std::map<std::string, Id> end_logits;    // [1 x n]
  std::map<std::string, Id> start_probs;   // masked position softmax
  std::map<std::string, Id> end_probs;
  std::optional<Id> intent_probs;        // [1 x M]
  std::map<std::string, Id> cat_probs;   // [1 x |V|+2] per categorical slot
};

template <class T>
HeadIds<T> heads_forward(Tape<T>& tape, ParamStore<T>& store, Variant variant,
                         const Schema& schema, const InputSequence& seq,
                         typename Tape<T>::Id encoder_out) {
  if (conditions_on_intent(variant) != seq.intent_index.has_value())
    throw ConfigError("variant/sequence mismatch on the intent token");
  const std::size_t want_cat =
      conditions_on_categorical(variant) ? schema.num_categorical() : 0;
  if (seq.categorical_indices.size() != want_cat)
    throw ConfigError("variant/sequence mismatch on categorical slot tokens");
  if (tape.rows(encoder_out) != seq.length())
    throw DimensionError("encoder output rows != sequence length");

  auto p = [&](const std::string& name) {
    return tape.param(store, store.index_of(name));
  };
  std::vector<unsigned char> mask(seq.span_mask.begin(), seq.span_mask.end());

  HeadIds<T> ids;
  auto cls = tape.slice_row(encoder_out, seq.cls_index);
  for (const auto& slot : schema.slots) {
    if (slot.kind != SlotKind::kSpan) continue;
    auto logits = tape.add_bias(tape.matmul(cls, p("gate." + slot.key)),
                                p("gate." + slot.key + ".bias"));
    ids.gate_probs[slot.key] = tape.softmax_rows(logits);
    auto sl = tape.matmul_nt(p("span_start." + slot.key), encoder_out);
    auto el = tape.matmul_nt(p("span_end." + slot.key), encoder_out);
    ids.start_logits[slot.key] = sl;
    ids.end_logits[slot.key] = el;
    ids.start_probs[slot.key] = tape.softmax_rows(sl, mask);
    ids.end_probs[slot.key] = tape.softmax_rows(el, mask);
  }
  if (conditions_on_intent(variant)) {
    auto row = tape.slice_row(encoder_out, *seq.intent_index);
    ids.intent_probs = tape.softmax_rows(
        tape.add_bias(tape.matmul(row, p("intent")), p("intent.bias")));
  }
  if (conditions_on_categorical(variant))
    for (const auto& slot : schema.slots) {
      if (slot.kind != SlotKind::kCategorical) continue;
      auto row =
          tape.slice_row(encoder_out, seq.categorical_indices.at(slot.key));
      ids.cat_probs[slot.key] = tape.softmax_rows(
          tape.add_bias(tape.matmul(row, p("cat." + slot.key)),
                        p("cat." + slot.key + ".bias")));
    }
  return ids;
}

}  // namespace tcdst
