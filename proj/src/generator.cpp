#include "tcdst/generator.hpp"

#include <algorithm>

#include "tcdst/error.hpp"
#include "tcdst/rng.hpp"

namespace tcdst {

namespace {

// "hotel_area" -> "area"; bare keys stay as-is.
std::string slot_noun(const std::string& key) {
  const auto pos = key.rfind('_');
  return pos == std::string::npos ? key : key.substr(pos + 1);
}

// "find_hotel" -> "hotel"; underscores become spaces.
std::string intent_noun(const std::string& intent) {
  const auto pos = intent.find('_');
  std::string n = pos == std::string::npos ? intent : intent.substr(pos + 1);
  std::replace(n.begin(), n.end(), '_', ' ');
  return n;
}

struct Utterance {
  std::string text;
  // appends a chunk and returns its start offset
  std::size_t append(const std::string& chunk) {
    const std::size_t at = text.size();
    text += chunk;
    return at;
  }
};

const char* kOpeners[] = {"i need a ", "i am looking for a ", "can you find me a "};
const char* kSysLines[] = {"ok noted", "sure anything else", "understood"};

// Appends one slot-mention clause; fills in the annotation (span offsets when
// the surface form is the value itself).
void append_mention(Utterance& u, const SlotDef& def, const GeneratorConfig& cfg,
                    Rng& rng, SlotAnnotation& ann) {
  const std::string noun = slot_noun(def.key);
  if (rng.coin(cfg.dontcare_prob)) {
    ann.gate = Gate::kDontcare;
    if (rng.bounded(2) == 0)
      u.append("any " + noun + " is fine");
    else
      u.append(noun + " does not matter");
    return;
  }
  ann.gate = Gate::kValue;
  std::string surface;
  if (def.kind == SlotKind::kCategorical) {
    ann.value = def.values[rng.bounded(def.values.size())];
    surface = ann.value;
    const auto pool = cfg.paraphrases.find(ann.value);
    if (pool != cfg.paraphrases.end() && !pool->second.empty() &&
        rng.coin(cfg.paraphrase_prob))
      surface = pool->second[rng.bounded(pool->second.size())];
  } else {
    ann.value = cfg.span_values[rng.bounded(cfg.span_values.size())];
    surface = ann.value;
  }
  std::size_t at = 0;
  switch (rng.bounded(3)) {
    case 0:
      u.append("with " + noun + " ");
      at = u.append(surface);
      break;
    case 1:
      u.append(noun + " should be ");
      at = u.append(surface);
      break;
    default:
      u.append("i want " + noun + " ");
      at = u.append(surface);
      break;
  }
  if (surface == ann.value) {
    ann.has_span = true;
    ann.span_begin = at;
    ann.span_end = at + surface.size();
  }
}

// Picks the slot indices a turn mentions, honoring the rho rule.
std::vector<std::size_t> pick_slots(const std::vector<std::size_t>& subset,
                                    std::size_t num_slots, double rho, Rng& rng) {
  std::vector<std::size_t> picked;
  if (rng.coin(rho) && !subset.empty()) {
    picked.push_back(subset[rng.bounded(subset.size())]);
    if (subset.size() >= 2 && rng.coin(0.5)) {
      std::size_t other = subset[rng.bounded(subset.size())];
      while (other == picked[0]) other = subset[rng.bounded(subset.size())];
      picked.push_back(other);
    }
  } else {
    picked.push_back(rng.bounded(num_slots));
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace

std::vector<std::vector<std::size_t>> intent_slot_subsets(const Schema& schema) {
  std::vector<std::size_t> task_intents;
  for (std::size_t i = 0; i < schema.intents.size(); ++i)
    if (schema.intents[i] != "none") task_intents.push_back(i);
  std::vector<std::vector<std::size_t>> subsets(schema.intents.size());
  if (task_intents.empty() || schema.slots.empty()) return subsets;
  // contiguous nearly-equal blocks in schema order
  const std::size_t k = task_intents.size(), n = schema.slots.size();
  std::size_t start = 0;
  for (std::size_t t = 0; t < k; ++t) {
    const std::size_t count = n / k + (t < n % k ? 1 : 0);
    for (std::size_t j = 0; j < count; ++j)
      subsets[task_intents[t]].push_back(start + j);
    start += count;
  }
  return subsets;
}

std::vector<Dialogue> generate_synthetic(const Schema& schema,
                                         std::size_t num_dialogues, double rho,
                                         std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.rho = rho;
  return generate_synthetic(schema, num_dialogues, cfg, seed);
}

std::vector<Dialogue> generate_synthetic(const Schema& schema,
                                         std::size_t num_dialogues,
                                         const GeneratorConfig& cfg,
                                         std::uint64_t seed) {
  schema.validate();
  if (schema.intents.size() < 2)
    throw SchemaError("generator needs at least one task intent besides 'none'");
  if (schema.slots.empty()) throw SchemaError("generator needs at least one slot");
  if (cfg.rho < 0 || cfg.rho > 1) throw ConfigError("rho must lie in [0, 1]");
  for (const auto& s : schema.slots)
    if (s.kind == SlotKind::kSpan && cfg.span_values.empty())
      throw ConfigError("span slots need a non-empty span_values pool");

  const auto subsets = intent_slot_subsets(schema);
  std::vector<std::size_t> task_intents;
  for (std::size_t i = 0; i < schema.intents.size(); ++i)
    if (schema.intents[i] != "none") task_intents.push_back(i);

  std::vector<Dialogue> out;
  out.reserve(num_dialogues);
  for (std::size_t di = 0; di < num_dialogues; ++di) {
    Rng rng(Rng::derive(seed, di));
    Dialogue d;
    d.id = "dlg-" + std::to_string(di);
    const std::size_t num_turns =
        cfg.min_turns + rng.bounded(cfg.max_turns - cfg.min_turns + 1);

    std::size_t intent = task_intents[rng.bounded(task_intents.size())];
    std::size_t followups = 0;
    for (std::size_t ti = 0; ti < num_turns; ++ti) {
      Turn turn;
      turn.sys = ti == 0 ? "" : kSysLines[rng.bounded(3)];

      const bool closing =
          ti + 1 == num_turns && ti > 0 && rng.coin(cfg.closing_prob);
      if (closing) {
        turn.usr = "thank you that is all";
        turn.intent = "none";
        d.turns.push_back(std::move(turn));
        break;
      }

      bool opener = ti == 0;
      if (!opener && (followups >= cfg.max_followups || rng.coin(cfg.switch_prob))) {
        opener = true;
        intent = task_intents[rng.bounded(task_intents.size())];
      }
      if (opener)
        followups = 0;
      else
        ++followups;
      turn.intent = schema.intents[intent];

      Utterance u;
      bool no_mentions = false;
      if (opener) {
        u.append(kOpeners[rng.bounded(3)]);
        u.append(intent_noun(schema.intents[intent]));
        no_mentions = rng.coin(0.3);
      }
      if (!no_mentions) {
        const auto picked =
            pick_slots(subsets[intent], schema.slots.size(), cfg.rho, rng);
        for (std::size_t pi = 0; pi < picked.size(); ++pi) {
          if (opener || pi > 0) u.append(" and ");
          SlotAnnotation ann;
          append_mention(u, schema.slots[picked[pi]], cfg, rng, ann);
          turn.slots[schema.slots[picked[pi]].key] = ann;
        }
        if (!opener && rng.coin(0.3)) u.append(" please");
      }
      turn.usr = u.text;
      d.turns.push_back(std::move(turn));
    }
    out.push_back(std::move(d));
  }
  return out;
}

Schema toy_schema() {
  Schema s;
  s.intents = {"none", "find_hotel", "book_restaurant"};
  s.slots = {
      {"hotel_area", SlotKind::kSpan, {}},
      {"hotel_price", SlotKind::kCategorical, {"cheap", "moderate", "expensive"}},
      {"restaurant_area", SlotKind::kSpan, {}},
      {"restaurant_price", SlotKind::kCategorical, {"cheap", "moderate", "expensive"}},
  };
  return s;
}

}  // namespace tcdst
