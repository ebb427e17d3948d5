#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tcdst/corpus.hpp"
#include "tcdst/schema.hpp"

namespace tcdst {

// Knobs for the synthetic dialogue generator. Intents own disjoint
// contiguous slot subsets (schema order); rho is the per-turn probability of
// mentioning only in-subset slots versus one uniformly random slot, which is
// what drives the measured intent/slot Cramer's V of the output.
struct GeneratorConfig {
  double rho = 1.0;
  double paraphrase_prob = 0.5;   // categorical mentions only
  double dontcare_prob = 0.1;
  double switch_prob = 0.25;      // mid-dialogue new-intent opener
  double closing_prob = 0.3;      // final "that is all" turn
  std::size_t max_followups = 2;  // per episode, keeps openers in the window
  std::size_t min_turns = 2;
  std::size_t max_turns = 5;
  // surface pool for span-slot values, inserted verbatim
  std::vector<std::string> span_values = {"north", "south", "east", "west", "centre"};
  // paraphrase pool per canonical categorical value; values without an entry
  // are always verbatim
  std::map<std::string, std::vector<std::string>> paraphrases = {
      {"cheap", {"inexpensive", "budget friendly", "low cost"}},
      {"moderate", {"mid range", "middle of the road", "fairly priced"}},
      {"expensive", {"high end", "upscale", "pricey"}},
  };
};

std::vector<Dialogue> generate_synthetic(const Schema& schema,
                                         std::size_t num_dialogues, double rho,
                                         std::uint64_t seed);

std::vector<Dialogue> generate_synthetic(const Schema& schema,
                                         std::size_t num_dialogues,
                                         const GeneratorConfig& config,
                                         std::uint64_t seed);

// The slot subset designated to each intent (index into schema.intents).
std::vector<std::vector<std::size_t>> intent_slot_subsets(const Schema& schema);

// The built-in two-domain toy schema used by the examples and experiments.
Schema toy_schema();

}  // namespace tcdst
