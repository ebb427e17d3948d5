#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "tcdst/schema.hpp"

namespace tcdst {

// Gold gate label as stored in corpus files.
enum class Gate { kNone, kDontcare, kValue };

const char* gate_name(Gate g);
Gate gate_from_name(const std::string& name);

struct SlotAnnotation {
  Gate gate = Gate::kNone;
  std::string value;            // canonical value when gate == kValue
  bool has_span = false;        // character span into the user utterance
  std::size_t span_begin = 0;   // half-open, zero-based
  std::size_t span_end = 0;
};

struct Turn {
  std::string sys;  // may be empty on the first turn
  std::string usr;
  std::string intent;
  std::map<std::string, SlotAnnotation> slots;  // only annotated keys
};

struct Dialogue {
  std::string id;
  std::vector<Turn> turns;
};

struct Corpus {
  Schema schema;
  std::vector<Dialogue> dialogues;

  std::size_t turn_count() const;
};

// Throws CorpusError naming the dialogue id and turn index on any violation.
void validate_corpus(const Corpus& corpus);

Corpus load_corpus(const std::string& path);
void save_corpus(const std::string& path, const Corpus& corpus);

std::string corpus_to_json(const Corpus& corpus);
Corpus corpus_from_json(const std::string& text);

}  // namespace tcdst
