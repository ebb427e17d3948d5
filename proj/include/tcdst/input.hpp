#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tcdst/schema.hpp"
#include "tcdst/vocab.hpp"

namespace tcdst {

enum class Variant { kBaseline, kBdstI, kBdstC, kBdstJ };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);
bool conditions_on_intent(Variant v);
bool conditions_on_categorical(Variant v);

struct HistoryUtterance {
  bool is_user = false;
  std::string text;
};

// One encoder input: [CLS] <[INTENT]?> <[SLOT-k]...> then speaker-prefixed
// utterances (selected history, then the current user utterance), then [SEP].
struct InputSequence {
  std::vector<std::size_t> token_ids;
  std::vector<std::size_t> segment_ids;  // 0 conditioning/system, 1 user
  std::size_t cls_index = 0;
  std::optional<std::size_t> intent_index;
  std::map<std::string, std::size_t> categorical_indices;  // slot key -> position
  // true only at content tokens of the current user utterance
  std::vector<unsigned char> span_mask;
  // per position: which source_texts entry it came from (npos for specials)
  std::vector<std::size_t> align_source;
  std::vector<std::size_t> align_begin;
  std::vector<std::size_t> align_end;
  // included utterances, oldest first; the last entry is the current one
  std::vector<std::string> source_texts;

  std::size_t length() const { return token_ids.size(); }
  static constexpr std::size_t kNoSource = static_cast<std::size_t>(-1);
};

// Selects the last `history_window` non-empty prior utterances, truncating
// oldest-first (then the current utterance's tail) to fit max_len.
InputSequence build_input_sequence(Variant variant, const Schema& schema,
                                   const Vocabulary& vocab,
                                   const std::vector<HistoryUtterance>& history,
                                   const std::string& user_utterance,
                                   std::size_t max_len,
                                   std::size_t history_window);

// Original-casing substring for a token span over the current utterance.
std::string detokenize_span(const InputSequence& seq, std::size_t start,
                            std::size_t end);

}  // namespace tcdst
