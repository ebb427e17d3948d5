#include "tcdst/input.hpp"

#include <algorithm>

#include "tcdst/error.hpp"

namespace tcdst {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kBaseline: return "baseline";
    case Variant::kBdstI: return "bdst-i";
    case Variant::kBdstC: return "bdst-c";
    case Variant::kBdstJ: return "bdst-j";
  }
  return "baseline";
}

Variant variant_from_name(const std::string& name) {
  if (name == "baseline") return Variant::kBaseline;
  if (name == "bdst-i") return Variant::kBdstI;
  if (name == "bdst-c") return Variant::kBdstC;
  if (name == "bdst-j") return Variant::kBdstJ;
  throw ConfigError("unknown variant '" + name +
                    "' (want baseline|bdst-i|bdst-c|bdst-j)");
}

bool conditions_on_intent(Variant v) {
  return v == Variant::kBdstI || v == Variant::kBdstJ;
}

bool conditions_on_categorical(Variant v) {
  return v == Variant::kBdstC || v == Variant::kBdstJ;
}

namespace {

struct UtterancePiece {
  bool is_user = false;
  std::string text;
  std::vector<TokenSpan> tokens;
};

}  // namespace

InputSequence build_input_sequence(Variant variant, const Schema& schema,
                                   const Vocabulary& vocab,
                                   const std::vector<HistoryUtterance>& history,
                                   const std::string& user_utterance,
                                   std::size_t max_len,
                                   std::size_t history_window) {
  if (user_utterance.empty())
    throw CorpusError("build_input_sequence: empty user utterance");

  // last `history_window` non-empty prior utterances, oldest first
  std::vector<UtterancePiece> pieces;
  for (auto it = history.rbegin();
       it != history.rend() && pieces.size() < history_window; ++it) {
    if (it->text.empty()) continue;
    UtterancePiece p;
    p.is_user = it->is_user;
    p.text = it->text;
    pieces.push_back(std::move(p));
  }
  std::reverse(pieces.begin(), pieces.end());
  {
    UtterancePiece cur;
    cur.is_user = true;
    cur.text = user_utterance;
    pieces.push_back(std::move(cur));
  }
  for (auto& p : pieces) p.tokens = tokenize(p.text);
  if (pieces.back().tokens.empty())
    throw CorpusError("build_input_sequence: user utterance has no tokens");

  const std::size_t num_conditioning =
      (conditions_on_intent(variant) ? 1 : 0) +
      (conditions_on_categorical(variant) ? schema.num_categorical() : 0);
  // [CLS] + conditioning + [SEP] + current speaker tag + one content token
  const std::size_t overhead = 1 + num_conditioning + 1 + 1;
  if (max_len < overhead + 1)
    throw CapacityError("max_len " + std::to_string(max_len) +
                        " cannot hold conditioning plus one content token");

  // drop oldest history utterances whole, then trim the current tail
  auto total_len = [&] {
    std::size_t n = 1 + num_conditioning + 1;  // [CLS], conditioning, [SEP]
    for (const auto& p : pieces) n += 1 + p.tokens.size();
    return n;
  };
  while (total_len() > max_len && pieces.size() > 1)
    pieces.erase(pieces.begin());
  if (total_len() > max_len) {
    const std::size_t keep = max_len - overhead;
    pieces.back().tokens.resize(keep);
  }

  InputSequence seq;
  auto push = [&](std::size_t id, std::size_t segment, std::size_t src,
                  std::size_t begin, std::size_t end, bool spannable) {
    seq.token_ids.push_back(id);
    seq.segment_ids.push_back(segment);
    seq.align_source.push_back(src);
    seq.align_begin.push_back(begin);
    seq.align_end.push_back(end);
    seq.span_mask.push_back(spannable ? 1 : 0);
  };
  auto push_special = [&](std::size_t id, std::size_t segment) {
    push(id, segment, InputSequence::kNoSource, 0, 0, false);
  };

  seq.cls_index = 0;
  push_special(Vocabulary::kCls, 0);
  if (conditions_on_intent(variant)) {
    seq.intent_index = seq.token_ids.size();
    push_special(Vocabulary::kIntent, 0);
  }
  if (conditions_on_categorical(variant))
    for (const auto& key : schema.categorical_keys()) {
      seq.categorical_indices[key] = seq.token_ids.size();
      push_special(vocab.slot_token_id(key), 0);
    }

  for (std::size_t ui = 0; ui < pieces.size(); ++ui) {
    const auto& p = pieces[ui];
    const bool current = ui + 1 == pieces.size();
    const std::size_t segment = p.is_user ? 1 : 0;
    push_special(p.is_user ? Vocabulary::kUsr : Vocabulary::kSys, segment);
    for (const auto& ts : p.tokens)
      push(vocab.id(ts.text), segment, ui, ts.begin, ts.end, current);
    seq.source_texts.push_back(p.text);
  }
  push_special(Vocabulary::kSep, seq.segment_ids.back());

  return seq;
}

std::string detokenize_span(const InputSequence& seq, std::size_t start,
                            std::size_t end) {
  if (start > end || end >= seq.length())
    throw InvalidSpanError("span [" + std::to_string(start) + ", " +
                           std::to_string(end) + "] out of order or range");
  if (!seq.span_mask[start] || !seq.span_mask[end])
    throw InvalidSpanError("span endpoints must be content tokens of the "
                           "current utterance");
  if (seq.align_source[start] != seq.align_source[end])
    throw InvalidSpanError("span crosses utterances");
  const std::string& src = seq.source_texts.at(seq.align_source[start]);
  const std::size_t b = seq.align_begin[start];
  const std::size_t e = seq.align_end[end];
  return src.substr(b, e - b);
}

}  // namespace tcdst
