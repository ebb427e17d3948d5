#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "tcdst/corpus.hpp"
#include "tcdst/schema.hpp"

namespace tcdst {

struct TokenSpan {
  std::string text;        // lowercased
  std::size_t begin = 0;   // char offsets into the source string, half-open
  std::size_t end = 0;
};

// Lowercasing word-level tokenizer: alphanumeric runs plus single
// punctuation characters, with source offsets preserved.
std::vector<TokenSpan> tokenize(const std::string& text);

class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::size_t kCls = 2;
  static constexpr std::size_t kSep = 3;
  static constexpr std::size_t kUsr = 4;
  static constexpr std::size_t kSys = 5;
  static constexpr std::size_t kIntent = 6;

  // Specials, then one [SLOT-<key>] per categorical slot in schema order,
  // then content tokens by (frequency desc, lexicographic).
  static Vocabulary build(const std::vector<Dialogue>& dialogues,
                          const Schema& schema, std::size_t min_frequency = 1);

  std::size_t size() const { return tokens_.size(); }
  bool has(const std::string& token) const { return index_.count(token) != 0; }
  // [UNK] for anything unknown
  std::size_t id(const std::string& token) const;
  const std::string& token(std::size_t id) const;
  std::size_t slot_token_id(const std::string& key) const;
  std::size_t num_slot_tokens() const { return num_slot_tokens_; }

  std::string to_json() const;
  static Vocabulary from_json(const std::string& text);
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t num_slot_tokens_ = 0;
};

}  // namespace tcdst
