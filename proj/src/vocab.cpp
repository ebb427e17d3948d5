#include "tcdst/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "tcdst/error.hpp"

namespace tcdst {

using nlohmann::json;

std::vector<TokenSpan> tokenize(const std::string& text) {
  std::vector<TokenSpan> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (std::isalnum(c)) {
      std::size_t j = i;
      std::string tok;
      while (j < n && std::isalnum(static_cast<unsigned char>(text[j]))) {
        tok += static_cast<char>(std::tolower(static_cast<unsigned char>(text[j])));
        ++j;
      }
      out.push_back({std::move(tok), i, j});
      i = j;
    } else {
      out.push_back({std::string(1, static_cast<char>(c)), i, i + 1});
      ++i;
    }
  }
  return out;
}

namespace {

std::vector<std::string> special_tokens(const Schema& schema) {
  std::vector<std::string> specials = {"[PAD]", "[UNK]", "[CLS]", "[SEP]",
                                       "[USR]", "[SYS]", "[INTENT]"};
  for (const auto& key : schema.categorical_keys())
    specials.push_back("[SLOT-" + key + "]");
  return specials;
}

}  // namespace

Vocabulary Vocabulary::build(const std::vector<Dialogue>& dialogues,
                             const Schema& schema, std::size_t min_frequency) {
  if (dialogues.empty()) throw CorpusError("build_vocab: empty corpus");
  std::map<std::string, std::size_t> freq;
  for (const auto& d : dialogues)
    for (const auto& t : d.turns) {
      for (const auto& ts : tokenize(t.sys)) ++freq[ts.text];
      for (const auto& ts : tokenize(t.usr)) ++freq[ts.text];
    }

  std::vector<std::pair<std::string, std::size_t>> content(freq.begin(), freq.end());
  std::erase_if(content, [&](const auto& p) { return p.second < min_frequency; });
  std::sort(content.begin(), content.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary v;
  for (const auto& s : special_tokens(schema)) v.tokens_.push_back(s);
  v.num_slot_tokens_ = schema.num_categorical();
  for (const auto& [tok, count] : content) v.tokens_.push_back(tok);
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) v.index_[v.tokens_[i]] = i;
  return v;
}

std::size_t Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(std::size_t id) const {
  if (id >= tokens_.size())
    throw VocabError("token id " + std::to_string(id) + " out of range");
  return tokens_[id];
}

std::size_t Vocabulary::slot_token_id(const std::string& key) const {
  auto it = index_.find("[SLOT-" + key + "]");
  if (it == index_.end())
    throw VocabError("no conditioning token for slot '" + key + "'");
  return it->second;
}

std::string Vocabulary::to_json() const {
  json j;
  j["version"] = 1;
  json specials = json::object();
  for (std::size_t i = 0; i < 7 + num_slot_tokens_; ++i) specials[tokens_[i]] = i;
  j["specials"] = specials;
  j["tokens"] = tokens_;
  return j.dump(1);
}

Vocabulary Vocabulary::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw VocabError(std::string("vocabulary JSON parse: ") + e.what());
  }
  try {
    if (j.at("version").get<int>() != 1)
      throw VocabError("unsupported vocabulary version");
    Vocabulary v;
    v.tokens_ = j.at("tokens").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < v.tokens_.size(); ++i) v.index_[v.tokens_[i]] = i;
    const auto& specials = j.at("specials");
    for (const auto& [name, idj] : specials.items()) {
      const std::size_t idx = idj.get<std::size_t>();
      if (idx >= v.tokens_.size() || v.tokens_[idx] != name)
        throw VocabError("special token '" + name + "' id mismatch");
      if (name.rfind("[SLOT-", 0) == 0) ++v.num_slot_tokens_;
    }
    if (specials.size() != 7 + v.num_slot_tokens_)
      throw VocabError("vocabulary specials incomplete");
    return v;
  } catch (const json::exception& e) {
    throw VocabError(std::string("vocabulary JSON shape: ") + e.what());
  }
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write vocabulary file '" + path + "'");
  out << to_json() << "\n";
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace tcdst
