#include "tcdst/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tcdst/error.hpp"

namespace tcdst {

using nlohmann::json;

const char* gate_name(Gate g) {
  switch (g) {
    case Gate::kNone: return "none";
    case Gate::kDontcare: return "dontcare";
    case Gate::kValue: return "value";
  }
  return "none";
}

Gate gate_from_name(const std::string& name) {
  if (name == "none") return Gate::kNone;
  if (name == "dontcare") return Gate::kDontcare;
  if (name == "value") return Gate::kValue;
  throw CorpusError("unknown gate label '" + name + "'");
}

std::size_t Corpus::turn_count() const {
  std::size_t n = 0;
  for (const auto& d : dialogues) n += d.turns.size();
  return n;
}

namespace {

[[noreturn]] void turn_error(const Dialogue& d, std::size_t ti,
                             const std::string& what) {
  throw CorpusError("dialogue '" + d.id + "' turn " + std::to_string(ti) +
                    ": " + what);
}

void validate_turn(const Schema& schema, const Dialogue& d, std::size_t ti) {
  const Turn& t = d.turns[ti];
  if (t.usr.empty()) turn_error(d, ti, "empty user utterance");
  if (std::find(schema.intents.begin(), schema.intents.end(), t.intent) ==
      schema.intents.end())
    turn_error(d, ti, "intent '" + t.intent + "' not in schema");
  for (const auto& [key, ann] : t.slots) {
    if (!schema.has_slot(key)) turn_error(d, ti, "slot '" + key + "' not in schema");
    const SlotDef& def = schema.slot(key);
    if (ann.gate == Gate::kValue) {
      if (ann.value.empty()) turn_error(d, ti, "slot '" + key + "': gate=value without a value");
      if (def.kind == SlotKind::kCategorical &&
          std::find(def.values.begin(), def.values.end(), ann.value) ==
              def.values.end())
        turn_error(d, ti, "slot '" + key + "': value '" + ann.value +
                              "' outside the ontology");
    } else if (!ann.value.empty() || ann.has_span) {
      turn_error(d, ti, "slot '" + key + "': value/span only allowed with gate=value");
    }
    if (ann.has_span) {
      if (ann.span_begin >= ann.span_end || ann.span_end > t.usr.size())
        turn_error(d, ti, "slot '" + key + "': span [" +
                              std::to_string(ann.span_begin) + ", " +
                              std::to_string(ann.span_end) +
                              ") out of bounds for utterance");
      const std::string sub =
          t.usr.substr(ann.span_begin, ann.span_end - ann.span_begin);
      if (sub != ann.value)
        turn_error(d, ti, "slot '" + key + "': span text '" + sub +
                              "' does not match value '" + ann.value + "'");
    }
  }
}

}  // namespace

void validate_corpus(const Corpus& corpus) {
  corpus.schema.validate();
  std::set<std::string> ids;
  for (const auto& d : corpus.dialogues) {
    if (d.id.empty()) throw CorpusError("dialogue with empty id");
    if (!ids.insert(d.id).second)
      throw CorpusError("duplicate dialogue id '" + d.id + "'");
    if (d.turns.empty()) throw CorpusError("dialogue '" + d.id + "' has no turns");
    for (std::size_t ti = 0; ti < d.turns.size(); ++ti)
      validate_turn(corpus.schema, d, ti);
  }
}

namespace {

json slots_to_json(const Turn& t) {
  json j = json::object();
  for (const auto& [key, ann] : t.slots) {
    json ja;
    ja["gate"] = gate_name(ann.gate);
    if (ann.gate == Gate::kValue) ja["value"] = ann.value;
    if (ann.has_span) ja["span"] = json::array({ann.span_begin, ann.span_end});
    j[key] = ja;
  }
  return j;
}

json corpus_to_json_obj(const Corpus& c) {
  json j;
  j["schema"] = json::parse(c.schema.to_json());
  j["dialogues"] = json::array();
  for (const auto& d : c.dialogues) {
    json jd;
    jd["id"] = d.id;
    jd["turns"] = json::array();
    for (const auto& t : d.turns) {
      json jt;
      jt["sys"] = t.sys;
      jt["usr"] = t.usr;
      jt["intent"] = t.intent;
      jt["slots"] = slots_to_json(t);
      jd["turns"].push_back(jt);
    }
    j["dialogues"].push_back(jd);
  }
  return j;
}

Corpus corpus_from_json_obj(const json& j) {
  Corpus c;
  c.schema = Schema::from_json(j.at("schema").dump());
  for (const auto& jd : j.at("dialogues")) {
    Dialogue d;
    d.id = jd.at("id").get<std::string>();
    for (const auto& jt : jd.at("turns")) {
      Turn t;
      t.sys = jt.value("sys", "");
      t.usr = jt.at("usr").get<std::string>();
      t.intent = jt.at("intent").get<std::string>();
      if (jt.contains("slots")) {
        for (const auto& [key, ja] : jt.at("slots").items()) {
          SlotAnnotation ann;
          ann.gate = gate_from_name(ja.at("gate").get<std::string>());
          if (ja.contains("value")) ann.value = ja.at("value").get<std::string>();
          if (ja.contains("span")) {
            const auto& sp = ja.at("span");
            if (!sp.is_array() || sp.size() != 2)
              throw CorpusError("dialogue '" + d.id + "': span must be [begin, end)");
            ann.has_span = true;
            ann.span_begin = sp[0].get<std::size_t>();
            ann.span_end = sp[1].get<std::size_t>();
          }
          t.slots[key] = ann;
        }
      }
      d.turns.push_back(std::move(t));
    }
    c.dialogues.push_back(std::move(d));
  }
  return c;
}

}  // namespace

std::string corpus_to_json(const Corpus& corpus) {
  return corpus_to_json_obj(corpus).dump(1);
}

Corpus corpus_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw CorpusError(std::string("corpus JSON parse: ") + e.what());
  }
  Corpus c;
  try {
    c = corpus_from_json_obj(j);
  } catch (const json::exception& e) {
    throw CorpusError(std::string("corpus JSON shape: ") + e.what());
  }
  validate_corpus(c);
  return c;
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return corpus_from_json(buf.str());
}

void save_corpus(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write corpus file '" + path + "'");
  out << corpus_to_json(corpus) << "\n";
}

}  // namespace tcdst
