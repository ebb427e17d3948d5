#include "tcdst/schema.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tcdst/error.hpp"

namespace tcdst {

using nlohmann::json;

void Schema::validate() const {
  if (intents.empty()) throw SchemaError("schema has no intents");
  if (std::find(intents.begin(), intents.end(), "none") == intents.end())
    throw SchemaError("schema intents must include 'none'");
  std::set<std::string> seen_intents(intents.begin(), intents.end());
  if (seen_intents.size() != intents.size())
    throw SchemaError("duplicate intent names");
  std::set<std::string> keys;
  for (const auto& s : slots) {
    if (s.key.empty()) throw SchemaError("empty slot key");
    if (!keys.insert(s.key).second)
      throw SchemaError("duplicate slot key '" + s.key + "'");
    if (s.kind == SlotKind::kCategorical) {
      if (s.values.size() < 2)
        throw SchemaError("categorical slot '" + s.key + "' needs >= 2 values");
      std::set<std::string> vs(s.values.begin(), s.values.end());
      if (vs.size() != s.values.size())
        throw SchemaError("duplicate values in categorical slot '" + s.key + "'");
    } else if (!s.values.empty()) {
      throw SchemaError("span slot '" + s.key + "' must not list values");
    }
  }
}

std::size_t Schema::intent_index(const std::string& name) const {
  for (std::size_t i = 0; i < intents.size(); ++i)
    if (intents[i] == name) return i;
  throw SchemaError("unknown intent '" + name + "'");
}

std::size_t Schema::slot_index(const std::string& key) const {
  for (std::size_t i = 0; i < slots.size(); ++i)
    if (slots[i].key == key) return i;
  throw SchemaError("unknown slot key '" + key + "'");
}

const SlotDef& Schema::slot(const std::string& key) const {
  return slots[slot_index(key)];
}

bool Schema::has_slot(const std::string& key) const {
  for (const auto& s : slots)
    if (s.key == key) return true;
  return false;
}

std::size_t Schema::num_categorical() const {
  std::size_t n = 0;
  for (const auto& s : slots)
    if (s.kind == SlotKind::kCategorical) ++n;
  return n;
}

std::vector<std::string> Schema::categorical_keys() const {
  std::vector<std::string> keys;
  for (const auto& s : slots)
    if (s.kind == SlotKind::kCategorical) keys.push_back(s.key);
  return keys;
}

namespace {

json schema_to_json_obj(const Schema& s) {
  json j;
  j["intents"] = s.intents;
  j["slots"] = json::array();
  for (const auto& slot : s.slots) {
    json js;
    js["key"] = slot.key;
    js["kind"] = slot.kind == SlotKind::kCategorical ? "categorical" : "span";
    if (slot.kind == SlotKind::kCategorical) js["values"] = slot.values;
    j["slots"].push_back(js);
  }
  return j;
}

Schema schema_from_json_obj(const json& j) {
  Schema s;
  if (!j.is_object() || !j.contains("intents") || !j.contains("slots"))
    throw SchemaError("schema JSON needs 'intents' and 'slots'");
  s.intents = j.at("intents").get<std::vector<std::string>>();
  for (const auto& js : j.at("slots")) {
    SlotDef d;
    d.key = js.at("key").get<std::string>();
    const std::string kind = js.at("kind").get<std::string>();
    if (kind == "categorical") {
      d.kind = SlotKind::kCategorical;
      d.values = js.at("values").get<std::vector<std::string>>();
    } else if (kind == "span") {
      d.kind = SlotKind::kSpan;
    } else {
      throw SchemaError("slot '" + d.key + "': unknown kind '" + kind + "'");
    }
    s.slots.push_back(std::move(d));
  }
  s.validate();
  return s;
}

}  // namespace

std::string Schema::to_json() const { return schema_to_json_obj(*this).dump(2); }

Schema Schema::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("schema JSON parse: ") + e.what());
  }
  try {
    return schema_from_json_obj(j);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("schema JSON shape: ") + e.what());
  }
}

Schema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schema file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return Schema::from_json(buf.str());
}

void save_schema(const std::string& path, const Schema& schema) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write schema file '" + path + "'");
  out << schema.to_json() << "\n";
}

SlotKind classify_slot_kind(std::size_t cardinality, bool finite,
                            std::size_t threshold) {
  if (finite && cardinality <= threshold) return SlotKind::kCategorical;
  return SlotKind::kSpan;
}

}  // namespace tcdst
