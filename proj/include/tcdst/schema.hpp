#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tcdst {

enum class SlotKind { kSpan, kCategorical };

struct SlotDef {
  std::string key;
  SlotKind kind = SlotKind::kSpan;
  std::vector<std::string> values;  // ontology V_cs, categorical only
};

// Domain ontology: the ordered intent set (always containing "none") and the
// ordered slot list.
struct Schema {
  std::vector<std::string> intents;
  std::vector<SlotDef> slots;

  void validate() const;

  std::size_t intent_index(const std::string& name) const;
  std::size_t slot_index(const std::string& key) const;
  const SlotDef& slot(const std::string& key) const;
  bool has_slot(const std::string& key) const;

  std::size_t num_categorical() const;
  std::vector<std::string> categorical_keys() const;

  std::string to_json() const;
  static Schema from_json(const std::string& text);
};

Schema load_schema(const std::string& path);
void save_schema(const std::string& path, const Schema& schema);

// Categorical iff the value set is finite and small enough to enumerate.
SlotKind classify_slot_kind(std::size_t cardinality, bool finite,
                            std::size_t threshold = 12);

}  // namespace tcdst
