#pragma once

#include <cstddef>
#include <vector>

#include "tcdst/corpus.hpp"

namespace tcdst {

// Cramér's V over a contingency table: sqrt(chi^2 / (n * (min(r,c) - 1))).
// All-zero rows/columns are dropped before the test; a table that degenerates
// below 2x2 after dropping is undefined.
double cramers_v(const std::vector<std::vector<double>>& counts);

// Rows = schema intents, columns = slot keys; a cell counts user turns of
// that intent in which the slot's gold gate is dontcare or value.
std::vector<std::vector<double>> intent_slot_contingency(const Corpus& corpus);

// Cramér's V of the corpus's intent/slot-mention table.
double measure_cramers_v(const Corpus& corpus);

}  // namespace tcdst
