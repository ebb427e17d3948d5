#include "tcdst/stats.hpp"

#include <cmath>

#include "tcdst/error.hpp"

namespace tcdst {

double cramers_v(const std::vector<std::vector<double>>& counts) {
  const std::size_t r0 = counts.size();
  if (r0 < 2) throw DimensionError("cramers_v: need >= 2 rows");
  const std::size_t c0 = counts[0].size();
  if (c0 < 2) throw DimensionError("cramers_v: need >= 2 columns");
  for (const auto& row : counts) {
    if (row.size() != c0) throw DimensionError("cramers_v: ragged table");
    for (double x : row)
      if (x < 0 || !std::isfinite(x))
        throw NumericError("cramers_v: counts must be finite and >= 0");
  }

  std::vector<double> row_tot(r0, 0), col_tot(c0, 0);
  double n = 0;
  for (std::size_t i = 0; i < r0; ++i)
    for (std::size_t j = 0; j < c0; ++j) {
      row_tot[i] += counts[i][j];
      col_tot[j] += counts[i][j];
      n += counts[i][j];
    }
  if (n <= 0) throw UndefinedValueError("cramers_v: empty table");

  // drop zero marginals, then require a real 2x2-or-bigger table
  std::vector<std::size_t> rows, cols;
  for (std::size_t i = 0; i < r0; ++i)
    if (row_tot[i] > 0) rows.push_back(i);
  for (std::size_t j = 0; j < c0; ++j)
    if (col_tot[j] > 0) cols.push_back(j);
  if (rows.size() < 2 || cols.size() < 2)
    throw UndefinedValueError("cramers_v: table degenerates below 2x2");

  double chi2 = 0;
  for (std::size_t i : rows)
    for (std::size_t j : cols) {
      const double expected = row_tot[i] * col_tot[j] / n;
      const double diff = counts[i][j] - expected;
      chi2 += diff * diff / expected;
    }
  const double k = static_cast<double>(std::min(rows.size(), cols.size())) - 1.0;
  return std::sqrt(chi2 / (n * k));
}

std::vector<std::vector<double>> intent_slot_contingency(const Corpus& corpus) {
  const Schema& s = corpus.schema;
  std::vector<std::vector<double>> table(
      s.intents.size(), std::vector<double>(s.slots.size(), 0.0));
  for (const auto& d : corpus.dialogues)
    for (const auto& t : d.turns) {
      const std::size_t row = s.intent_index(t.intent);
      for (const auto& [key, ann] : t.slots)
        if (ann.gate != Gate::kNone) table[row][s.slot_index(key)] += 1.0;
    }
  return table;
}

double measure_cramers_v(const Corpus& corpus) {
  return cramers_v(intent_slot_contingency(corpus));
}

}  // namespace tcdst
