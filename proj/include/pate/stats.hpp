#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pate/dataset.hpp"
#include "pate/errors.hpp"
#include "pate/numeric.hpp"

namespace pate {

// Sample Pearson correlation, two-pass form. Throws LengthMismatch on
// unequal inputs, EmptyDataset on n < 2, DegenerateColumn when either side
// has zero variance. Accumulation uses the canonical sorted order so the
// result is invariant under permutations of the (x, y) pairs.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw LengthMismatch("pearson: x has " + std::to_string(x.size()) + " values, y has " +
                         std::to_string(y.size()));
  const std::size_t n = x.size();
  if (n < 2) throw EmptyDataset("pearson: need at least 2 observations");

  const double mx = sorted_mean(std::vector<double>(x.begin(), x.end()));
  const double my = sorted_mean(std::vector<double>(y.begin(), y.end()));

  // Canonical pair order: sort by (x, y) and accumulate products in that order.
  std::vector<std::pair<double, double>> pairs(n);
  for (std::size_t i = 0; i < n; ++i) pairs[i] = {x[i], y[i]};
  std::sort(pairs.begin(), pairs.end());

  std::vector<double> cross(n), xx(n), yy(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = pairs[i].first - mx;
    const double dy = pairs[i].second - my;
    cross[i] = dx * dy;
    xx[i] = dx * dx;
    yy[i] = dy * dy;
  }
  const double sxx = sorted_sum(std::move(xx));
  const double syy = sorted_sum(std::move(yy));
  if (sxx == 0.0)
    throw DegenerateColumn("pearson: x is constant, correlation undefined");
  if (syy == 0.0)
    throw DegenerateColumn("pearson: y is constant, correlation undefined");
  return sorted_sum(std::move(cross)) / std::sqrt(sxx * syy);
}

// Full 27x27 matrix over the 26 features plus Price. Degenerate pairs
// (constant column) are left empty rather than failing the whole matrix;
// the diagonal is exactly 1.
struct CorrelationMatrix {
  std::vector<std::string> labels;                        // 27 column names
  std::vector<std::vector<std::optional<double>>> cells;  // [27][27]

  std::size_t size() const { return labels.size(); }

  const std::optional<double>& at(std::size_t i, std::size_t j) const {
    return cells[i][j];
  }
};

inline CorrelationMatrix correlation_matrix(const Dataset& ds) {
  if (ds.records.size() < 2)
    throw EmptyDataset("correlation_matrix: need at least 2 records");

  CorrelationMatrix m;
  m.labels.reserve(kColumnCount);
  for (const auto& f : kFeatureSchema) m.labels.emplace_back(f.name);
  m.labels.emplace_back(kPriceName);

  std::vector<std::vector<double>> cols(kColumnCount);
  for (int c = 0; c < kFeatureCount; ++c) cols[static_cast<std::size_t>(c)] = feature_column(ds, c);
  cols[kFeatureCount] = price_column(ds);

  m.cells.assign(kColumnCount, std::vector<std::optional<double>>(kColumnCount));
  for (std::size_t i = 0; i < kColumnCount; ++i) {
    m.cells[i][i] = 1.0;
    for (std::size_t j = i + 1; j < kColumnCount; ++j) {
      try {
        const double r = pearson(cols[i], cols[j]);
        m.cells[i][j] = r;
        m.cells[j][i] = r;
      } catch (const DegenerateColumn&) {
        // leave both cells empty
      }
    }
  }
  return m;
}

}  // namespace pate
