#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pate/errors.hpp"
#include "pate/numeric.hpp"

namespace pate {

struct MetricsReport {
  double r2 = 0.0;
  double adjusted_r2 = 0.0;
  double mae = 0.0;
  double mse = 0.0;
  double rmse = 0.0;
  std::size_t n = 0;  // sample count
  std::size_t k = 0;  // independent variables, constant excluded
};

// All five measures in one pass. `k` is the number of predictors (the
// constant term excluded) and feeds only the adjusted R^2. Sums run in the
// canonical (y, yhat)-sorted order, so any permutation of the pairs yields
// bit-identical results.
inline MetricsReport evaluate(std::span<const double> y, std::span<const double> yhat,
                              std::size_t k) {
  if (y.size() != yhat.size())
    throw LengthMismatch("evaluate: y has " + std::to_string(y.size()) +
                         " values, yhat has " + std::to_string(yhat.size()));
  const std::size_t n = y.size();
  if (n == 0) throw EmptyDataset("evaluate: no observations");
  if (n < k + 2)
    throw InsufficientSamples("evaluate: adjusted R^2 needs n >= k + 2 (n = " +
                              std::to_string(n) + ", k = " + std::to_string(k) + ")");

  std::vector<std::pair<double, double>> pairs(n);
  for (std::size_t i = 0; i < n; ++i) pairs[i] = {y[i], yhat[i]};
  std::sort(pairs.begin(), pairs.end());

  const double ybar = sorted_mean(std::vector<double>(y.begin(), y.end()));

  std::vector<double> res2(n), tot2(n), abse(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = pairs[i].first - pairs[i].second;
    const double t = pairs[i].first - ybar;
    res2[i] = e * e;
    tot2[i] = t * t;
    abse[i] = std::abs(e);
  }
  const double ss_res = sorted_sum(std::move(res2));
  const double ss_tot = sorted_sum(std::move(tot2));
  if (ss_tot == 0.0)
    throw DegenerateTarget("evaluate: target is constant, R^2 undefined");

  MetricsReport rep;
  rep.n = n;
  rep.k = k;
  rep.r2 = 1.0 - ss_res / ss_tot;
  const double dn = static_cast<double>(n);
  const double dk = static_cast<double>(k);
  rep.adjusted_r2 = 1.0 - (1.0 - rep.r2) * (dn - 1.0) / (dn - dk - 1.0);
  rep.mae = sorted_sum(std::move(abse)) / dn;
  rep.mse = ss_res / dn;
  rep.rmse = std::sqrt(rep.mse);
  return rep;
}

}  // namespace pate
