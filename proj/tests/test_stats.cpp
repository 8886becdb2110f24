#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "pate/stats.hpp"

#include "test_support.hpp"

namespace {

// Independent direct evaluation: two-pass covariance over the raw order.
double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("pearson hand cases") {
  const std::vector<double> x = {1, 2, 3, 4};
  REQUIRE(pate::pearson(x, std::vector<double>{1, 3, 2, 4}) == 0.8);

  // Perfect positive and negative linear association.
  REQUIRE_THAT(pate::pearson(x, std::vector<double>{3, 5, 7, 9}),
               Catch::Matchers::WithinAbs(1.0, 1e-15));
  REQUIRE_THAT(pate::pearson(x, std::vector<double>{9, 7, 5, 3}),
               Catch::Matchers::WithinAbs(-1.0, 1e-15));
}

TEST_CASE("pearson matches a direct oracle on random vectors") {
  std::mt19937_64 eng(101);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 5 + eng() % 60;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = u(eng);
      y[i] = u(eng) + 0.3 * x[i];
    }
    REQUIRE_THAT(pate::pearson(x, y),
                 Catch::Matchers::WithinAbs(pearson_oracle(x, y), 1e-12));
  }
}

TEST_CASE("pearson bounds, symmetry, permutation invariance") {
  std::mt19937_64 eng(102);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<double> x(80), y(80);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = u(eng);
    y[i] = u(eng);
  }
  const double r = pate::pearson(x, y);
  REQUIRE(r >= -1.0);
  REQUIRE(r <= 1.0);
  REQUIRE(pate::pearson(y, x) == r);  // bitwise symmetric

  // Identical shuffle of both vectors leaves r bit-identical.
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), eng);
  std::vector<double> xs(x.size()), ys(y.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    xs[i] = x[idx[i]];
    ys[i] = y[idx[i]];
  }
  REQUIRE(pate::pearson(xs, ys) == r);
}

TEST_CASE("pearson error handling") {
  const std::vector<double> x = {1, 2, 3};
  REQUIRE_THROWS_AS(pate::pearson(x, std::vector<double>{1, 2}), pate::LengthMismatch);
  REQUIRE_THROWS_AS(pate::pearson(std::vector<double>{1}, std::vector<double>{1}),
                    pate::EmptyDataset);
  REQUIRE_THROWS_AS(pate::pearson(std::vector<double>{2, 2, 2}, x),
                    pate::DegenerateColumn);
  REQUIRE_THROWS_AS(pate::pearson(x, std::vector<double>{5, 5, 5}),
                    pate::DegenerateColumn);
}

TEST_CASE("correlation matrix invariants") {
  const auto ds = testsup::make_uniform_dataset(300, 103);
  const auto m = pate::correlation_matrix(ds);
  REQUIRE(m.size() == 27);
  REQUIRE(m.labels.front() == "Year");
  REQUIRE(m.labels.back() == "Price");

  for (std::size_t i = 0; i < m.size(); ++i) {
    REQUIRE(m.at(i, i).has_value());
    REQUIRE(*m.at(i, i) == 1.0);
    for (std::size_t j = 0; j < m.size(); ++j) {
      REQUIRE(m.at(i, j).has_value());
      REQUIRE(*m.at(i, j) == *m.at(j, i));  // bitwise symmetric
      REQUIRE(*m.at(i, j) >= -1.0);
      REQUIRE(*m.at(i, j) <= 1.0);
    }
  }

  // Spot-check one off-diagonal cell against the pearson op itself.
  const auto col0 = pate::feature_column(ds, 0);
  const auto price = pate::price_column(ds);
  REQUIRE(*m.at(0, 26) == pate::pearson(col0, price));
}

TEST_CASE("correlation matrix marks degenerate columns NA") {
  auto ds = testsup::make_uniform_dataset(50, 104);
  for (auto& r : ds.records) r.features[1] = 1.0;  // constant Elvt
  const auto m = pate::correlation_matrix(ds);
  for (std::size_t j = 0; j < m.size(); ++j) {
    if (j == 1) continue;
    REQUIRE(!m.at(1, j).has_value());
    REQUIRE(!m.at(j, 1).has_value());
  }
  REQUIRE(*m.at(1, 1) == 1.0);  // diagonal pinned even for constants
}

TEST_CASE("correlation matrix needs two records") {
  pate::Dataset tiny = testsup::make_uniform_dataset(1, 105);
  REQUIRE_THROWS_AS(pate::correlation_matrix(tiny), pate::EmptyDataset);
}

TEST_CASE("strong linear relation shows up in the matrix") {
  auto ds = testsup::make_uniform_dataset(400, 106);
  for (auto& r : ds.records) r.price = 5.0 * r.features[12] * 600.0 + 30000.0 + 1.0;
  const auto m = pate::correlation_matrix(ds);
  REQUIRE(*m.at(12, 26) > 0.999);
}
