#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pate/dataset.hpp"
#include "pate/errors.hpp"
#include "pate/numeric.hpp"

namespace pate {

struct LinearModel {
  std::vector<int> feature_subset;   // feature ids, coefficient order
  std::vector<double> coefficients;  // parallel to feature_subset
  double intercept = 0.0;
  bool ridge_fallback = false;        // set when rank deficiency forced ridge
  double condition_estimate = 0.0;    // |R| diagonal ratio from the QR
};

namespace detail {

inline void check_subset(std::span<const int> subset) {
  std::vector<bool> seen(kFeatureCount, false);
  for (int id : subset) {
    if (id < 0 || id >= kFeatureCount)
      throw MissingFeature("feature id " + std::to_string(id) + " out of range [0, " +
                           std::to_string(kFeatureCount) + ")");
    if (seen[static_cast<std::size_t>(id)])
      throw InvariantViolation("duplicate feature id " + std::to_string(id) + " in subset");
    seen[static_cast<std::size_t>(id)] = true;
  }
}

// Rows sorted lexicographically by (subset features, target): the fit sees
// one canonical order no matter how the records were permuted.
inline std::vector<std::size_t> canonical_row_order(const Dataset& ds,
                                                    std::span<const int> subset) {
  std::vector<std::size_t> order(ds.records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = ds.records[a];
    const auto& rb = ds.records[b];
    for (int id : subset) {
      const auto c = static_cast<std::size_t>(id);
      if (ra.features[c] != rb.features[c]) return ra.features[c] < rb.features[c];
    }
    return ra.price < rb.price;
  });
  return order;
}

}  // namespace detail

inline LinearModel fit_linear(const Dataset& train, std::span<const int> subset) {
  detail::check_subset(subset);
  const std::size_t n = train.records.size();
  const std::size_t p = subset.size();
  if (n <= p + 1)
    throw InsufficientSamples("fit_linear: need more than " + std::to_string(p + 1) +
                              " records for " + std::to_string(p) + " features (got " +
                              std::to_string(n) + ")");

  const auto order = detail::canonical_row_order(train, subset);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p) + 1);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = train.records[order[i]];
    const auto row = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < p; ++j)
      a(row, static_cast<Eigen::Index>(j)) = rec.features[static_cast<std::size_t>(subset[j])];
    a(row, static_cast<Eigen::Index>(p)) = 1.0;
    y(row) = rec.price;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  const auto rdiag = qr.matrixR().diagonal().cwiseAbs().head(static_cast<Eigen::Index>(p) + 1);
  const double rmax = rdiag.maxCoeff();
  const double rmin = rdiag.minCoeff();
  const double cond =
      rmin > 0.0 ? rmax / rmin : std::numeric_limits<double>::infinity();

  LinearModel model;
  model.feature_subset.assign(subset.begin(), subset.end());
  model.condition_estimate = cond;

  Eigen::VectorXd sol;
  if (qr.rank() == static_cast<Eigen::Index>(p) + 1) {
    sol = qr.solve(y);
  } else {
    // Rank-deficient: fall back to a lightly ridged normal system instead of
    // failing, and flag the model.
    model.ridge_fallback = true;
    Eigen::MatrixXd gram = a.transpose() * a;
    const double eps = 1e-8 * gram.diagonal().mean();
    gram.diagonal().array() += eps;
    sol = gram.ldlt().solve(a.transpose() * y);
  }
  if (!sol.allFinite())
    throw SingularDesign("fit_linear: solver produced non-finite coefficients "
                         "(condition estimate " + format_double(cond) + ")");

  model.coefficients.resize(p);
  for (std::size_t j = 0; j < p; ++j) model.coefficients[j] = sol(static_cast<Eigen::Index>(j));
  model.intercept = sol(static_cast<Eigen::Index>(p));
  return model;
}

inline double predict_linear(const LinearModel& model, std::span<const double> features) {
  double acc = model.intercept;
  for (std::size_t j = 0; j < model.feature_subset.size(); ++j) {
    const int id = model.feature_subset[j];
    if (id < 0 || static_cast<std::size_t>(id) >= features.size())
      throw MissingFeature("predict_linear: row lacks feature id " + std::to_string(id));
    acc += model.coefficients[j] * features[static_cast<std::size_t>(id)];
  }
  return acc;
}

inline double predict_linear(const LinearModel& model, const PropertyRecord& rec) {
  return predict_linear(model, std::span<const double>(rec.features));
}

inline std::vector<double> predict_linear(const LinearModel& model, const Dataset& ds) {
  std::vector<double> out;
  out.reserve(ds.records.size());
  for (const auto& rec : ds.records) out.push_back(predict_linear(model, rec));
  return out;
}

// JSON shape: {intercept, coefficients: [{feature, value}]}.
inline nlohmann::ordered_json linear_to_json(const LinearModel& model) {
  nlohmann::ordered_json j;
  j["intercept"] = model.intercept;
  auto& coeffs = j["coefficients"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < model.feature_subset.size(); ++i) {
    nlohmann::ordered_json c;
    c["feature"] = feature_name(model.feature_subset[i]);
    c["value"] = model.coefficients[i];
    coeffs.push_back(std::move(c));
  }
  return j;
}

inline LinearModel linear_from_json(const nlohmann::json& j) {
  LinearModel model;
  model.intercept = j.at("intercept").get<double>();
  for (const auto& c : j.at("coefficients")) {
    const std::string name = c.at("feature").get<std::string>();
    const int id = feature_index(name);
    if (id < 0) throw MissingFeature("unknown feature name \"" + name + "\" in model");
    model.feature_subset.push_back(id);
    model.coefficients.push_back(c.at("value").get<double>());
  }
  return model;
}

}  // namespace pate
