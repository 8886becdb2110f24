#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pate/dataset.hpp"
#include "pate/errors.hpp"
#include "pate/numeric.hpp"

namespace pate {

struct BoostParams {
  int n_trees = 100;
  int max_depth = 6;
  double learning_rate = 0.3;
  double lambda = 1.0;
  double gamma = 0.0;
  double min_child_weight = 1.0;
  std::uint64_t seed = 0;
};

inline void validate_params(const BoostParams& p) {
  if (p.n_trees < 1) throw InvariantViolation("n_trees must be >= 1");
  if (p.max_depth < 1) throw InvariantViolation("max_depth must be >= 1");
  if (!(p.learning_rate > 0.0 && p.learning_rate <= 1.0))
    throw InvariantViolation("learning_rate must be in (0, 1]");
  if (!(p.lambda >= 0.0)) throw InvariantViolation("lambda must be >= 0");
  if (!(p.gamma >= 0.0)) throw InvariantViolation("gamma must be >= 0");
  if (!(p.min_child_weight >= 0.0))
    throw InvariantViolation("min_child_weight must be >= 0");
}

// Optimal leaf value of the second-order objective: -G / (H + lambda).
inline double leaf_weight(double g_sum, double h_sum, double lambda) {
  const double denom = h_sum + lambda;
  if (!(denom > 0.0))
    throw DegenerateLeaf("leaf_weight: H + lambda must be > 0 (got " +
                         format_double(denom) + ")");
  return -g_sum / denom;
}

// Objective reduction of a candidate split; negative means reject.
inline double split_gain(double gl, double hl, double gr, double hr, double lambda,
                         double gamma) {
  if (!(hl + lambda > 0.0) || !(hr + lambda > 0.0))
    throw DegenerateLeaf("split_gain: each child needs H + lambda > 0");
  return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) -
                (gl + gr) * (gl + gr) / (hl + hr + lambda)) -
         gamma;
}

// feature < 0 marks a leaf. Routing: value < threshold goes left, else right.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double weight = 0.0;  // leaf value, stored unshrunk

  bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double value(std::span<const double> features) const {
    std::int32_t cur = 0;
    while (!nodes[static_cast<std::size_t>(cur)].is_leaf()) {
      const TreeNode& nd = nodes[static_cast<std::size_t>(cur)];
      if (static_cast<std::size_t>(nd.feature) >= features.size())
        throw MissingFeature("tree references feature id " + std::to_string(nd.feature) +
                             " beyond row width " + std::to_string(features.size()));
      cur = features[static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left
                                                                          : nd.right;
    }
    return nodes[static_cast<std::size_t>(cur)].weight;
  }

  std::size_t leaf_count() const {
    std::size_t c = 0;
    for (const auto& nd : nodes) c += nd.is_leaf() ? 1u : 0u;
    return c;
  }

  // Sum of squared (unshrunk) leaf weights, node-id order.
  double weight_sq_sum() const {
    double s = 0.0;
    for (const auto& nd : nodes)
      if (nd.is_leaf()) s += nd.weight * nd.weight;
    return s;
  }
};

struct BoostedEnsemble {
  double base_score = 0.0;
  std::vector<RegressionTree> trees;
  BoostParams params;
  std::array<std::int64_t, kFeatureCount> fscore{};
};

inline double predict_boosted(const BoostedEnsemble& model, std::span<const double> features) {
  double acc = model.base_score;
  for (const auto& tree : model.trees) acc += model.params.learning_rate * tree.value(features);
  return acc;
}

inline double predict_boosted(const BoostedEnsemble& model, const PropertyRecord& rec) {
  return predict_boosted(model, std::span<const double>(rec.features));
}

inline std::vector<double> predict_boosted(const BoostedEnsemble& model, const Dataset& ds) {
  std::vector<double> out;
  out.reserve(ds.records.size());
  for (const auto& rec : ds.records) out.push_back(predict_boosted(model, rec));
  return out;
}

namespace detail {

struct SortedEntry {
  double value = 0.0;
  double grad = 0.0;
  std::int32_t row = 0;
};

struct Segment {
  std::int32_t node = 0;
  std::size_t beg = 0;
  std::size_t end = 0;
};

struct BestSplit {
  double gain = 0.0;  // accept only strictly positive gain
  int feature = -1;
  std::size_t col = 0;
  double threshold = 0.0;
};

}  // namespace detail

// Exact greedy trainer. Each tree sorts every feature column by
// (value, gradient) once, then partitions the sorted runs level by level; all
// node aggregates go through sorted_sum. Together these make the fit
// bit-identical under any permutation of the training records, and the
// ascending (feature, threshold) scan with a strict gain comparison yields
// the lowest-feature / lowest-threshold tie-break.
inline BoostedEnsemble fit_boosted(const Dataset& train, std::span<const int> subset,
                                   const BoostParams& params) {
  validate_params(params);
  if (train.records.empty()) throw EmptyDataset("fit_boosted: no training records");
  std::vector<int> cols(subset.begin(), subset.end());
  std::sort(cols.begin(), cols.end());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] < 0 || cols[j] >= kFeatureCount)
      throw MissingFeature("feature id " + std::to_string(cols[j]) + " out of range");
    if (j > 0 && cols[j] == cols[j - 1])
      throw InvariantViolation("duplicate feature id " + std::to_string(cols[j]) +
                               " in subset");
  }

  const std::size_t n = train.records.size();
  const std::size_t p = cols.size();
  std::vector<std::vector<double>> x(p, std::vector<double>(n));
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j)
      x[j][i] = train.records[i].features[static_cast<std::size_t>(cols[j])];
    y[i] = train.records[i].price;
  }

  BoostedEnsemble model;
  model.params = params;
  model.base_score = sorted_mean(y);

  std::vector<double> pred(n, model.base_score);
  std::vector<double> grad(n);
  std::vector<detail::SortedEntry> arr;   // scratch for one feature's entries
  std::vector<std::vector<detail::SortedEntry>> feat(p);
  std::vector<std::int32_t> rows(n);
  std::vector<std::int8_t> goes_left(n);

  for (int t = 0; t < params.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) grad[i] = pred[i] - y[i];

    for (std::size_t j = 0; j < p; ++j) {
      feat[j].resize(n);
      for (std::size_t i = 0; i < n; ++i)
        feat[j][i] = {x[j][i], grad[i], static_cast<std::int32_t>(i)};
      std::sort(feat[j].begin(), feat[j].end(), [](const auto& a, const auto& b) {
        if (a.value != b.value) return a.value < b.value;
        return a.grad < b.grad;
      });
    }
    rows.resize(n);  // level partitioning leaves it shrunk after each tree
    for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<std::int32_t>(i);

    RegressionTree tree;
    tree.nodes.push_back({});
    std::vector<detail::Segment> active = {{0, 0, n}};
    std::vector<double> g_buf;

    for (int depth = 0; !active.empty(); ++depth) {
      std::vector<detail::BestSplit> chosen(active.size());
      for (std::size_t s = 0; s < active.size(); ++s) {
        const auto& seg = active[s];
        const std::size_t m = seg.end - seg.beg;
        g_buf.resize(m);
        for (std::size_t i = 0; i < m; ++i)
          g_buf[i] = grad[static_cast<std::size_t>(rows[seg.beg + i])];
        const double g_tot = sorted_sum(g_buf);
        const double h_tot = static_cast<double>(m);

        detail::BestSplit best;
        if (depth < params.max_depth && m >= 2) {
          for (std::size_t j = 0; j < p; ++j) {
            double gl = 0.0, hl = 0.0;
            for (std::size_t i = seg.beg; i + 1 < seg.end; ++i) {
              gl += feat[j][i].grad;
              hl += 1.0;
              const double v = feat[j][i].value;
              const double vn = feat[j][i + 1].value;
              if (vn == v) continue;
              double thr = 0.5 * (v + vn);
              if (!(thr > v)) thr = vn;  // adjacent doubles: midpoint collapses
              const double hr = h_tot - hl;
              if (hl < params.min_child_weight || hr < params.min_child_weight) continue;
              const double gain =
                  split_gain(gl, hl, g_tot - gl, hr, params.lambda, params.gamma);
              if (gain > best.gain) best = {gain, cols[j], j, thr};
            }
          }
        }

        chosen[s] = best;
        TreeNode& nd = tree.nodes[static_cast<std::size_t>(seg.node)];
        if (best.feature >= 0) {
          nd.feature = best.feature;
          nd.threshold = best.threshold;
          nd.left = static_cast<std::int32_t>(tree.nodes.size());
          nd.right = nd.left + 1;
          tree.nodes.push_back({});
          tree.nodes.push_back({});
          model.fscore[static_cast<std::size_t>(best.feature)] += 1;
        } else {
          nd.weight = leaf_weight(g_tot, h_tot, params.lambda);
          for (std::size_t i = seg.beg; i < seg.end; ++i)
            pred[static_cast<std::size_t>(rows[i])] += params.learning_rate * nd.weight;
        }
      }

      // Partition the row list and every sorted feature run into the child
      // segments; subsequences of sorted runs stay sorted.
      std::vector<detail::Segment> next;
      std::vector<std::int32_t> new_rows;
      for (std::size_t s = 0; s < active.size(); ++s) {
        if (chosen[s].feature < 0) continue;
        const auto& seg = active[s];
        const TreeNode& nd = tree.nodes[static_cast<std::size_t>(seg.node)];
        std::size_t n_left = 0;
        for (std::size_t i = seg.beg; i < seg.end; ++i) {
          const auto r = static_cast<std::size_t>(rows[i]);
          goes_left[r] =
              x[chosen[s].col][r] < chosen[s].threshold ? std::int8_t{1} : std::int8_t{0};
          n_left += static_cast<std::size_t>(goes_left[r]);
        }
        const std::size_t base = new_rows.size();
        for (int pass = 1; pass >= 0; --pass)
          for (std::size_t i = seg.beg; i < seg.end; ++i)
            if (goes_left[static_cast<std::size_t>(rows[i])] == pass)
              new_rows.push_back(rows[i]);
        next.push_back({nd.left, base, base + n_left});
        next.push_back({nd.right, base + n_left, new_rows.size()});
      }
      for (std::size_t j = 0; j < p; ++j) {
        arr.clear();
        for (std::size_t s = 0; s < active.size(); ++s) {
          if (chosen[s].feature < 0) continue;
          const auto& seg = active[s];
          for (int pass = 1; pass >= 0; --pass)
            for (std::size_t i = seg.beg; i < seg.end; ++i)
              if (goes_left[static_cast<std::size_t>(feat[j][i].row)] == pass)
                arr.push_back(feat[j][i]);
        }
        feat[j].swap(arr);
      }
      rows.swap(new_rows);
      active.swap(next);
    }

    model.trees.push_back(std::move(tree));
  }
  return model;
}

// Features with at least one split, by descending count then ascending id.
inline std::vector<std::pair<int, std::int64_t>> feature_importance(
    const BoostedEnsemble& model) {
  std::vector<std::pair<int, std::int64_t>> ranked;
  for (int f = 0; f < kFeatureCount; ++f)
    if (model.fscore[static_cast<std::size_t>(f)] > 0)
      ranked.emplace_back(f, model.fscore[static_cast<std::size_t>(f)]);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return ranked;
}

// Regularized objective after the first `use_trees` rounds: squared-error
// loss plus gamma * leaves + lambda/2 * ||leaf weights||^2 per tree.
inline double training_objective(const BoostedEnsemble& model, const Dataset& train,
                                 std::size_t use_trees) {
  if (use_trees > model.trees.size())
    throw InvariantViolation("training_objective: prefix exceeds tree count");
  const std::size_t n = train.records.size();
  if (n == 0) throw EmptyDataset("training_objective: no records");
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = train.records[i];
    double acc = model.base_score;
    for (std::size_t t = 0; t < use_trees; ++t)
      acc += model.params.learning_rate *
             model.trees[t].value(std::span<const double>(rec.features));
    const double e = rec.price - acc;
    terms[i] = 0.5 * e * e;
  }
  double obj = sorted_sum(std::move(terms));
  for (std::size_t t = 0; t < use_trees; ++t)
    obj += model.params.gamma * static_cast<double>(model.trees[t].leaf_count()) +
           0.5 * model.params.lambda * model.trees[t].weight_sq_sum();
  return obj;
}

// JSON: {base_score, params, trees:[{feature, threshold, left, right} | {weight}]}.
namespace detail {

inline nlohmann::ordered_json node_to_json(const RegressionTree& tree, std::int32_t idx) {
  const TreeNode& nd = tree.nodes[static_cast<std::size_t>(idx)];
  nlohmann::ordered_json j;
  if (nd.is_leaf()) {
    j["weight"] = nd.weight;
  } else {
    j["feature"] = feature_name(nd.feature);
    j["threshold"] = nd.threshold;
    j["left"] = node_to_json(tree, nd.left);
    j["right"] = node_to_json(tree, nd.right);
  }
  return j;
}

inline std::int32_t node_from_json(const nlohmann::json& j, RegressionTree& tree) {
  const auto idx = static_cast<std::int32_t>(tree.nodes.size());
  tree.nodes.push_back({});
  if (j.contains("weight")) {
    tree.nodes[static_cast<std::size_t>(idx)].weight = j.at("weight").get<double>();
    return idx;
  }
  const std::string name = j.at("feature").get<std::string>();
  const int f = feature_index(name);
  if (f < 0) throw MissingFeature("unknown feature name \"" + name + "\" in model");
  tree.nodes[static_cast<std::size_t>(idx)].feature = f;
  tree.nodes[static_cast<std::size_t>(idx)].threshold = j.at("threshold").get<double>();
  const auto left = node_from_json(j.at("left"), tree);
  tree.nodes[static_cast<std::size_t>(idx)].left = left;
  const auto right = node_from_json(j.at("right"), tree);
  tree.nodes[static_cast<std::size_t>(idx)].right = right;
  return idx;
}

}  // namespace detail

inline nlohmann::ordered_json boosted_to_json(const BoostedEnsemble& model) {
  nlohmann::ordered_json j;
  j["base_score"] = model.base_score;
  nlohmann::ordered_json pj;
  pj["n_trees"] = model.params.n_trees;
  pj["max_depth"] = model.params.max_depth;
  pj["learning_rate"] = model.params.learning_rate;
  pj["lambda"] = model.params.lambda;
  pj["gamma"] = model.params.gamma;
  pj["min_child_weight"] = model.params.min_child_weight;
  pj["seed"] = model.params.seed;
  j["params"] = std::move(pj);
  auto& trees = j["trees"] = nlohmann::ordered_json::array();
  for (const auto& tree : model.trees) trees.push_back(detail::node_to_json(tree, 0));
  return j;
}

inline BoostedEnsemble boosted_from_json(const nlohmann::json& j) {
  BoostedEnsemble model;
  model.base_score = j.at("base_score").get<double>();
  const auto& pj = j.at("params");
  model.params.n_trees = pj.at("n_trees").get<int>();
  model.params.max_depth = pj.at("max_depth").get<int>();
  model.params.learning_rate = pj.at("learning_rate").get<double>();
  model.params.lambda = pj.at("lambda").get<double>();
  model.params.gamma = pj.at("gamma").get<double>();
  model.params.min_child_weight = pj.at("min_child_weight").get<double>();
  model.params.seed = pj.at("seed").get<std::uint64_t>();
  for (const auto& tj : j.at("trees")) {
    RegressionTree tree;
    detail::node_from_json(tj, tree);
    model.trees.push_back(std::move(tree));
    for (const auto& nd : model.trees.back().nodes)
      if (!nd.is_leaf()) model.fscore[static_cast<std::size_t>(nd.feature)] += 1;
  }
  return model;
}

}  // namespace pate
