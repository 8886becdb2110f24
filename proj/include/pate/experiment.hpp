#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pate/csv.hpp"
#include "pate/dataset.hpp"
#include "pate/errors.hpp"
#include "pate/gbt.hpp"
#include "pate/linreg.hpp"
#include "pate/metrics.hpp"
#include "pate/numeric.hpp"
#include "pate/stats.hpp"
#include "pate/svg.hpp"

namespace pate {

struct AblationConfig {
  std::string name;
  std::vector<int> feature_subset;
};

// The five canonical settings: P = property (0-7), A = amenity (8-19),
// T = traffic (20), S = emotions (21-25).
inline std::vector<AblationConfig> ablation_configs() {
  const auto range = [](int lo, int hi) {  // inclusive
    std::vector<int> ids;
    for (int i = lo; i <= hi; ++i) ids.push_back(i);
    return ids;
  };
  const auto join = [](std::vector<int> a, const std::vector<int>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  return {
      {"w/ only P", range(0, 7)},
      {"w/o A", join(range(0, 7), range(20, 25))},
      {"w/o T", join(range(0, 19), range(21, 25))},
      {"w/o S", range(0, 20)},
      {"w/ PATS", range(0, 25)},
  };
}

inline const AblationConfig& ablation_config(const std::string& name) {
  static const std::vector<AblationConfig> configs = ablation_configs();
  for (const auto& c : configs)
    if (c.name == name) return c;
  throw InvariantViolation("unknown ablation config \"" + name +
                           "\" (expected one of: w/ only P, w/o A, w/o T, w/o S, w/ PATS)");
}

enum class ModelKind { linear, boosted };

inline std::string model_kind_label(ModelKind kind) {
  return kind == ModelKind::linear ? "Linear regression" : "XGBoost regression";
}

struct ExperimentResult {
  AblationConfig config;
  ModelKind model_kind = ModelKind::linear;
  MetricsReport train_metrics;
  MetricsReport test_metrics;
  std::uint64_t seed = 0;
  std::optional<BoostParams> params;  // boosted cells only
  std::string error;                  // non-empty when the cell failed
};

// One CLI seed drives everything: the split uses it directly, boosting gets
// a decorrelated derivation.
struct DerivedSeeds {
  std::uint64_t split_seed = 0;
  std::uint64_t boost_seed = 0;
};

inline DerivedSeeds derive_seeds(std::uint64_t seed) {
  return {seed, splitmix64(seed)};
}

// FNV-1a over the bit patterns of every record, in record order.
inline std::uint64_t dataset_hash(const Dataset& data) {
  std::uint64_t h = 1469598103934665603ull;
  const auto mix = [&h](double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  for (const auto& rec : data.records) {
    for (double f : rec.features) mix(f);
    mix(rec.price);
  }
  return h;
}

inline std::uint64_t partition_hash(const Dataset& train, const Dataset& test) {
  return dataset_hash(train) ^ (dataset_hash(test) * 0x9e3779b97f4a7c15ull);
}

namespace detail {

inline ExperimentResult run_cell(const Dataset& train, const Dataset& test,
                                 const AblationConfig& config, ModelKind kind,
                                 std::uint64_t seed, const BoostParams& params) {
  ExperimentResult res;
  res.config = config;
  res.model_kind = kind;
  res.seed = seed;
  if (kind == ModelKind::boosted) res.params = params;
  try {
    std::vector<double> train_pred, test_pred;
    if (kind == ModelKind::linear) {
      const LinearModel model = fit_linear(train, config.feature_subset);
      train_pred = predict_linear(model, train);
      test_pred = predict_linear(model, test);
    } else {
      const BoostedEnsemble model = fit_boosted(train, config.feature_subset, params);
      train_pred = predict_boosted(model, train);
      test_pred = predict_boosted(model, test);
    }
    const std::size_t k = config.feature_subset.size();
    res.train_metrics = evaluate(price_column(train), train_pred, k);
    res.test_metrics = evaluate(price_column(test), test_pred, k);
  } catch (const Error& e) {
    res.error = e.what();
  }
  return res;
}

}  // namespace detail

// 10 cells (5 configs x 2 models) over one shared partition. A failing cell
// carries its error message; the rest still run.
inline std::vector<ExperimentResult> run_ablation(const Dataset& data,
                                                  const SplitSpec& split_spec,
                                                  const BoostParams& params) {
  const auto [train, test] = split(data, split_spec);
  std::vector<ExperimentResult> results;
  for (const auto& config : ablation_configs()) {
    results.push_back(detail::run_cell(train, test, config, ModelKind::linear,
                                       split_spec.seed, params));
    results.push_back(detail::run_cell(train, test, config, ModelKind::boosted,
                                       split_spec.seed, params));
  }
  return results;
}

// Everything emit_report consumes.
struct ReportInputs {
  std::vector<ExperimentResult> results;
  CorrelationMatrix correlation;                          // full dataset
  std::vector<std::pair<int, std::int64_t>> importance;   // boosted w/ PATS
  LinearModel linear_model;                               // w/ PATS, train split
  LinearModel linear_model_full;                          // w/ PATS, full data
  std::vector<double> test_actual;
  std::vector<double> linear_predicted;                   // on the test split
  std::vector<double> boosted_predicted;                  // on the test split
  std::uint64_t seed = 0;
  std::uint64_t partition = 0;                            // partition_hash
  std::size_t train_n = 0;
  std::size_t test_n = 0;
  BoostParams params;
};

struct AblationRun {
  Dataset train;
  Dataset test;
  std::vector<ExperimentResult> results;
  ReportInputs report;
};

inline AblationRun run_ablation_full(const Dataset& data, const SplitSpec& split_spec,
                                     const BoostParams& params) {
  AblationRun run;
  std::tie(run.train, run.test) = split(data, split_spec);
  for (const auto& config : ablation_configs()) {
    run.results.push_back(detail::run_cell(run.train, run.test, config,
                                           ModelKind::linear, split_spec.seed, params));
    run.results.push_back(detail::run_cell(run.train, run.test, config,
                                           ModelKind::boosted, split_spec.seed, params));
  }

  const AblationConfig& pats = ablation_config("w/ PATS");
  ReportInputs& rep = run.report;
  rep.results = run.results;
  rep.correlation = correlation_matrix(data);
  const BoostedEnsemble boosted = fit_boosted(run.train, pats.feature_subset, params);
  rep.importance = feature_importance(boosted);
  rep.linear_model = fit_linear(run.train, pats.feature_subset);
  rep.linear_model_full = fit_linear(data, pats.feature_subset);
  rep.test_actual = price_column(run.test);
  rep.linear_predicted = predict_linear(rep.linear_model, run.test);
  rep.boosted_predicted = predict_boosted(boosted, run.test);
  rep.seed = split_spec.seed;
  rep.partition = partition_hash(run.train, run.test);
  rep.train_n = run.train.size();
  rep.test_n = run.test.size();
  rep.params = params;
  return run;
}

inline void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& rec : data.records) {
    for (double f : rec.features) {
      out += format_double(f);
      out += ',';
    }
    out += format_double(rec.price);
    out += '\n';
  }
  csv::write_file(path, out);
}

inline std::string correlation_to_csv(const CorrelationMatrix& m) {
  std::string out;
  for (const auto& label : m.labels) {
    out += ',';
    out += label;
  }
  out += '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += m.labels[i];
    for (std::size_t j = 0; j < m.size(); ++j) {
      out += ',';
      const auto& v = m.at(i, j);
      out += v ? format_double(*v) : std::string("NA");
    }
    out += '\n';
  }
  return out;
}

inline std::string importance_to_csv(const std::vector<std::pair<int, std::int64_t>>& ranked) {
  std::string out = "Feature,FScore\n";
  for (const auto& [id, count] : ranked)
    out += std::string(feature_name(id)) + "," + std::to_string(count) + "\n";
  return out;
}

namespace detail {

inline std::string metrics_cells(const MetricsReport& m, const std::string& error) {
  if (!error.empty()) return "NA,NA,NA,NA,NA";
  return format_double(m.r2) + "," + format_double(m.adjusted_r2) + "," +
         format_double(m.mae) + "," + format_double(m.mse) + "," + format_double(m.rmse);
}

inline const ExperimentResult& find_result(const std::vector<ExperimentResult>& results,
                                           const std::string& config, ModelKind kind) {
  for (const auto& r : results)
    if (r.config.name == config && r.model_kind == kind) return r;
  throw InvariantViolation("missing ablation cell: " + model_kind_label(kind) + " " + config);
}

inline std::string table3_csv(const std::vector<ExperimentResult>& results) {
  std::string out = "Data,Method,R2,AdjR2,MAE,MSE,RMSE\n";
  const auto configs = ablation_configs();
  for (const bool training : {true, false}) {
    const std::string block = training ? "Training set" : "Testing set";
    for (ModelKind kind : {ModelKind::linear, ModelKind::boosted}) {
      for (const auto& config : configs) {
        const auto& cell = find_result(results, config.name, kind);
        out += block + "," + model_kind_label(kind) + " " + config.name + "," +
               metrics_cells(training ? cell.train_metrics : cell.test_metrics,
                             cell.error) +
               "\n";
      }
    }
  }
  return out;
}

inline std::vector<std::pair<double, double>> zip(const std::vector<double>& x,
                                                  const std::vector<double>& y) {
  std::vector<std::pair<double, double>> pts(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) pts[i] = {x[i], y[i]};
  return pts;
}

inline std::vector<double> residuals(const std::vector<double>& actual,
                                     const std::vector<double>& predicted) {
  std::vector<double> r(actual.size());
  for (std::size_t i = 0; i < actual.size(); ++i) r[i] = actual[i] - predicted[i];
  return r;
}

}  // namespace detail

// Writes the full bundle: table3.csv, table2.json (+ _full variant),
// correlation.csv, importance.csv, summary.json, and the SVG plots.
// Byte-deterministic for fixed inputs.
inline void emit_report(const ReportInputs& in, const std::filesystem::path& out_dir) {
  if (in.results.empty()) throw EmptyDataset("emit_report: no results");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory " + out_dir.string() + ": " + ec.message());

  csv::write_file(out_dir / "table3.csv", detail::table3_csv(in.results));
  csv::write_file(out_dir / "table2.json", linear_to_json(in.linear_model).dump(2) + "\n");
  csv::write_file(out_dir / "table2_full.json",
                  linear_to_json(in.linear_model_full).dump(2) + "\n");
  csv::write_file(out_dir / "correlation.csv", correlation_to_csv(in.correlation));
  csv::write_file(out_dir / "importance.csv", importance_to_csv(in.importance));

  nlohmann::ordered_json summary;
  summary["seed"] = in.seed;
  summary["partition_hash"] = in.partition;
  summary["train_rows"] = in.train_n;
  summary["test_rows"] = in.test_n;
  nlohmann::ordered_json pj;
  pj["n_trees"] = in.params.n_trees;
  pj["max_depth"] = in.params.max_depth;
  pj["learning_rate"] = in.params.learning_rate;
  pj["lambda"] = in.params.lambda;
  pj["gamma"] = in.params.gamma;
  pj["min_child_weight"] = in.params.min_child_weight;
  pj["seed"] = in.params.seed;
  summary["boost_params"] = std::move(pj);
  csv::write_file(out_dir / "summary.json", summary.dump(2) + "\n");

  const auto& actual = in.test_actual;
  csv::write_file(out_dir / "scatter_linear.svg",
                  svg::scatter_chart("Linear regression: actual vs predicted (test)",
                                     "actual price", "predicted price",
                                     detail::zip(actual, in.linear_predicted)));
  csv::write_file(out_dir / "scatter_xgboost.svg",
                  svg::scatter_chart("XGBoost regression: actual vs predicted (test)",
                                     "actual price", "predicted price",
                                     detail::zip(actual, in.boosted_predicted)));
  csv::write_file(out_dir / "residuals_linear.svg",
                  svg::residual_chart("Linear regression: residuals vs predicted (test)",
                                      "predicted price", "residual",
                                      detail::zip(in.linear_predicted,
                                                  detail::residuals(actual, in.linear_predicted))));
  csv::write_file(out_dir / "residuals_xgboost.svg",
                  svg::residual_chart("XGBoost regression: residuals vs predicted (test)",
                                      "predicted price", "residual",
                                      detail::zip(in.boosted_predicted,
                                                  detail::residuals(actual, in.boosted_predicted))));
  csv::write_file(out_dir / "error_hist_linear.svg",
                  svg::histogram_chart("Linear regression: test error distribution",
                                       "actual - predicted",
                                       detail::residuals(actual, in.linear_predicted)));
  csv::write_file(out_dir / "error_hist_xgboost.svg",
                  svg::histogram_chart("XGBoost regression: test error distribution",
                                       "actual - predicted",
                                       detail::residuals(actual, in.boosted_predicted)));
  csv::write_file(out_dir / "correlation_heatmap.svg",
                  svg::heatmap_chart("Feature correlation (Pearson r)", in.correlation));

  std::vector<std::pair<std::string, double>> bars;
  for (const auto& [id, count] : in.importance)
    bars.emplace_back(std::string(feature_name(id)), static_cast<double>(count));
  csv::write_file(out_dir / "importance_fscore.svg",
                  svg::bar_chart("Feature importance (F-score)", "split count", bars));
}

}  // namespace pate
