// Command-line front end for the housing-price pipeline: ingestion, feature
// derivation, correlation, model training/evaluation, importance ranking,
// the ablation study, and report emission.

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pate/pate.hpp"

namespace {

namespace fs = std::filesystem;
using pate::format_double;

struct ModelFlags {
  std::uint64_t seed = 42;
  double train_frac = 0.7;
  int trees = 100;
  int depth = 6;
  double eta = 0.3;
  double lambda = 1.0;
  double gamma = 0.0;
  std::vector<CLI::Option*> seed_opts;  // one --seed per subcommand
};

void add_split_flags(CLI::App* cmd, ModelFlags& m) {
  m.seed_opts.push_back(cmd->add_option(
      "--seed", m.seed, "random seed (falls back to env PATE_SEED, then 42)"));
  cmd->add_option("--train-frac", m.train_frac, "training fraction in (0,1)");
}

void add_boost_flags(CLI::App* cmd, ModelFlags& m) {
  cmd->add_option("--trees", m.trees, "boosting rounds");
  cmd->add_option("--depth", m.depth, "maximum tree depth");
  cmd->add_option("--eta", m.eta, "learning rate");
  cmd->add_option("--lambda", m.lambda, "L2 leaf-weight penalty");
  cmd->add_option("--gamma", m.gamma, "per-leaf penalty");
}

// --seed wins; otherwise PATE_SEED; otherwise the default. Returns false
// (usage error) when PATE_SEED is set but unparsable.
bool resolve_seed(ModelFlags& m) {
  for (const CLI::Option* opt : m.seed_opts)
    if (opt != nullptr && opt->count() > 0) return true;
  const char* env = std::getenv("PATE_SEED");
  if (env == nullptr || *env == '\0') return true;
  std::uint64_t v = 0;
  const char* end = env + std::strlen(env);
  auto [p, ec] = std::from_chars(env, end, v);
  if (ec != std::errc() || p != end) {
    std::cerr << "usage error: PATE_SEED=\"" << env
              << "\" is not an unsigned integer\n";
    return false;
  }
  m.seed = v;
  return true;
}

pate::SplitSpec split_spec(const ModelFlags& m) {
  return {m.train_frac, pate::derive_seeds(m.seed).split_seed};
}

pate::BoostParams boost_params(const ModelFlags& m) {
  pate::BoostParams p;
  p.n_trees = m.trees;
  p.max_depth = m.depth;
  p.learning_rate = m.eta;
  p.lambda = m.lambda;
  p.gamma = m.gamma;
  p.seed = pate::derive_seeds(m.seed).boost_seed;
  return p;
}

std::string metrics_row(const std::string& block, const std::string& method,
                        const pate::MetricsReport& r) {
  return block + "," + method + "," + format_double(r.r2) + "," +
         format_double(r.adjusted_r2) + "," + format_double(r.mae) + "," +
         format_double(r.mse) + "," + format_double(r.rmse) + "\n";
}

nlohmann::json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw pate::IoError("cannot open " + path.string());
  nlohmann::json j;
  in >> j;
  return j;
}

int cmd_ingest(const std::string& data_path, const std::string& out_path) {
  const pate::Dataset data = pate::ingest_csv(data_path);
  if (!out_path.empty()) pate::write_dataset_csv(data, out_path);
  std::cout << "ok: " << data.size() << " records from " << data_path << "\n";
  return 0;
}

int cmd_features(const std::string& properties, const std::string& pois,
                 const std::string& traffic, const std::string& emotions,
                 const std::string& out_path) {
  const auto props = pate::load_properties(properties);
  const auto poi_list = pate::load_pois(pois);
  const auto samples = pate::load_traffic(traffic);
  const auto tallies = pate::load_emotions(emotions);
  const pate::Dataset data = pate::derive_dataset(props, poi_list, samples, tallies);
  pate::write_dataset_csv(data, out_path);
  std::cout << "ok: derived " << data.size() << " records -> " << out_path << "\n";
  return 0;
}

int cmd_correlate(const std::string& data_path, const std::string& out_path) {
  const pate::Dataset data = pate::ingest_csv(data_path);
  const pate::CorrelationMatrix m = pate::correlation_matrix(data);
  pate::csv::write_file(out_path, pate::correlation_to_csv(m));
  std::cout << "ok: " << m.size() << "x" << m.size() << " correlation matrix -> "
            << out_path << "\n";
  return 0;
}

int cmd_train(const std::string& data_path, const std::string& config_name,
              const ModelFlags& flags, const std::string& out_dir) {
  const pate::Dataset data = pate::ingest_csv(data_path);
  const auto [train, test] = pate::split(data, split_spec(flags));
  const pate::AblationConfig& config = pate::ablation_config(config_name);

  const pate::LinearModel linear = pate::fit_linear(train, config.feature_subset);
  const pate::BoostedEnsemble boosted =
      pate::fit_boosted(train, config.feature_subset, boost_params(flags));

  fs::create_directories(out_dir);
  pate::csv::write_file(fs::path(out_dir) / "model_linear.json",
                        pate::linear_to_json(linear).dump(2) + "\n");
  pate::csv::write_file(fs::path(out_dir) / "model_boosted.json",
                        pate::boosted_to_json(boosted).dump(2) + "\n");
  std::cout << "ok: trained linear + boosted (" << config.name << ") on " << train.size()
            << " records -> " << out_dir << "\n";
  return 0;
}

int cmd_evaluate(const std::string& data_path, const std::string& model_path,
                 const std::string& config_name, const ModelFlags& flags,
                 const std::string& out_path) {
  const pate::Dataset data = pate::ingest_csv(data_path);
  const auto [train, test] = pate::split(data, split_spec(flags));
  const pate::AblationConfig& config = pate::ablation_config(config_name);
  const std::size_t k = config.feature_subset.size();

  const nlohmann::json j = load_json(model_path);
  std::vector<double> train_pred, test_pred;
  std::string method;
  if (j.contains("trees")) {
    const pate::BoostedEnsemble model = pate::boosted_from_json(j);
    train_pred = pate::predict_boosted(model, train);
    test_pred = pate::predict_boosted(model, test);
    method = pate::model_kind_label(pate::ModelKind::boosted);
  } else {
    const pate::LinearModel model = pate::linear_from_json(j);
    train_pred = pate::predict_linear(model, train);
    test_pred = pate::predict_linear(model, test);
    method = pate::model_kind_label(pate::ModelKind::linear);
  }
  const auto train_m = pate::evaluate(pate::price_column(train), train_pred, k);
  const auto test_m = pate::evaluate(pate::price_column(test), test_pred, k);

  std::string out = "Data,Method,R2,AdjR2,MAE,MSE,RMSE\n";
  out += metrics_row("Training set", method + " " + config.name, train_m);
  out += metrics_row("Testing set", method + " " + config.name, test_m);
  std::cout << out;
  if (!out_path.empty()) pate::csv::write_file(out_path, out);
  return 0;
}

int cmd_importance(const std::string& model_path, const std::string& out_path) {
  const nlohmann::json j = load_json(model_path);
  if (!j.contains("trees"))
    throw pate::InvariantViolation("importance needs a boosted model (no \"trees\" key in " +
                                   model_path + ")");
  const pate::BoostedEnsemble model = pate::boosted_from_json(j);
  pate::csv::write_file(out_path, pate::importance_to_csv(pate::feature_importance(model)));
  std::cout << "ok: importance ranking -> " << out_path << "\n";
  return 0;
}

int cmd_ablate(const std::string& data_path, const ModelFlags& flags,
               const std::string& out_dir) {
  const pate::Dataset data = pate::ingest_csv(data_path);
  const pate::AblationRun run =
      pate::run_ablation_full(data, split_spec(flags), boost_params(flags));
  pate::emit_report(run.report, out_dir);
  std::cout << "ok: " << run.results.size() << " ablation cells (train " << run.train.size()
            << " / test " << run.test.size() << ") -> " << out_dir << "\n";
  for (const auto& r : run.results)
    if (!r.error.empty())
      std::cout << "warning: cell \"" << pate::model_kind_label(r.model_kind) << " "
                << r.config.name << "\" failed: " << r.error << "\n";
  return 0;
}

int cmd_report(const std::string& data_path, const std::string& config_name,
               const ModelFlags& flags, const std::string& out_dir) {
  const pate::Dataset data = pate::ingest_csv(data_path);
  const auto [train, test] = pate::split(data, split_spec(flags));
  const pate::AblationConfig& config = pate::ablation_config(config_name);
  const std::size_t k = config.feature_subset.size();

  const pate::LinearModel linear = pate::fit_linear(train, config.feature_subset);
  const pate::BoostedEnsemble boosted =
      pate::fit_boosted(train, config.feature_subset, boost_params(flags));
  const auto actual = pate::price_column(test);
  const auto linear_pred = pate::predict_linear(linear, test);
  const auto boosted_pred = pate::predict_boosted(boosted, test);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  pate::csv::write_file(dir / "model_linear.json",
                        pate::linear_to_json(linear).dump(2) + "\n");
  pate::csv::write_file(dir / "model_boosted.json",
                        pate::boosted_to_json(boosted).dump(2) + "\n");

  std::string table = "Data,Method,R2,AdjR2,MAE,MSE,RMSE\n";
  const auto train_actual = pate::price_column(train);
  table += metrics_row("Training set", "Linear regression " + config.name,
                       pate::evaluate(train_actual, pate::predict_linear(linear, train), k));
  table += metrics_row("Training set", "XGBoost regression " + config.name,
                       pate::evaluate(train_actual, pate::predict_boosted(boosted, train), k));
  table += metrics_row("Testing set", "Linear regression " + config.name,
                       pate::evaluate(actual, linear_pred, k));
  table += metrics_row("Testing set", "XGBoost regression " + config.name,
                       pate::evaluate(actual, boosted_pred, k));
  pate::csv::write_file(dir / "metrics.csv", table);

  const pate::CorrelationMatrix corr = pate::correlation_matrix(data);
  pate::csv::write_file(dir / "correlation.csv", pate::correlation_to_csv(corr));
  pate::csv::write_file(dir / "correlation_heatmap.svg",
                        pate::svg::heatmap_chart("Feature correlation (Pearson r)", corr));
  const auto ranked = pate::feature_importance(boosted);
  pate::csv::write_file(dir / "importance.csv", pate::importance_to_csv(ranked));
  std::vector<std::pair<std::string, double>> bars;
  for (const auto& [id, count] : ranked)
    bars.emplace_back(std::string(pate::feature_name(id)), static_cast<double>(count));
  pate::csv::write_file(dir / "importance_fscore.svg",
                        pate::svg::bar_chart("Feature importance (F-score)", "split count",
                                             bars));

  const auto zip = [](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<std::pair<double, double>> pts(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) pts[i] = {a[i], b[i]};
    return pts;
  };
  const auto resid = [](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
  };
  pate::csv::write_file(dir / "scatter_linear.svg",
                        pate::svg::scatter_chart("Linear regression: actual vs predicted (test)",
                                                 "actual price", "predicted price",
                                                 zip(actual, linear_pred)));
  pate::csv::write_file(dir / "scatter_xgboost.svg",
                        pate::svg::scatter_chart("XGBoost regression: actual vs predicted (test)",
                                                 "actual price", "predicted price",
                                                 zip(actual, boosted_pred)));
  pate::csv::write_file(dir / "residuals_linear.svg",
                        pate::svg::residual_chart("Linear regression: residuals vs predicted (test)",
                                                  "predicted price", "residual",
                                                  zip(linear_pred, resid(actual, linear_pred))));
  pate::csv::write_file(dir / "residuals_xgboost.svg",
                        pate::svg::residual_chart("XGBoost regression: residuals vs predicted (test)",
                                                  "predicted price", "residual",
                                                  zip(boosted_pred, resid(actual, boosted_pred))));
  pate::csv::write_file(dir / "error_hist_linear.svg",
                        pate::svg::histogram_chart("Linear regression: test error distribution",
                                                   "actual - predicted",
                                                   resid(actual, linear_pred)));
  pate::csv::write_file(dir / "error_hist_xgboost.svg",
                        pate::svg::histogram_chart("XGBoost regression: test error distribution",
                                                   "actual - predicted",
                                                   resid(actual, boosted_pred)));
  std::cout << "ok: report (" << config.name << ") -> " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Housing-price pipeline: ingestion, geospatial features, correlation, "
               "linear & boosted-tree models, ablation study, reports"};
  app.require_subcommand(1);

  std::string data_path, out_path, model_path, config_name = "w/ PATS";
  std::string properties_path, pois_path, traffic_path, emotions_path;
  ModelFlags flags;

  CLI::App* ingest = app.add_subcommand("ingest", "validate a 27-column dataset CSV");
  ingest->add_option("--data", data_path, "dataset CSV")->required();
  ingest->add_option("--out", out_path, "write a normalized copy here");

  CLI::App* features = app.add_subcommand(
      "features", "derive the 27-column dataset from raw property/POI/traffic/emotion files");
  features->add_option("--properties", properties_path, "raw property CSV")->required();
  features->add_option("--pois", pois_path, "POI CSV (lat,lng,category)")->required();
  features->add_option("--traffic", traffic_path, "traffic CSV (lat,lng,minute,speed)")
      ->required();
  features->add_option("--emotions", emotions_path,
                       "emotion tallies CSV (property_row,anger,detest,happiness,sadness,fear)")
      ->required();
  features->add_option("--out", out_path, "output dataset CSV")->required();

  CLI::App* correlate = app.add_subcommand("correlate", "write the 27x27 Pearson matrix");
  correlate->add_option("--data", data_path, "dataset CSV")->required();
  correlate->add_option("--out", out_path, "output CSV")->required();

  CLI::App* train = app.add_subcommand("train", "fit linear + boosted models on the train split");
  train->add_option("--data", data_path, "dataset CSV")->required();
  train->add_option("--config", config_name,
                    "feature setting: w/ only P | w/o A | w/o T | w/o S | w/ PATS");
  add_split_flags(train, flags);
  add_boost_flags(train, flags);
  train->add_option("--out", out_path, "output directory")->required();

  CLI::App* evaluate = app.add_subcommand("evaluate", "score a saved model on a seeded split");
  evaluate->add_option("--data", data_path, "dataset CSV")->required();
  evaluate->add_option("--model", model_path, "model JSON from train")->required();
  evaluate->add_option("--config", config_name, "feature setting used for k");
  add_split_flags(evaluate, flags);
  evaluate->add_option("--out", out_path, "also write the metrics CSV here");

  CLI::App* importance = app.add_subcommand("importance", "rank features by split F-score");
  importance->add_option("--model", model_path, "boosted model JSON")->required();
  importance->add_option("--out", out_path, "output CSV")->required();

  CLI::App* ablate = app.add_subcommand("ablate", "run the 5x2 ablation study and full report");
  ablate->add_option("--data", data_path, "dataset CSV")->required();
  add_split_flags(ablate, flags);
  add_boost_flags(ablate, flags);
  ablate->add_option("--out", out_path, "output directory")->required();

  CLI::App* report = app.add_subcommand("report", "emit the report bundle for one setting");
  report->add_option("--data", data_path, "dataset CSV")->required();
  report->add_option("--config", config_name,
                     "feature setting: w/ only P | w/o A | w/o T | w/o S | w/ PATS");
  add_split_flags(report, flags);
  add_boost_flags(report, flags);
  report->add_option("--out", out_path, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message
    return 2;
  }

  if (!resolve_seed(flags)) return 2;

  try {
    if (app.got_subcommand(ingest)) return cmd_ingest(data_path, out_path);
    if (app.got_subcommand(features))
      return cmd_features(properties_path, pois_path, traffic_path, emotions_path, out_path);
    if (app.got_subcommand(correlate)) return cmd_correlate(data_path, out_path);
    if (app.got_subcommand(train)) return cmd_train(data_path, config_name, flags, out_path);
    if (app.got_subcommand(evaluate))
      return cmd_evaluate(data_path, model_path, config_name, flags, out_path);
    if (app.got_subcommand(importance)) return cmd_importance(model_path, out_path);
    if (app.got_subcommand(ablate)) return cmd_ablate(data_path, flags, out_path);
    if (app.got_subcommand(report)) return cmd_report(data_path, config_name, flags, out_path);
  } catch (const pate::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;  // unreachable with require_subcommand(1)
}
