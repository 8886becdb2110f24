#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pate/experiment.hpp"
#include "test_support.hpp"

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

std::vector<int> iota_ids(int lo, int hi) {  // inclusive
  std::vector<int> ids;
  for (int i = lo; i <= hi; ++i) ids.push_back(i);
  return ids;
}

const char* const kReportFiles[] = {
    "table3.csv",          "table2.json",          "table2_full.json",
    "correlation.csv",     "importance.csv",       "summary.json",
    "scatter_linear.svg",  "scatter_xgboost.svg",  "residuals_linear.svg",
    "residuals_xgboost.svg", "error_hist_linear.svg", "error_hist_xgboost.svg",
    "correlation_heatmap.svg", "importance_fscore.svg"};

pate::BoostParams small_params() {
  pate::BoostParams prm;
  prm.n_trees = 5;
  prm.max_depth = 3;
  return prm;
}

}  // namespace

TEST_CASE("the five ablation configs carry the exact feature id sets") {
  const auto configs = pate::ablation_configs();
  REQUIRE(configs.size() == 5);

  CHECK(configs[0].name == "w/ only P");
  CHECK(configs[0].feature_subset == iota_ids(0, 7));

  CHECK(configs[1].name == "w/o A");
  auto woa = iota_ids(0, 7);
  for (int i = 20; i <= 25; ++i) woa.push_back(i);
  CHECK(configs[1].feature_subset == woa);

  CHECK(configs[2].name == "w/o T");
  auto wot = iota_ids(0, 19);
  for (int i = 21; i <= 25; ++i) wot.push_back(i);
  CHECK(configs[2].feature_subset == wot);

  CHECK(configs[3].name == "w/o S");
  CHECK(configs[3].feature_subset == iota_ids(0, 20));

  CHECK(configs[4].name == "w/ PATS");
  CHECK(configs[4].feature_subset == iota_ids(0, 25));

  CHECK(pate::ablation_config("w/o T").feature_subset == wot);
  CHECK_THROWS_AS(pate::ablation_config("w/ everything"), pate::InvariantViolation);

  CHECK(pate::model_kind_label(pate::ModelKind::linear) == "Linear regression");
  CHECK(pate::model_kind_label(pate::ModelKind::boosted) == "XGBoost regression");
}

TEST_CASE("seed derivation is pinned") {
  const auto seeds = pate::derive_seeds(42);
  CHECK(seeds.split_seed == 42);
  CHECK(seeds.boost_seed == 13679457532755275413ull);
  CHECK(pate::splitmix64(0) == 0xe220a8397b1dcdafull);
  CHECK(pate::derive_seeds(0).split_seed == 0);
}

TEST_CASE("dataset hash reacts to any record change") {
  const auto ds = testsup::make_uniform_dataset(40, 5);
  auto copy = ds;
  CHECK(pate::dataset_hash(ds) == pate::dataset_hash(copy));
  copy.records[17].price += 1e-9;
  CHECK(pate::dataset_hash(ds) != pate::dataset_hash(copy));
  auto copy2 = ds;
  copy2.records[0].features[25] = -copy2.records[0].features[25];
  CHECK(pate::dataset_hash(ds) != pate::dataset_hash(copy2));
}

TEST_CASE("run_ablation yields all ten cells with per-cell bookkeeping") {
  const auto ds = testsup::make_pats_dataset(300, 12);
  pate::SplitSpec spec;
  spec.seed = 9;
  const auto results = pate::run_ablation(ds, spec, small_params());
  REQUIRE(results.size() == 10);

  const auto configs = pate::ablation_configs();
  for (std::size_t c = 0; c < configs.size(); ++c) {
    for (std::size_t m = 0; m < 2; ++m) {
      const auto& r = results[2 * c + m];
      CHECK(r.config.name == configs[c].name);
      CHECK(r.model_kind == (m == 0 ? pate::ModelKind::linear : pate::ModelKind::boosted));
      CHECK(r.seed == 9);
      REQUIRE(r.error.empty());
      CHECK(r.train_metrics.k == configs[c].feature_subset.size());
      CHECK(r.test_metrics.k == configs[c].feature_subset.size());
      CHECK(r.train_metrics.n == 210);  // floor(0.7 * 300)
      CHECK(r.test_metrics.n == 90);
      CHECK(r.params.has_value() == (m == 1));
    }
  }
}

TEST_CASE("ablation output is deterministic for a fixed seed") {
  const auto ds = testsup::make_pats_dataset(200, 33);
  pate::SplitSpec spec;
  spec.seed = 4;
  const auto prm = small_params();
  const auto a = pate::run_ablation(ds, spec, prm);
  const auto b = pate::run_ablation(ds, spec, prm);
  CHECK(pate::detail::table3_csv(a) == pate::detail::table3_csv(b));

  const auto full1 = pate::run_ablation_full(ds, spec, prm);
  const auto full2 = pate::run_ablation_full(ds, spec, prm);
  CHECK(full1.report.partition == full2.report.partition);

  pate::SplitSpec other;
  other.seed = 5;
  const auto full3 = pate::run_ablation_full(ds, other, prm);
  CHECK(full1.report.partition != full3.report.partition);
}

TEST_CASE("training R^2 grows along nested config chains (linear)") {
  const auto ds = testsup::make_pats_dataset(800, 2024);
  pate::SplitSpec spec;
  const auto results = pate::run_ablation(ds, spec, small_params());
  const auto train_r2 = [&](const std::string& name) {
    return pate::detail::find_result(results, name, pate::ModelKind::linear)
        .train_metrics.r2;
  };
  // Feature sets are nested, so the unadjusted training R^2 cannot drop by
  // more than the tiny ridge-fallback bias.
  const double tol = 1e-6;
  CHECK(train_r2("w/ only P") <= train_r2("w/o A") + tol);
  CHECK(train_r2("w/o A") <= train_r2("w/ PATS") + tol);
  CHECK(train_r2("w/ only P") <= train_r2("w/o S") + tol);
  CHECK(train_r2("w/o S") <= train_r2("w/ PATS") + tol);
  CHECK(train_r2("w/ only P") <= train_r2("w/o T") + tol);
  CHECK(train_r2("w/o T") <= train_r2("w/ PATS") + tol);
}

TEST_CASE("full feature set beats property-only on amenity-driven data") {
  const auto ds = testsup::make_pats_dataset(800, 7);
  pate::SplitSpec spec;
  pate::BoostParams prm;
  prm.n_trees = 30;
  prm.max_depth = 4;
  const auto results = pate::run_ablation(ds, spec, prm);
  for (const auto kind : {pate::ModelKind::linear, pate::ModelKind::boosted}) {
    const auto& pats = pate::detail::find_result(results, "w/ PATS", kind);
    const auto& only_p = pate::detail::find_result(results, "w/ only P", kind);
    REQUIRE(pats.error.empty());
    REQUIRE(only_p.error.empty());
    CHECK(pats.test_metrics.r2 > only_p.test_metrics.r2);
  }
}

TEST_CASE("emit_report writes a byte-identical bundle on repeated runs") {
  const auto ds = testsup::make_pats_dataset(120, 99);
  pate::SplitSpec spec;
  const auto prm = small_params();

  testsup::TempDir tmp;
  const auto dir1 = tmp.file("rep1");
  const auto dir2 = tmp.file("rep2");
  pate::emit_report(pate::run_ablation_full(ds, spec, prm).report, dir1);
  pate::emit_report(pate::run_ablation_full(ds, spec, prm).report, dir2);

  for (const char* name : kReportFiles) {
    INFO(name);
    REQUIRE(std::filesystem::exists(dir1 / name));
    const std::string body1 = slurp(dir1 / name);
    CHECK(body1 == slurp(dir2 / name));
    CHECK_FALSE(body1.empty());
    if (std::string(name).ends_with(".svg")) {
      CHECK(body1.rfind("<?xml", 0) == 0);
      CHECK(body1.find("<svg ") != std::string::npos);
      CHECK(body1.find("</svg>") != std::string::npos);
    }
  }

  // table3.csv: header plus 2 blocks x 2 methods x 5 configs.
  const auto rows = lines_of(slurp(dir1 / "table3.csv"));
  REQUIRE(rows.size() == 21);
  CHECK(rows[0] == "Data,Method,R2,AdjR2,MAE,MSE,RMSE");
  const auto configs = pate::ablation_configs();
  for (std::size_t i = 0; i < 20; ++i) {
    const std::string block = i < 10 ? "Training set" : "Testing set";
    const std::string method = (i / 5) % 2 == 0 ? "Linear regression" : "XGBoost regression";
    const std::string& config = configs[i % 5].name;
    CHECK(rows[1 + i].rfind(block + "," + method + " " + config + ",", 0) == 0);
  }

  // summary.json records the run parameters.
  const auto summary = nlohmann::json::parse(slurp(dir1 / "summary.json"));
  CHECK(summary.at("seed").get<std::uint64_t>() == spec.seed);
  CHECK(summary.at("train_rows").get<std::size_t>() == 84);
  CHECK(summary.at("test_rows").get<std::size_t>() == 36);
  CHECK(summary.at("boost_params").at("n_trees").get<int>() == prm.n_trees);

  // table2.json holds the 26-coefficient linear model of the full config.
  const auto table2 = nlohmann::json::parse(slurp(dir1 / "table2.json"));
  REQUIRE(table2.at("coefficients").size() == 26);
  CHECK(table2.at("coefficients")[0].at("feature") == "Year");
  CHECK(table2.at("coefficients")[25].at("feature") == "FeaPct");
  CHECK(table2.contains("intercept"));
  const auto table2_full = nlohmann::json::parse(slurp(dir1 / "table2_full.json"));
  REQUIRE(table2_full.at("coefficients").size() == 26);

  // correlation.csv: label row plus 27 rows, diagonal exactly 1.
  const auto corr = lines_of(slurp(dir1 / "correlation.csv"));
  REQUIRE(corr.size() == 28);
  CHECK(corr[0].rfind(",Year,Elvt,", 0) == 0);
  CHECK(corr[1].rfind("Year,1,", 0) == 0);
  CHECK(corr[27].rfind("Price,", 0) == 0);

  // importance.csv lists only features that actually split.
  const auto imp = lines_of(slurp(dir1 / "importance.csv"));
  REQUIRE(imp.size() >= 2);
  CHECK(imp[0] == "Feature,FScore");
}

TEST_CASE("emit_report refuses empty inputs before touching the filesystem") {
  testsup::TempDir tmp;
  const auto dir = tmp.file("never");
  pate::ReportInputs empty;
  CHECK_THROWS_AS(pate::emit_report(empty, dir), pate::EmptyDataset);
  CHECK_FALSE(std::filesystem::exists(dir));
}

TEST_CASE("failed cells render as NA rows but do not block the rest") {
  // 39 records -> 27 train / 12 test rows: the 26-feature linear fit fails on
  // sample count, while the 8-feature config still fits and evaluates.
  const auto ds = testsup::make_pats_dataset(39, 1);
  pate::SplitSpec spec;
  const auto results = pate::run_ablation(ds, spec, small_params());
  REQUIRE(results.size() == 10);

  const auto& failed =
      pate::detail::find_result(results, "w/ PATS", pate::ModelKind::linear);
  CHECK_FALSE(failed.error.empty());
  const auto& ok =
      pate::detail::find_result(results, "w/ only P", pate::ModelKind::linear);
  CHECK(ok.error.empty());

  const auto rows = lines_of(pate::detail::table3_csv(results));
  REQUIRE(rows.size() == 21);
  bool saw_na = false, saw_ok = false;
  for (const auto& row : rows) {
    if (row == "Training set,Linear regression w/ PATS,NA,NA,NA,NA,NA") saw_na = true;
    if (row.rfind("Training set,Linear regression w/ only P,", 0) == 0) {
      saw_ok = true;
      CHECK(row.find("NA") == std::string::npos);
    }
  }
  CHECK(saw_na);
  CHECK(saw_ok);
}

TEST_CASE("table3 assembly demands all ten cells") {
  const auto ds = testsup::make_pats_dataset(200, 3);
  pate::SplitSpec spec;
  auto results = pate::run_ablation(ds, spec, small_params());
  results.pop_back();
  CHECK_THROWS_AS(pate::detail::table3_csv(results), pate::InvariantViolation);
}

TEST_CASE("run_ablation_full assembles consistent report inputs") {
  const auto ds = testsup::make_pats_dataset(150, 44);
  pate::SplitSpec spec;
  spec.seed = 11;
  const auto run = pate::run_ablation_full(ds, spec, small_params());

  CHECK(run.train.size() == 105);
  CHECK(run.test.size() == 45);
  CHECK(run.report.seed == 11);
  CHECK(run.report.train_n == 105);
  CHECK(run.report.test_n == 45);
  CHECK(run.report.test_actual.size() == 45);
  CHECK(run.report.linear_predicted.size() == 45);
  CHECK(run.report.boosted_predicted.size() == 45);
  CHECK(run.report.results.size() == 10);
  CHECK_FALSE(run.report.importance.empty());
  CHECK(run.report.linear_model.feature_subset == iota_ids(0, 25));
  CHECK(run.report.linear_model_full.feature_subset == iota_ids(0, 25));
  CHECK(run.report.correlation.size() == 27);
  CHECK(run.report.partition == pate::partition_hash(run.train, run.test));
}

TEST_CASE("dataset CSV writer round-trips through ingest") {
  const auto ds = testsup::make_uniform_dataset(50, 77);
  testsup::TempDir tmp;
  const auto path = tmp.file("roundtrip.csv");
  pate::write_dataset_csv(ds, path);
  const auto back = pate::ingest_csv(path);
  REQUIRE(back.records.size() == ds.records.size());
  for (std::size_t i = 0; i < ds.records.size(); ++i)
    CHECK(back.records[i] == ds.records[i]);
}

TEST_CASE("correlation and importance CSV shapes") {
  const auto ds = testsup::make_uniform_dataset(60, 8);
  const auto m = pate::correlation_matrix(ds);
  const auto rows = lines_of(pate::correlation_to_csv(m));
  REQUIRE(rows.size() == 28);
  CHECK(rows[0][0] == ',');
  CHECK(lines_of(pate::correlation_to_csv(m))[1].rfind("Year,1,", 0) == 0);

  const std::vector<std::pair<int, std::int64_t>> ranked = {{0, 5}, {4, 2}};
  CHECK(pate::importance_to_csv(ranked) == "Feature,FScore\nYear,5\nKchNum,2\n");
}
