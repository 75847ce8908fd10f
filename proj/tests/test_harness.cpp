// Copyright 2026 The Unistab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "unistab/harness.hpp"

using namespace unistab::harness;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.problem = "mean-estimation";
  cfg.n_list = {50, 100};
  cfg.trials = 200;
  cfg.deltas = {0.05, 0.1};
  cfg.seed = 42;
  return cfg;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("unistab_test_" + name)).string();
}

}  // namespace

TEST_CASE("config JSON round trip and validation") {
  ExperimentConfig cfg = small_config();
  cfg.lambda = 0.25;
  cfg.format = OutputFormat::kJson;
  cfg.gamma_rule = "fixed:0.01";
  CHECK(ExperimentConfig::from_json(cfg.to_json()) == cfg);
  cfg.lambda.reset();
  CHECK(ExperimentConfig::from_json(cfg.to_json()) == cfg);

  CHECK(ExperimentConfig::from_json("{}") == ExperimentConfig{});
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"trails": 5})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"trials": "many"})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"trials": -3})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"n": [0]})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"delta": 0.1})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"format": "xml"})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json("[1, 2]"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json("{not json"), ConfigError);

  ExperimentConfig bad;
  bad.deltas = {1.5};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ExperimentConfig{};
  bad.trials = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("config merge and load") {
  ExperimentConfig cfg = small_config();
  cfg.merge_json(R"({"seed": 7, "n": [10]})");
  CHECK(cfg.seed == 7);
  CHECK(cfg.n_list == std::vector<std::size_t>{10});
  CHECK(cfg.trials == 200);

  const std::string path = temp_path("config.json");
  {
    std::ofstream out(path);
    out << R"({"problem": "constant", "trials": 12})";
  }
  const ExperimentConfig loaded = ExperimentConfig::load(path);
  CHECK(loaded.problem == "constant");
  CHECK(loaded.trials == 12);
  std::remove(path.c_str());
  CHECK_THROWS_AS(ExperimentConfig::load(temp_path("missing.json")), IoError);
}

TEST_CASE("tables: CSV and JSON emission round trip") {
  const Table t{{{"name", ColumnType::kText},
                 {"k", ColumnType::kUInt},
                 {"x", ColumnType::kReal},
                 {"flag", ColumnType::kBool}},
                {{std::string("a"), std::uint64_t{3}, 0.1, true},
                 {std::string("b"), std::uint64_t{18446744073709551615ull}, 1.0 / 3.0, false},
                 {std::string("c"), std::uint64_t{0}, -2.5e-300, true}}};
  for (OutputFormat f : {OutputFormat::kCsv, OutputFormat::kJson}) {
    std::istringstream in(to_string(t, f));
    CHECK(parse_table(in, f, t.columns) == t);
  }
  const std::string csv = to_string(t, OutputFormat::kCsv);
  CHECK(csv.rfind("name,k,x,flag\na,3,0.10000000000000001,1\n", 0) == 0);
  CHECK(t.real(1, "x") == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(t.column_index("nope"), std::out_of_range);

  const Table empty{t.columns, {}};
  CHECK(to_string(empty, OutputFormat::kCsv) == "name,k,x,flag\n");
  CHECK(to_string(empty, OutputFormat::kJson).find('[') != std::string::npos);

  std::istringstream wrong("name,k,y,flag\n");
  CHECK_THROWS_AS(parse_table(wrong, OutputFormat::kCsv, t.columns), std::invalid_argument);

  const std::string path = temp_path("table.csv");
  emit(t, OutputFormat::kCsv, path);
  std::ifstream back(path);
  CHECK(parse_table(back, OutputFormat::kCsv, t.columns) == t);
  std::remove(path.c_str());
  CHECK_THROWS_AS(emit(t, OutputFormat::kCsv, "/nonexistent-dir/x.csv"), IoError);
}

TEST_CASE("upper quantile") {
  std::vector<double> v(100);
  for (int i = 0; i < 100; ++i) v[i] = i + 1;
  CHECK(upper_quantile(v, 0.01) == 99);
  CHECK(upper_quantile(v, 0.1) == 90);
  CHECK(upper_quantile(v, 0.999) == 1);
  std::vector<double> w(2000);
  for (int i = 0; i < 2000; ++i) w[i] = i + 1;
  CHECK(upper_quantile(w, 0.01) == 1980);
  CHECK_THROWS_AS(upper_quantile({}, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(upper_quantile(v, 0.0), std::invalid_argument);
}

TEST_CASE("parallel_for covers every index and reports the first failure") {
  for (std::size_t workers : {1u, 3u, 8u}) {
    std::vector<int> hits(100, 0);
    parallel_for(100, workers, [&](std::size_t i) { ++hits[i]; });
    for (int h : hits) CHECK(h == 1);
    try {
      parallel_for(50, workers, [](std::size_t i) {
        if (i == 17 || i == 31) throw std::runtime_error("boom " + std::to_string(i));
      });
      FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "boom 17");
    }
  }
}

TEST_CASE("tail experiment: schema, determinism and soundness") {
  ExperimentConfig cfg = small_config();
  const TailReport a = run_tail_experiment(cfg);
  REQUIRE(a.rows.size() == 4);
  const Table t = a.to_table();
  std::vector<std::string> names;
  for (const Column& c : t.columns) names.push_back(c.name);
  CHECK(names == std::vector<std::string>{"n", "delta", "quantile", "be02", "fv18", "main",
                                          "main_vacuous", "trials", "seed"});
  CHECK(a.rows[0].n == 50);
  CHECK(a.rows[0].trials == 200);
  CHECK(a.rows[0].seed == 42);
  CHECK(a.rows[0].quantile >= a.rows[1].quantile);  // delta 0.05 vs 0.1
  CHECK(a.soundness_violations() == 0);

  cfg.workers = 8;
  const TailReport b = run_tail_experiment(cfg);
  CHECK(to_string(a.to_table(), OutputFormat::kCsv) == to_string(b.to_table(), OutputFormat::kCsv));

  for (OutputFormat f : {OutputFormat::kCsv, OutputFormat::kJson}) {
    std::istringstream in(to_string(t, f));
    CHECK(TailReport::from_table(parse_table(in, f, TailReport::schema())).rows == a.rows);
  }

  cfg.seed = 43;
  CHECK(run_tail_experiment(cfg).rows[0].quantile != a.rows[0].quantile);

  cfg.n_list = {};
  const TailReport none = run_tail_experiment(cfg);
  CHECK(to_string(none.to_table(), OutputFormat::kCsv) ==
        "n,delta,quantile,be02,fv18,main,main_vacuous,trials,seed\n");
}

TEST_CASE("tail experiment on the other problems and solvers") {
  ExperimentConfig cfg = small_config();
  cfg.problem = "constant";
  const TailReport c = run_tail_experiment(cfg);
  for (const TailRow& r : c.rows) CHECK(r.quantile == 0.0);
  for (const TailDiagnostics& d : c.diagnostics) CHECK(d.gamma == 0.0);

  cfg.problem = "dp-majority";
  cfg.epsilon = 0.5;
  const TailReport dp = run_tail_experiment(cfg);
  CHECK(dp.diagnostics[0].gamma == doctest::Approx(std::expm1(0.5)));
  CHECK(dp.soundness_violations() == 0);

  cfg.problem = "mean-estimation";
  for (const char* solver : {"smooth-gd", "resample-sgd"}) {
    cfg.solver = solver;
    cfg.n_list = {1000};
    cfg.trials = 50;
    const TailReport r = run_tail_experiment(cfg);
    CHECK(r.rows.size() == 2);
    CHECK(r.diagnostics[0].gamma > 0.0);
  }
  cfg.solver = "newton";
  CHECK_THROWS_AS(run_tail_experiment(cfg), ConfigError);
  cfg.solver = "reg-erm";
  cfg.problem = "nonsense";
  CHECK_THROWS_AS(run_tail_experiment(cfg), ConfigError);
}

TEST_CASE("excess experiment") {
  ExperimentConfig cfg = small_config();
  cfg.n_list = {100, 400};
  cfg.deltas = {0.05};
  const ExcessReport r = run_excess_experiment(cfg);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[1].quantile < r.rows[0].quantile);
  CHECK(r.rows[0].rate == doctest::Approx(std::log(100 / 0.05) / 10.0));
  CHECK(r.rows[0].fitted_c == r.rows[1].fitted_c);
  CHECK(r.rows[0].fitted_c > 0.0);
  for (const auto& e : r.excess) {
    for (double x : e) CHECK(x >= 0.0);
  }

  cfg.n_list = {100};
  cfg.lambda = 0.1;
  const double low = run_excess_experiment(cfg).rows[0].quantile;
  cfg.lambda = 5.0;
  const double high = run_excess_experiment(cfg).rows[0].quantile;
  CHECK(high > low);

  cfg.problem = "linear";
  cfg.lambda.reset();
  CHECK(run_excess_experiment(cfg).rows.size() == 1);

  std::istringstream in(to_string(r.to_table(), OutputFormat::kJson));
  CHECK(ExcessReport::from_table(parse_table(in, OutputFormat::kJson, ExcessReport::schema())).rows ==
        r.rows);

  cfg.problem = "dp-majority";
  CHECK_THROWS_AS(run_excess_experiment(cfg), ConfigError);
}

TEST_CASE("bound table report") {
  ExperimentConfig cfg;
  cfg.n_list = {10000};
  cfg.deltas = {1e-3};
  cfg.gamma_rule = "inv_sqrt_n";
  const Table t = bound_table_report(cfg);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.real(0, "be02") == doctest::Approx(2.6545434937272506).epsilon(1e-12));
  CHECK(t.real(0, "fv18") == doctest::Approx(0.28910869733663126).epsilon(1e-12));
  cfg.deltas = {0.1, 0.2};
  CHECK_THROWS_AS(bound_table_report(cfg), ConfigError);
  cfg.deltas = {0.1};
  cfg.gamma_rule = "wild";
  CHECK_THROWS_AS(bound_table_report(cfg), ConfigError);
}

TEST_CASE("clamp and stability audits") {
  const ClampAuditSummary s = run_clamp_audit(25, 3);
  CHECK(s.passed());
  CHECK(s.datasets_checked > 25);
  CHECK(s.worked_shift == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(std::abs(s.worked_mean) <= 1e-12);
  CHECK(s.to_table().rows.size() == 1);

  const AuditReport a = run_stability_audits(100, 5);
  CHECK(a.violations() == 0);
  CHECK(a.rows.size() == 11);
  for (const AuditRow& r : a.rows) {
    CHECK(r.observed <= r.declared + 1e-9);
    CHECK(r.pairs > 0);
  }
  CHECK(a.rows[0].observed == doctest::Approx(0.01).epsilon(1e-12));
}
