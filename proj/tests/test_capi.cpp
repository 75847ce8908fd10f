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
#include <cstdlib>
#include <string>

#include "doctest.h"
#include "unistab/unistab.h"

TEST_CASE("bound evaluation through the C API") {
  double v = 0.0;
  int valid = -1;
  REQUIRE(us_bound_eval(US_BOUND_BE02, 1e4, 1.0, 0.01, 1e-3, &v, &valid) == US_OK);
  CHECK(v == doctest::Approx(2.6545434937272506).epsilon(1e-12));
  CHECK(valid == 1);
  REQUIRE(us_bound_eval(US_BOUND_MAIN, 1e4, 1.0, 1e-4, 0.01, &v, nullptr) == US_OK);
  CHECK(v == doctest::Approx(1.4880940927901566).epsilon(1e-12));
  REQUIRE(us_bound_eval(US_BOUND_THM_LARGE, 1e4, 1.0, 1e-9, 0.01, &v, &valid) == US_OK);
  CHECK(valid == 0);
  REQUIRE(us_mcdiarmid_tail(100, 0.1, 0.5, &v) == US_OK);
  CHECK(v == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  REQUIRE(us_dp_generalization_bound(1e4, 1e-4, 0.01, &v, &valid) == US_OK);
  CHECK(v == doctest::Approx(1.4881660521465906).epsilon(1e-12));
  REQUIRE(us_replacement_rate_tail(100, 1, 100, 0.1, 0.01, &v) == US_OK);
  CHECK(v == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("errors become status codes with a message") {
  double v = 0.0;
  CHECK(us_bound_eval(US_BOUND_MAIN, 100, 1.0, 0.1, 2.0, &v, nullptr) == US_INVALID_ARGUMENT);
  CHECK(std::string(us_last_error()).find("delta") != std::string::npos);
  CHECK(us_bound_eval(static_cast<us_bound_kind>(99), 100, 1, 0.1, 0.1, &v, nullptr) ==
        US_INVALID_ARGUMENT);
  CHECK(us_mcdiarmid_tail(100, 0.1, 0.5, nullptr) == US_INVALID_ARGUMENT);
  CHECK(us_mcdiarmid_tail(100, 0.1, 0.5, &v) == US_OK);
  CHECK(std::string(us_last_error()).empty());

  us_config* cfg = nullptr;
  CHECK(us_config_from_json(R"({"bogus": 1})", &cfg) == US_CONFIG_ERROR);
  CHECK(cfg == nullptr);
  CHECK(us_config_load("/nonexistent/unistab.json", &cfg) == US_IO_ERROR);
}

TEST_CASE("config and runs through the C API") {
  us_config* cfg = nullptr;
  REQUIRE(us_config_create(&cfg) == US_OK);
  REQUIRE(us_config_merge_json(cfg, R"({"n": [40, 80], "trials": 100, "delta": [0.1], "seed": 9})") ==
          US_OK);
  // A rejected merge leaves the config unchanged.
  CHECK(us_config_merge_json(cfg, R"({"trials": 5, "nope": 1})") == US_CONFIG_ERROR);
  char* json = nullptr;
  REQUIRE(us_config_to_json(cfg, &json) == US_OK);
  CHECK(std::string(json).find("\"trials\": 100") != std::string::npos);
  us_string_free(json);

  us_report* rep = nullptr;
  std::size_t violations = 99;
  REQUIRE(us_run_tail(cfg, &rep, &violations) == US_OK);
  CHECK(violations == 0);
  CHECK(us_report_rows(rep) == 2);
  CHECK(us_report_columns(rep) == 9);
  CHECK(std::string(us_report_column_name(rep, 2)) == "quantile");
  CHECK(us_report_column_name(rep, 9) == nullptr);
  double n = 0.0;
  REQUIRE(us_report_get_double(rep, 1, 0, &n) == US_OK);
  CHECK(n == 80.0);
  CHECK(us_report_get_double(rep, 5, 0, &n) == US_OUT_OF_RANGE);
  char* csv = nullptr;
  REQUIRE(us_report_to_string(rep, US_FORMAT_CSV, &csv) == US_OK);
  CHECK(std::string(csv).rfind("n,delta,quantile,be02,fv18,main,main_vacuous,trials,seed\n40,", 0) == 0);
  us_string_free(csv);
  us_report_free(rep);

  REQUIRE(us_run_excess(cfg, &rep) == US_OK);
  CHECK(us_report_rows(rep) == 2);
  us_report_free(rep);

  REQUIRE(us_config_merge_json(cfg, R"({"n": [100, 1000], "gamma_rule": "inv_n"})") == US_OK);
  REQUIRE(us_run_bounds(cfg, &rep) == US_OK);
  CHECK(us_report_rows(rep) == 2);
  us_report_free(rep);

  REQUIRE(us_config_merge_json(cfg, R"({"instances": 5})") == US_OK);
  REQUIRE(us_run_clamp_audit(cfg, &rep, &violations) == US_OK);
  CHECK(violations == 0);
  us_report_free(rep);

  REQUIRE(us_config_merge_json(cfg, R"({"trials": 20})") == US_OK);
  REQUIRE(us_run_stability_audit(cfg, &rep, &violations) == US_OK);
  CHECK(violations == 0);
  CHECK(us_report_get_double(rep, 0, 0, &n) == US_INVALID_ARGUMENT);  // text column
  us_report_free(rep);

  REQUIRE(us_config_merge_json(cfg, R"({"problem": "dp-majority"})") == US_OK);
  CHECK(us_run_excess(cfg, &rep) == US_CONFIG_ERROR);
  us_config_free(cfg);
  us_config_free(nullptr);
  us_report_free(nullptr);
  CHECK(std::string(us_version()).size() > 0);
}
