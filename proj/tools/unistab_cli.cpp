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

// Command-line driver. Flags given on the command line override the values
// in --config; everything else falls back to the built-in defaults.

#include <cstdio>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "unistab/unistab.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitViolation = 2;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string n_list;
  std::string deltas;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::size_t> workers;
  std::optional<std::string> gamma_rule;
  std::optional<std::string> solver;
  std::optional<std::string> problem;
  std::optional<double> lambda;
  std::optional<double> epsilon;
  std::optional<std::size_t> instances;
};

template <class T>
std::vector<T> split_list(const std::string& text, const char* flag) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !(is >> std::ws).eof()) {
      throw CLI::ValidationError(flag, "cannot parse '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw CLI::ValidationError(flag, "empty list");
  return out;
}

nlohmann::json overrides(const Flags& f) {
  nlohmann::json j = nlohmann::json::object();
  if (f.seed) j["seed"] = *f.seed;
  if (f.trials) j["trials"] = *f.trials;
  if (!f.n_list.empty()) j["n"] = split_list<std::size_t>(f.n_list, "--n");
  if (!f.deltas.empty()) j["delta"] = split_list<double>(f.deltas, "--delta");
  if (f.out) j["out"] = *f.out;
  if (f.format) j["format"] = *f.format;
  if (f.workers) j["workers"] = *f.workers;
  if (f.gamma_rule) j["gamma_rule"] = *f.gamma_rule;
  if (f.solver) j["solver"] = *f.solver;
  if (f.problem) j["problem"] = *f.problem;
  if (f.lambda) j["lambda"] = *f.lambda;
  if (f.epsilon) j["epsilon"] = *f.epsilon;
  if (f.instances) j["instances"] = *f.instances;
  return j;
}

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--trials", f.trials, "Monte Carlo trials (audit: neighbor pairs)");
  cmd->add_option("--n", f.n_list, "comma-separated dataset sizes");
  cmd->add_option("--delta", f.deltas, "comma-separated failure probabilities");
  cmd->add_option("--out", f.out, "output file (default: standard output)");
  cmd->add_option("--format", f.format, "csv or json");
  cmd->add_option("--workers", f.workers, "worker threads");
}

int report_error(const char* what) {
  std::fprintf(stderr, "unistab: %s: %s\n", what, us_last_error());
  return kExitError;
}

int run(const std::string& command, const Flags& f) {
  us_config* cfg = nullptr;
  us_status st = f.config.empty() ? us_config_create(&cfg) : us_config_load(f.config.c_str(), &cfg);
  if (st != US_OK) return report_error("config");
  std::unique_ptr<us_config, void (*)(us_config*)> cfg_guard(cfg, us_config_free);

  const std::string extra = overrides(f).dump();
  if (us_config_merge_json(cfg, extra.c_str()) != US_OK) return report_error("config");

  char* cfg_json = nullptr;
  if (us_config_to_json(cfg, &cfg_json) != US_OK) return report_error("config");
  const nlohmann::json resolved = nlohmann::json::parse(cfg_json);
  us_string_free(cfg_json);

  us_report* report = nullptr;
  std::size_t violations = 0;
  if (command == "bounds") {
    st = us_run_bounds(cfg, &report);
  } else if (command == "tail") {
    st = us_run_tail(cfg, &report, &violations);
  } else if (command == "excess") {
    st = us_run_excess(cfg, &report);
  } else if (command == "clamp-audit") {
    st = us_run_clamp_audit(cfg, &report, &violations);
  } else {
    st = us_run_stability_audit(cfg, &report, &violations);
  }
  if (st != US_OK) return report_error(command.c_str());
  std::unique_ptr<us_report, void (*)(us_report*)> report_guard(report, us_report_free);

  const us_format format =
      resolved.at("format").get<std::string>() == "json" ? US_FORMAT_JSON : US_FORMAT_CSV;
  const std::string out = resolved.at("out").get<std::string>();
  if (us_report_write(report, format, out.c_str()) != US_OK) return report_error("output");

  if (violations > 0) {
    std::fprintf(stderr, "unistab: %s: %zu certificate violation(s)\n", command.c_str(), violations);
    return kExitViolation;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uniform-stability generalization bounds and experiments"};
  app.set_version_flag("--version", std::string(us_version()));
  app.require_subcommand(1);

  Flags f;
  CLI::App* bounds = app.add_subcommand("bounds", "tabulate the bounds over n");
  add_common(bounds, f);
  bounds->add_option("--gamma-rule", f.gamma_rule, "fixed:V, inv_sqrt_n or inv_n");

  CLI::App* tail = app.add_subcommand("tail", "Monte Carlo tail quantiles of the estimation error");
  CLI::App* excess = app.add_subcommand("excess", "Monte Carlo tail quantiles of the excess loss");
  for (CLI::App* cmd : {tail, excess}) {
    add_common(cmd, f);
    cmd->add_option("--problem", f.problem, "constant, mean-estimation, linear or dp-majority");
    cmd->add_option("--solver", f.solver, "reg-erm, smooth-gd or resample-sgd");
    cmd->add_option("--lambda", f.lambda, "regularization (default ln(n)/sqrt(n))");
    cmd->add_option("--epsilon", f.epsilon, "privacy parameter for dp-majority");
  }

  CLI::App* clamp = app.add_subcommand("clamp-audit", "randomized checks of the adaptive clamp");
  add_common(clamp, f);
  clamp->add_option("--instances", f.instances, "number of random instances");

  CLI::App* audit = app.add_subcommand("audit", "audit the shipped stability certificates");
  add_common(audit, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }
  for (CLI::App* cmd : {bounds, tail, excess, clamp, audit}) {
    if (cmd->parsed()) {
      try {
        return run(cmd->get_name(), f);
      } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "unistab: %s\n", e.what());
        return kExitError;
      }
    }
  }
  return kExitError;
}
