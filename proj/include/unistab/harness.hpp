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

#ifndef UNISTAB_HARNESS_HPP_
#define UNISTAB_HARNESS_HPP_

// Experiment configuration, Monte Carlo tail and excess-loss experiments,
// stability and clamping audits, and report emission.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace unistab::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { kCsv, kJson };

std::string_view to_string(OutputFormat format);
OutputFormat parse_format(std::string_view text);

// Flat configuration. JSON keys mirror the CLI flags: problem, n, trials,
// delta, seed, solver, lambda, epsilon, workers, out, format, gamma_rule,
// instances.
struct ExperimentConfig {
  std::string problem = "mean-estimation";  // constant | mean-estimation | linear | dp-majority
  std::vector<std::size_t> n_list = {100};
  std::size_t trials = 1000;
  std::vector<double> deltas = {0.01};
  std::uint64_t seed = 1;
  std::string solver = "reg-erm";  // reg-erm | smooth-gd | resample-sgd
  std::optional<double> lambda;    // reg-erm; ln(n)/sqrt(n) when unset
  double epsilon = 0.5;            // dp-majority
  std::size_t workers = 1;
  std::string out;  // empty: standard output
  OutputFormat format = OutputFormat::kCsv;
  std::string gamma_rule = "inv_sqrt_n";  // bounds
  std::size_t instances = 200;            // clamp-audit

  // Throws ConfigError.
  void validate() const;

  std::string to_json() const;
  // Unknown keys and mistyped values raise ConfigError.
  static ExperimentConfig from_json(std::string_view json);
  static ExperimentConfig load(const std::string& path);
  // Overwrites only the keys present in `json`.
  void merge_json(std::string_view json);

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Column-typed table used for every report.
enum class ColumnType { kUInt, kReal, kBool, kText };

struct Column {
  std::string name;
  ColumnType type;

  friend bool operator==(const Column&, const Column&) = default;
};

using Cell = std::variant<std::uint64_t, double, bool, std::string>;

struct Table {
  std::vector<Column> columns;
  std::vector<std::vector<Cell>> rows;

  std::size_t column_index(std::string_view name) const;
  double real(std::size_t row, std::string_view column) const;

  friend bool operator==(const Table&, const Table&) = default;
};

// CSV: header line, one line per row, reals with 17 significant digits,
// booleans as 0/1. JSON: an array of flat objects with the same keys in the
// same order.
void write_csv(std::ostream& out, const Table& table);
void write_json(std::ostream& out, const Table& table);
std::string to_string(const Table& table, OutputFormat format);
// Writes to `path`, or to standard output when `path` is empty.
void emit(const Table& table, OutputFormat format, const std::string& path);
Table parse_table(std::istream& in, OutputFormat format, const std::vector<Column>& schema);

struct TailRow {
  std::uint64_t n = 0;
  double delta = 0.0;
  double quantile = 0.0;  // order statistic ceil((1 - delta) m) of the errors
  double be02 = 0.0;
  double fv18 = 0.0;
  double main = 0.0;
  bool main_vacuous = false;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const TailRow&, const TailRow&) = default;
};

// Per-row statistics that are not part of the emitted schema.
struct TailDiagnostics {
  double gamma = 0.0;          // certificate used for the bounds
  double exceed_freq = 0.0;    // fraction of trials with error >= main bound
  double exceed_stderr = 0.0;  // sqrt(delta (1 - delta) / m)
  bool main_valid = false;
};

struct TailReport {
  std::vector<TailRow> rows;
  std::vector<TailDiagnostics> diagnostics;   // parallel to rows
  std::vector<std::vector<double>> errors;    // sorted errors, one list per n

  Table to_table() const;
  static TailReport from_table(const Table& table);
  static const std::vector<Column>& schema();
  // Rows whose main bound is valid and non-vacuous yet exceeded more often
  // than delta + 3 standard errors.
  std::size_t soundness_violations() const;
};

struct ExcessRow {
  std::uint64_t n = 0;
  double delta = 0.0;
  double quantile = 0.0;
  double rate = 0.0;      // ln(n/delta)/sqrt(n)
  double fitted_c = 0.0;  // least-squares c for quantile ~ c * rate over the report
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const ExcessRow&, const ExcessRow&) = default;
};

struct ExcessReport {
  std::vector<ExcessRow> rows;
  std::vector<std::vector<double>> excess;  // sorted, one list per n

  Table to_table() const;
  static ExcessReport from_table(const Table& table);
  static const std::vector<Column>& schema();
};

// Index ceil((1 - delta) m) (1-based) of the sorted sample.
double upper_quantile(const std::vector<double>& sorted, double delta);

// Runs body(i) for i in [0, count) on `workers` threads. Rethrows the
// exception of the lowest failing index.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body);

// Seed of trial j at dataset size n.
std::uint64_t trial_seed(std::uint64_t master, std::size_t n, std::size_t trial);

TailReport run_tail_experiment(const ExperimentConfig& cfg);
ExcessReport run_excess_experiment(const ExperimentConfig& cfg);

Table bound_table_report(const ExperimentConfig& cfg);

struct ClampAuditSummary {
  std::size_t instances = 0;
  std::size_t datasets_checked = 0;
  double max_zero_mean = 0.0;         // max |E_z K~(s,z)|
  double max_shift_excess = 0.0;      // max (|b_s| - w)
  double max_stability_excess = 0.0;  // max (audit(K~) - audit(K)), both exhaustive
  double max_budget_excess = 0.0;     // max (E|K~ - K| - 4 beta)
  double max_budget_ratio = 0.0;      // max E|K~ - K| / (4 beta) over clipping instances
  double worked_shift = 0.0;          // b for K in {2, -2/3} w.p. {1/4, 3/4}, w = 1
  double worked_mean = 0.0;
  std::size_t failures = 0;

  bool passed() const { return failures == 0; }
  Table to_table() const;
};

ClampAuditSummary run_clamp_audit(std::size_t instances, std::uint64_t seed);

struct AuditRow {
  std::string function;
  std::uint64_t n = 0;
  double declared = 0.0;
  double observed = 0.0;
  std::uint64_t pairs = 0;
  bool violated = false;
};

struct AuditReport {
  std::vector<AuditRow> rows;

  std::size_t violations() const;
  Table to_table() const;
};

// Certificate audits for every shipped data-dependent function.
AuditReport run_stability_audits(std::size_t trials, std::uint64_t seed);

}  // namespace unistab::harness

#endif  // UNISTAB_HARNESS_HPP_
