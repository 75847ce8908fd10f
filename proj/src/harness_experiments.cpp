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

// Monte Carlo tail and excess-loss experiments.

#include <algorithm>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

#include "unistab/bounds.hpp"
#include "unistab/convexopt.hpp"
#include "unistab/core.hpp"
#include "unistab/dp_prediction.hpp"
#include "unistab/harness.hpp"
#include "unistab/rng.hpp"

namespace unistab::harness {
namespace {

using convexopt::Vec;
using convexopt::VecDataset;
using convexopt::VecDistribution;

struct TrialOutcome {
  double error = 0.0;   // estimation error of M(s, .) on its own dataset
  double excess = 0.0;  // population excess loss of the solution (NaN if unsupported)
  double gamma = 0.0;   // stability certificate in force for this trial
};

class Problem {
 public:
  virtual ~Problem() = default;
  virtual TrialOutcome run_trial(std::size_t n, Stream& stream) const = 0;
  virtual bool supports_excess() const { return false; }
};

class ConstantProblem final : public Problem {
 public:
  TrialOutcome run_trial(std::size_t n, Stream& stream) const override {
    const auto p = FiniteDistribution<int>::uniform({0, 1, 2, 3});
    const DataDependentFunction<int> m([](const Dataset<int>&, const int&) { return 0.5; },
                                       Interval{0.0, 1.0}, 0.0);
    const Dataset<int> s = p.sample_dataset(n, stream);
    return {estimation_error(m, s, p), std::nan(""), 0.0};
  }
};

Vec scalar(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

Vec pair(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// Uniform over 21 equally spaced points in [-0.5, 1]. The mean is 0.25, away
// from the origin, so regularization has a visible bias.
VecDistribution grid_distribution() {
  std::vector<Vec> support;
  for (int k = 0; k <= 20; ++k) support.push_back(scalar(-0.5 + 0.075 * k));
  return VecDistribution::uniform(std::move(support));
}

VecDistribution linear_distribution() {
  return VecDistribution({pair(0.8, 0.2), pair(-0.2, 0.6), pair(0.5, -0.5), pair(0.3, 0.1)},
                         {0.4, 0.2, 0.2, 0.2});
}

// M(s, z) = loss(w_s, z) where w_s is the output of the configured solver.
class ConvexProblem final : public Problem {
 public:
  ConvexProblem(std::unique_ptr<convexopt::LossFamily> loss, VecDistribution p,
                std::string solver, std::optional<double> lambda)
      : loss_(std::move(loss)), p_(std::move(p)), solver_(std::move(solver)), lambda_(lambda) {
    if (solver_ != "reg-erm" && solver_ != "smooth-gd" && solver_ != "resample-sgd") {
      throw ConfigError("unknown solver '" + solver_ +
                        "' (expected reg-erm, smooth-gd or resample-sgd)");
    }
  }

  bool supports_excess() const override { return true; }

  TrialOutcome run_trial(std::size_t n, Stream& stream) const override {
    const VecDataset s = p_.sample_dataset(n, stream);
    const Vec w0 = Vec::Zero(static_cast<Eigen::Index>(loss_->dim()));
    Vec w;
    double gamma = 0.0;
    const double nn = static_cast<double>(n);
    if (solver_ == "reg-erm") {
      const double lambda = lambda_ ? *lambda_ : std::log(nn) / std::sqrt(nn);
      const convexopt::SolveResult r = convexopt::reg_erm(*loss_, s, lambda);
      w = r.w;
      gamma = r.certificate;
    } else if (solver_ == "smooth-gd") {
      const convexopt::PsgdParams params = convexopt::smooth_gd_preset(n, loss_->smoothness());
      const convexopt::PsgdResult r = convexopt::psgd(*loss_, s, w0, params, stream());
      w = r.solve.w;
      gamma = r.high_probability_certificate;
    } else {
      const convexopt::PsgdParams params = convexopt::resample_sgd_preset(n);
      const convexopt::PsgdResult r = convexopt::psgd(*loss_, s, w0, params, stream());
      w = r.solve.w;
      gamma = r.high_probability_certificate;
    }
    const double error =
        std::abs(convexopt::population_loss(*loss_, p_, w) - convexopt::empirical_loss(*loss_, s, w));
    return {error, convexopt::excess_loss(*loss_, p_, w), gamma};
  }

 private:
  std::unique_ptr<convexopt::LossFamily> loss_;
  VecDistribution p_;
  std::string solver_;
  std::optional<double> lambda_;
};

class DpMajorityProblem final : public Problem {
 public:
  explicit DpMajorityProblem(double epsilon)
      : p_({{0.0, 1}, {0.0, 0}}, {0.3, 0.7}),
        m_(dp::expected_loss_function(dp::DPPredictor(epsilon))) {}

  TrialOutcome run_trial(std::size_t n, Stream& stream) const override {
    const Dataset<dp::LabeledPoint> s = p_.sample_dataset(n, stream);
    return {estimation_error(m_, s, p_), std::nan(""), m_.stability()};
  }

 private:
  FiniteDistribution<dp::LabeledPoint> p_;
  DataDependentFunction<dp::LabeledPoint> m_;
};

std::unique_ptr<Problem> make_problem(const ExperimentConfig& cfg) {
  if (cfg.problem == "constant") return std::make_unique<ConstantProblem>();
  if (cfg.problem == "mean-estimation") {
    return std::make_unique<ConvexProblem>(std::make_unique<convexopt::QuadraticLoss>(1),
                                           grid_distribution(), cfg.solver, cfg.lambda);
  }
  if (cfg.problem == "linear") {
    return std::make_unique<ConvexProblem>(std::make_unique<convexopt::LinearLoss>(2),
                                           linear_distribution(), cfg.solver, cfg.lambda);
  }
  if (cfg.problem == "dp-majority") return std::make_unique<DpMajorityProblem>(cfg.epsilon);
  throw ConfigError("unknown problem '" + cfg.problem +
                    "' (expected constant, mean-estimation, linear or dp-majority)");
}

std::vector<TrialOutcome> run_trials(const Problem& problem, const ExperimentConfig& cfg,
                                     std::size_t n) {
  std::vector<TrialOutcome> out(cfg.trials);
  parallel_for(cfg.trials, cfg.workers, [&](std::size_t j) {
    Stream stream(trial_seed(cfg.seed, n, j));
    out[j] = problem.run_trial(n, stream);
  });
  return out;
}

const std::vector<Column> kTailSchema = {
    {"n", ColumnType::kUInt},       {"delta", ColumnType::kReal}, {"quantile", ColumnType::kReal},
    {"be02", ColumnType::kReal},    {"fv18", ColumnType::kReal},  {"main", ColumnType::kReal},
    {"main_vacuous", ColumnType::kBool}, {"trials", ColumnType::kUInt}, {"seed", ColumnType::kUInt}};

const std::vector<Column> kExcessSchema = {
    {"n", ColumnType::kUInt},        {"delta", ColumnType::kReal},  {"quantile", ColumnType::kReal},
    {"rate", ColumnType::kReal},     {"fitted_c", ColumnType::kReal}, {"trials", ColumnType::kUInt},
    {"seed", ColumnType::kUInt}};

template <class T>
const T& cell_as(const Cell& c) {
  return std::get<T>(c);
}

}  // namespace

double upper_quantile(const std::vector<double>& sorted, double delta) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  const double m = static_cast<double>(sorted.size());
  // The small offset keeps exact products such as 0.99 * 2000 from rounding up.
  double k = std::ceil((1.0 - delta) * m - 1e-9);
  k = std::clamp(k, 1.0, m);
  return sorted[static_cast<std::size_t>(k) - 1];
}

void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  workers = std::min(workers, count);
  std::mutex mu;
  std::size_t failed_index = count;
  std::exception_ptr failure;
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        for (std::size_t i = w; i < count; i += workers) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (i < failed_index) {
              failed_index = i;
              failure = std::current_exception();
            }
            return;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t n, std::size_t trial) {
  return derive_seed(derive_seed(master, n), trial);
}

TailReport run_tail_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::unique_ptr<Problem> problem = make_problem(cfg);
  TailReport report;
  for (std::size_t n : cfg.n_list) {
    const std::vector<TrialOutcome> outcomes = run_trials(*problem, cfg, n);
    std::vector<double> errors;
    errors.reserve(outcomes.size());
    double gamma = 0.0;
    for (const TrialOutcome& o : outcomes) {
      errors.push_back(o.error);
      gamma = std::max(gamma, o.gamma);
    }
    std::sort(errors.begin(), errors.end());
    const double m = static_cast<double>(errors.size());
    for (double delta : cfg.deltas) {
      bounds::BoundParams p;
      p.n = static_cast<double>(n);
      p.gamma = gamma;
      p.delta = delta;
      const bounds::BoundValue main = bounds::main_bound(p);
      const double exceed = static_cast<double>(std::count_if(
                                errors.begin(), errors.end(),
                                [&](double e) { return e >= main.value; })) /
                            m;
      report.rows.push_back({n, delta, upper_quantile(errors, delta), bounds::be02_bound(p).value,
                             bounds::fv18_bound(p).value, main.value, main.vacuous(1.0),
                             cfg.trials, cfg.seed});
      report.diagnostics.push_back(
          {gamma, exceed, std::sqrt(delta * (1.0 - delta) / m), main.valid});
    }
    report.errors.push_back(std::move(errors));
  }
  return report;
}

ExcessReport run_excess_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::unique_ptr<Problem> problem = make_problem(cfg);
  if (!problem->supports_excess()) {
    throw ConfigError("problem '" + cfg.problem + "' has no analytic excess loss");
  }
  ExcessReport report;
  for (std::size_t n : cfg.n_list) {
    const std::vector<TrialOutcome> outcomes = run_trials(*problem, cfg, n);
    std::vector<double> excess;
    excess.reserve(outcomes.size());
    for (const TrialOutcome& o : outcomes) excess.push_back(o.excess);
    std::sort(excess.begin(), excess.end());
    const double nn = static_cast<double>(n);
    for (double delta : cfg.deltas) {
      report.rows.push_back({n, delta, upper_quantile(excess, delta),
                             std::log(nn / delta) / std::sqrt(nn), 0.0, cfg.trials, cfg.seed});
    }
    report.excess.push_back(std::move(excess));
  }
  double num = 0.0;
  double den = 0.0;
  for (const ExcessRow& r : report.rows) {
    num += r.quantile * r.rate;
    den += r.rate * r.rate;
  }
  const double c = den > 0.0 ? num / den : 0.0;
  for (ExcessRow& r : report.rows) r.fitted_c = c;
  return report;
}

const std::vector<Column>& TailReport::schema() { return kTailSchema; }

Table TailReport::to_table() const {
  Table t{kTailSchema, {}};
  for (const TailRow& r : rows) {
    t.rows.push_back({r.n, r.delta, r.quantile, r.be02, r.fv18, r.main, r.main_vacuous, r.trials,
                      r.seed});
  }
  return t;
}

TailReport TailReport::from_table(const Table& table) {
  TailReport report;
  for (const auto& c : table.rows) {
    report.rows.push_back({cell_as<std::uint64_t>(c[0]), cell_as<double>(c[1]),
                           cell_as<double>(c[2]), cell_as<double>(c[3]), cell_as<double>(c[4]),
                           cell_as<double>(c[5]), cell_as<bool>(c[6]),
                           cell_as<std::uint64_t>(c[7]), cell_as<std::uint64_t>(c[8])});
  }
  return report;
}

std::size_t TailReport::soundness_violations() const {
  std::size_t bad = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const TailDiagnostics& d = diagnostics.at(k);
    if (!d.main_valid || rows[k].main_vacuous) continue;
    if (d.exceed_freq > rows[k].delta + 3.0 * d.exceed_stderr) ++bad;
  }
  return bad;
}

const std::vector<Column>& ExcessReport::schema() { return kExcessSchema; }

Table ExcessReport::to_table() const {
  Table t{kExcessSchema, {}};
  for (const ExcessRow& r : rows) {
    t.rows.push_back({r.n, r.delta, r.quantile, r.rate, r.fitted_c, r.trials, r.seed});
  }
  return t;
}

ExcessReport ExcessReport::from_table(const Table& table) {
  ExcessReport report;
  for (const auto& c : table.rows) {
    report.rows.push_back({cell_as<std::uint64_t>(c[0]), cell_as<double>(c[1]),
                           cell_as<double>(c[2]), cell_as<double>(c[3]), cell_as<double>(c[4]),
                           cell_as<std::uint64_t>(c[5]), cell_as<std::uint64_t>(c[6])});
  }
  return report;
}

Table bound_table_report(const ExperimentConfig& cfg) {
  if (cfg.deltas.size() != 1) throw ConfigError("bounds takes exactly one delta");
  cfg.validate();
  bounds::GammaRule rule;
  try {
    rule = bounds::GammaRule::parse(cfg.gamma_rule);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::vector<double> ns(cfg.n_list.begin(), cfg.n_list.end());
  Table t{{{"n", ColumnType::kReal},
           {"gamma", ColumnType::kReal},
           {"delta", ColumnType::kReal},
           {"be02", ColumnType::kReal},
           {"fv18", ColumnType::kReal},
           {"main", ColumnType::kReal},
           {"thm_large", ColumnType::kReal},
           {"thm_large_valid", ColumnType::kBool},
           {"thm_small", ColumnType::kReal},
           {"thm_small_valid", ColumnType::kBool}},
          {}};
  for (const bounds::BoundRow& r : bounds::bound_table(ns, rule, cfg.deltas.front())) {
    t.rows.push_back({r.n, r.gamma, r.delta, r.be02, r.fv18, r.main, r.thm_large,
                      r.thm_large_valid, r.thm_small, r.thm_small_valid});
  }
  return t;
}

}  // namespace unistab::harness
