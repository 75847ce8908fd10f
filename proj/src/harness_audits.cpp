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

// Property runs for the adaptive clamp and the shipped stability certificates.

#include <algorithm>
#include <cmath>
#include <string>

#include "unistab/convexopt.hpp"
#include "unistab/core.hpp"
#include "unistab/dp_prediction.hpp"
#include "unistab/harness.hpp"
#include "unistab/reduction.hpp"
#include "unistab/rng.hpp"

namespace unistab::harness {
namespace {

constexpr double kZeroMeanTol = 1e-9;
constexpr double kStabilityTol = 1e-9;
constexpr double kBudgetTol = 1e-9;

// Random unbiased K over Z = {0, .., m-1} with declared certificate gamma.
// M(s, z) sums per-sample contributions bounded by gamma/4, optionally
// squashed through tanh, so M is (gamma/2)-stable and its unbiased
// version is gamma-stable.
struct ClampInstance {
  FiniteDistribution<int> p;
  DataDependentFunction<int> k;
  std::size_t n;
  double w;
};

ClampInstance random_instance(Stream& rng) {
  const std::size_t m = 2 + rng.uniform_index(3);
  const std::size_t n = 2 + rng.uniform_index(2);
  std::vector<int> support;
  std::vector<double> probs;
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    support.push_back(static_cast<int>(i));
    // Skewed weights make the tails of K lopsided, which is where the shift matters.
    const double u = rng.uniform(0.05, 1.0);
    probs.push_back(u * u);
    total += u * u;
  }
  for (double& q : probs) q /= total;
  FiniteDistribution<int> p(support, probs);

  const double gamma = rng.uniform(0.05, 1.0);
  std::vector<double> g(m * m);
  for (double& v : g) v = rng.uniform(-0.25, 0.25) * gamma;
  const bool squash = rng.uniform01() < 0.5;
  const double scale = rng.uniform(0.5, 3.0);
  auto eval = [g, m, squash, scale](const Dataset<int>& s, const int& z) {
    double acc = 0.0;
    for (const int si : s.elements()) {
      acc += g[static_cast<std::size_t>(si) * m + static_cast<std::size_t>(z)];
    }
    return squash ? std::tanh(scale * acc) / scale : acc;
  };
  const double reach = static_cast<double>(n) * 0.25 * gamma;
  DataDependentFunction<int> mfun(eval, Interval{-reach, reach}, 0.5 * gamma);
  DataDependentFunction<int> k = unbias(mfun, p);

  double kmax = 0.0;
  for_each_dataset(p, n, [&](const Dataset<int>& s, double) {
    for (const int z : p.support()) kmax = std::max(kmax, std::abs(k(s, z)));
  });
  const double w = std::max(rng.uniform(0.2, 0.9) * kmax, 1e-6);
  return {std::move(p), std::move(k), n, w};
}

struct InstanceCheck {
  std::size_t datasets = 0;
  double zero_mean = 0.0;
  double shift_excess = -std::numeric_limits<double>::infinity();
  double stability_excess = 0.0;
  double budget_excess = 0.0;
  double budget_ratio = 0.0;
};

InstanceCheck check_instance(const ClampInstance& inst) {
  reduction::ClampResult<int> c =
      reduction::adaptive_clamp(inst.k, inst.p, reduction::ClampSpec{inst.w}, inst.n);
  InstanceCheck out;
  for_each_dataset(inst.p, inst.n, [&](const Dataset<int>& s, double) {
    ++out.datasets;
    const double mean = inst.p.expect([&](const int& z) { return c.clamped(s, z); });
    out.zero_mean = std::max(out.zero_mean, std::abs(mean));
    out.shift_excess = std::max(out.shift_excess, std::abs(c.shift(s)) - inst.w);
  });
  const StabilityAudit before = audit_stability_exhaustive(inst.k, inst.p, inst.n);
  const StabilityAudit after = audit_stability_exhaustive(c.clamped, inst.p, inst.n);
  out.stability_excess = after.observed - before.observed;
  const reduction::ClampBudget<int> budget = reduction::clamp_budget(inst.k, inst.p, inst.n, inst.w);
  out.budget_excess = c.clamp_error_mean.value - 4.0 * budget.beta();
  if (budget.beta() > 0.0) out.budget_ratio = c.clamp_error_mean.value / (4.0 * budget.beta());
  return out;
}

}  // namespace

ClampAuditSummary run_clamp_audit(std::size_t instances, std::uint64_t seed) {
  ClampAuditSummary sum;
  sum.instances = instances;
  sum.max_shift_excess = -std::numeric_limits<double>::infinity();
  sum.max_stability_excess = -std::numeric_limits<double>::infinity();
  sum.max_budget_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < instances; ++i) {
    Stream rng(derive_seed(seed, i));
    const InstanceCheck r = check_instance(random_instance(rng));
    sum.datasets_checked += r.datasets;
    sum.max_zero_mean = std::max(sum.max_zero_mean, r.zero_mean);
    sum.max_shift_excess = std::max(sum.max_shift_excess, r.shift_excess);
    sum.max_stability_excess = std::max(sum.max_stability_excess, r.stability_excess);
    sum.max_budget_excess = std::max(sum.max_budget_excess, r.budget_excess);
    sum.max_budget_ratio = std::max(sum.max_budget_ratio, r.budget_ratio);
    if (r.zero_mean > kZeroMeanTol || r.shift_excess > 0.0 ||
        r.stability_excess > kStabilityTol || r.budget_excess > kBudgetTol) {
      ++sum.failures;
    }
  }

  // K = 2 w.p. 1/4 and -2/3 w.p. 3/4 (independent of s), w = 1.
  const FiniteDistribution<int> p({0, 1}, {0.25, 0.75});
  const DataDependentFunction<int> k([](const Dataset<int>&, const int& z) { return z == 0 ? 2.0 : -2.0 / 3.0; },
                                     Interval{-2.0 / 3.0, 2.0}, 0.0, /*unbiased=*/true);
  const reduction::ClampResult<int> c = reduction::adaptive_clamp(k, p, reduction::ClampSpec{1.0}, 1);
  const Dataset<int> s({0});
  sum.worked_shift = c.shift(s);
  sum.worked_mean = p.expect([&](const int& z) { return c.clamped(s, z); });
  if (std::abs(sum.worked_shift - 0.5) > 1e-9 || std::abs(sum.worked_mean) > 1e-12) ++sum.failures;
  return sum;
}

Table ClampAuditSummary::to_table() const {
  return Table{{{"instances", ColumnType::kUInt},
                {"datasets_checked", ColumnType::kUInt},
                {"max_zero_mean", ColumnType::kReal},
                {"max_shift_excess", ColumnType::kReal},
                {"max_stability_excess", ColumnType::kReal},
                {"max_budget_excess", ColumnType::kReal},
                {"max_budget_ratio", ColumnType::kReal},
                {"worked_shift", ColumnType::kReal},
                {"worked_mean", ColumnType::kReal},
                {"failures", ColumnType::kUInt},
                {"passed", ColumnType::kBool}},
               {{static_cast<std::uint64_t>(instances), static_cast<std::uint64_t>(datasets_checked),
                 max_zero_mean, max_shift_excess, max_stability_excess, max_budget_excess, max_budget_ratio,
                 worked_shift, worked_mean, static_cast<std::uint64_t>(failures), passed()}}};
}

namespace {

using convexopt::Vec;
using convexopt::VecDataset;
using convexopt::VecDistribution;

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

AuditRow to_row(std::string name, std::size_t n, const StabilityAudit& a) {
  return {std::move(name), n, a.declared, a.observed, a.pairs, a.violated()};
}

// The certificate of a solver run does not depend on the data, so it is read
// off one representative dataset.
template <class Solve>
DataDependentFunction<Vec> solver_loss(std::shared_ptr<const convexopt::LossFamily> loss,
                                       Solve solve, double certificate) {
  return DataDependentFunction<Vec>(
      [loss, solve](const VecDataset& s, const Vec& z) { return loss->eval(solve(s), z); },
      Interval{0.0, 1.0}, certificate);
}

}  // namespace

AuditReport run_stability_audits(std::size_t trials, std::uint64_t seed) {
  AuditReport report;

  {
    const auto p = FiniteDistribution<int>::uniform({0, 1, 2});
    const std::size_t n = 5;
    const DataDependentFunction<int> count(
        [](const Dataset<int>& s, const int& z) {
          return 0.01 * static_cast<double>(std::count(s.elements().begin(), s.elements().end(), z));
        },
        Interval{0.0, 0.01 * n}, 0.01);
    report.rows.push_back(to_row("count", n, audit_stability_exhaustive(count, p, n)));
    report.rows.push_back(to_row("count-unbiased", n, audit_stability_exhaustive(unbias(count, p), p, n)));
  }

  {
    auto loss = std::make_shared<const convexopt::QuadraticLoss>(2);
    const VecDistribution p({vec2(0.6, 0.0), vec2(-0.3, 0.5), vec2(0.0, -0.9), vec2(0.7, 0.7)},
                            {0.4, 0.3, 0.2, 0.1});
    const std::size_t n = 50;
    const double lambda = 0.1;
    auto solve = [loss, lambda](const VecDataset& s) { return convexopt::reg_erm(*loss, s, lambda).w; };
    Stream rng(derive_seed(seed, 1));
    const double cert = convexopt::reg_erm(*loss, p.sample_dataset(n, rng), lambda).certificate;
    report.rows.push_back(to_row("reg-erm-quadratic", n,
                                 audit_stability(solver_loss(loss, solve, cert), p, n, trials,
                                                 derive_seed(seed, 2))));
  }

  {
    auto loss = std::make_shared<const convexopt::LogisticLoss>(2);
    const VecDistribution p({vec3(0.8, 0.1, 1.0), vec3(-0.5, 0.5, -1.0), vec3(0.2, -0.9, 1.0),
                             vec3(-0.6, -0.6, -1.0), vec3(0.3, 0.3, -1.0)},
                            {0.3, 0.25, 0.2, 0.15, 0.1});
    const std::size_t n = 40;
    convexopt::PsgdParams params;
    params.kind = convexopt::ScheduleKind::kFullGd;
    params.steps_or_passes = 25;
    params.eta = 1.0;
    const std::uint64_t run_seed = derive_seed(seed, 3);
    const Vec w0 = Vec::Zero(2);
    auto solve = [loss, params, run_seed, w0](const VecDataset& s) {
      return convexopt::psgd(*loss, s, w0, params, run_seed).solve.w;
    };
    Stream rng(derive_seed(seed, 4));
    const double cert =
        convexopt::psgd(*loss, p.sample_dataset(n, rng), w0, params, run_seed).realized_certificate;
    report.rows.push_back(to_row("pgd-full-gd-logistic", n,
                                 audit_stability(solver_loss(loss, solve, cert), p, n, trials,
                                                 derive_seed(seed, 5))));
  }

  {
    auto loss = std::make_shared<const convexopt::QuadraticLoss>(1);
    std::vector<Vec> support;
    for (int k = -4; k <= 4; ++k) support.push_back(Vec::Constant(1, k / 4.0));
    const VecDistribution p = VecDistribution::uniform(std::move(support));
    const std::size_t n = 1000;
    const convexopt::PsgdParams params = convexopt::smooth_gd_preset(n, loss->smoothness());
    const std::uint64_t run_seed = derive_seed(seed, 6);
    const Vec w0 = Vec::Zero(1);
    auto solve = [loss, params, run_seed, w0](const VecDataset& s) {
      return convexopt::psgd(*loss, s, w0, params, run_seed).solve.w;
    };
    Stream rng(derive_seed(seed, 7));
    const double cert =
        convexopt::psgd(*loss, p.sample_dataset(n, rng), w0, params, run_seed).realized_certificate;
    report.rows.push_back(to_row("smooth-gd-quadratic", n,
                                 audit_stability(solver_loss(loss, solve, cert), p, n,
                                                 std::max<std::size_t>(1, trials / 10),
                                                 derive_seed(seed, 8))));
  }

  {
    const FiniteDistribution<dp::LabeledPoint> p({{0.0, 0}, {0.0, 1}, {1.0, 1}}, {0.5, 0.3, 0.2});
    const DataDependentFunction<dp::LabeledPoint> m = dp::expected_loss_function(dp::DPPredictor(0.1));
    for (std::size_t n = 1; n <= 6; ++n) {
      report.rows.push_back(to_row("dp-expected-loss", n, audit_stability_exhaustive(m, p, n)));
    }
  }
  return report;
}

std::size_t AuditReport::violations() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const AuditRow& r) { return r.violated; }));
}

Table AuditReport::to_table() const {
  Table t{{{"function", ColumnType::kText},
           {"n", ColumnType::kUInt},
           {"declared", ColumnType::kReal},
           {"observed", ColumnType::kReal},
           {"pairs", ColumnType::kUInt},
           {"violated", ColumnType::kBool}},
          {}};
  for (const AuditRow& r : rows) t.rows.push_back({r.function, r.n, r.declared, r.observed, r.pairs, r.violated});
  return t;
}

}  // namespace unistab::harness
