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

#include "unistab/convexopt.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

#include "unistab/format.hpp"
#include "unistab/rng.hpp"

namespace unistab::convexopt {
namespace {

const double kLogOnePlusE = std::log1p(std::exp(1.0));

void check_dim(const Vec& v, std::size_t dim, const char* what) {
  if (static_cast<std::size_t>(v.size()) != dim) {
    throw std::invalid_argument(std::string(what) + " has dimension " + std::to_string(v.size()) +
                                ", expected " + std::to_string(dim));
  }
}

Vec dataset_mean(const VecDataset& s) {
  Vec acc = Vec::Zero(s[0].size());
  for (const Vec& z : s.elements()) acc += z;
  return acc / static_cast<double>(s.size());
}

Vec distribution_mean(const VecDistribution& p) {
  Vec acc = Vec::Zero(p.point(0).size());
  for (std::size_t j = 0; j < p.size(); ++j) acc += p.prob(j) * p.point(j);
  return acc;
}

// Accelerated projected gradient on G(w) = F_s(w) + (lambda/2)||w||^2 with
// strong convexity mu >= 0 and smoothness L. Stops on the gradient mapping.
SolveResult accelerated_pg(const LossFamily& f, const VecDataset& s, double lambda,
                           const Ball& body, const ErmOptions& opts) {
  const double sigma = f.smoothness();
  if (!std::isfinite(sigma)) {
    throw std::invalid_argument("iterative ERM needs a smooth loss family");
  }
  const double mu = lambda + f.strong_convexity();
  const double L = std::max(sigma + lambda, 1e-12);
  auto grad = [&](const Vec& w) -> Vec { return empirical_gradient(f, s, w) + lambda * w; };

  Vec x = Vec::Zero(static_cast<Eigen::Index>(f.dim()));
  Vec y = x;
  double t = 1.0;
  const double q = mu / L;
  const double momentum_sc = (1.0 - std::sqrt(q)) / (1.0 + std::sqrt(q));
  double residual = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
    const Vec g = grad(x);
    const Vec step = body.project(x - g / L);
    residual = L * (x - step).norm();
    if (residual <= opts.tol) {
      return {step, empirical_loss(f, s, step), 0.0, it};
    }
    const Vec x_next = body.project(y - grad(y) / L);
    double beta;
    if (mu > 0.0) {
      beta = momentum_sc;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      beta = (t - 1.0) / t_next;
      t = t_next;
    }
    y = x_next + beta * (x_next - x);
    x = x_next;
  }
  throw ConvergenceError("regularized ERM did not reach gradient-mapping norm " +
                             format_double(opts.tol) + " within " +
                             std::to_string(opts.max_iterations) + " iterations (last " +
                             format_double(residual) + ")",
                         opts.max_iterations, residual);
}

}  // namespace

Ball::Ball(double radius) : radius_(radius) {
  if (!(radius > 0.0 && radius <= 1.0)) {
    throw std::invalid_argument("ball radius must lie in (0, 1]");
  }
}

Vec Ball::project(const Vec& v) const {
  const double norm = v.norm();
  if (norm <= radius_) return v;
  return v * (radius_ / norm);
}

bool Ball::contains(const Vec& v, double tol) const { return v.norm() <= radius_ + tol; }

double QuadraticLoss::eval(const Vec& w, const Vec& z) const {
  return 0.25 * (w - z).squaredNorm();
}

Vec QuadraticLoss::grad(const Vec& w, const Vec& z) const { return 0.5 * (w - z); }

std::optional<Vec> QuadraticLoss::population_minimizer(const VecDistribution& p,
                                                       const Ball& body) const {
  return body.project(distribution_mean(p));
}

std::optional<Vec> QuadraticLoss::regularized_minimizer(const VecDataset& s, double lambda,
                                                        const Ball& body) const {
  // (w - mean)/2 + lambda w = 0; the objective is isotropic so projecting the
  // unconstrained minimizer is exact.
  return body.project(dataset_mean(s) / (1.0 + 2.0 * lambda));
}

double LinearLoss::eval(const Vec& w, const Vec& z) const { return 0.5 * (1.0 + w.dot(z)); }

Vec LinearLoss::grad(const Vec&, const Vec& z) const { return 0.5 * z; }

std::optional<Vec> LinearLoss::population_minimizer(const VecDistribution& p,
                                                    const Ball& body) const {
  const Vec mu = distribution_mean(p);
  const double norm = mu.norm();
  if (norm == 0.0) return Vec::Zero(mu.size());
  return Vec(-body.radius() / norm * mu);
}

std::optional<Vec> LinearLoss::regularized_minimizer(const VecDataset& s, double lambda,
                                                     const Ball& body) const {
  const Vec mean = dataset_mean(s);
  if (lambda > 0.0) return body.project(-mean / (2.0 * lambda));
  const double norm = mean.norm();
  if (norm == 0.0) return Vec::Zero(mean.size());
  return Vec(-body.radius() / norm * mean);
}

double LogisticLoss::eval(const Vec& w, const Vec& z) const {
  check_dim(z, dim_ + 1, "logistic sample");
  const double y = z[static_cast<Eigen::Index>(dim_)];
  const double margin = y * w.dot(z.head(static_cast<Eigen::Index>(dim_)));
  // log(1 + exp(-m)) without overflow
  const double v = margin > 0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
  return v / kLogOnePlusE;
}

Vec LogisticLoss::grad(const Vec& w, const Vec& z) const {
  check_dim(z, dim_ + 1, "logistic sample");
  const Vec x = z.head(static_cast<Eigen::Index>(dim_));
  const double y = z[static_cast<Eigen::Index>(dim_)];
  const double margin = y * w.dot(x);
  const double sig = 1.0 / (1.0 + std::exp(margin));  // sigmoid(-margin)
  return (-y * sig / kLogOnePlusE) * x;
}

double LogisticLoss::lipschitz() const { return 1.0 / kLogOnePlusE; }
double LogisticLoss::smoothness() const { return 0.25 / kLogOnePlusE; }

SmoothedAbsLoss::SmoothedAbsLoss(double sigma) : sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("smoothing parameter must be positive");
  }
}

double SmoothedAbsLoss::eval(const Vec& w, const Vec& z) const {
  const double u = std::abs(w[0] - z[0]);
  if (u <= 0.5 / sigma_) return 0.5 * sigma_ * u * u;
  return 0.5 * u - 0.125 / sigma_;
}

Vec SmoothedAbsLoss::grad(const Vec& w, const Vec& z) const {
  const double u = w[0] - z[0];
  Vec g(1);
  g[0] = std::clamp(sigma_ * u, -0.5, 0.5);
  return g;
}

double empirical_loss(const LossFamily& f, const VecDataset& s, const Vec& w) {
  double acc = 0.0;
  for (const Vec& z : s.elements()) acc += f.eval(w, z);
  return acc / static_cast<double>(s.size());
}

Vec empirical_gradient(const LossFamily& f, const VecDataset& s, const Vec& w) {
  Vec acc = Vec::Zero(w.size());
  for (const Vec& z : s.elements()) acc += f.grad(w, z);
  return acc / static_cast<double>(s.size());
}

double population_loss(const LossFamily& f, const VecDistribution& p, const Vec& w) {
  return p.expect([&](const Vec& z) { return f.eval(w, z); });
}

RateSchedule::RateSchedule(std::size_t n, std::vector<std::vector<RateEntry>> steps)
    : n_(n), steps_(std::move(steps)) {
  if (n_ == 0) throw std::invalid_argument("rate schedule needs n >= 1");
  std::vector<double> columns(n_, 0.0);
  per_step_l1_.reserve(steps_.size());
  for (std::size_t t = 0; t < steps_.size(); ++t) {
    double l1 = 0.0;
    for (const RateEntry& e : steps_[t]) {
      if (e.index >= n_) {
        throw std::invalid_argument("rate entry at step " + std::to_string(t) +
                                    " references sample " + std::to_string(e.index));
      }
      if (!(e.eta >= 0.0) || !std::isfinite(e.eta)) {
        throw std::invalid_argument("rates must be finite and nonnegative (step " +
                                    std::to_string(t) + ")");
      }
      l1 += e.eta;
      columns[e.index] += e.eta;
    }
    per_step_l1_.push_back(l1);
  }
  one_inf_norm_ = *std::max_element(columns.begin(), columns.end());
}

std::vector<double> RateSchedule::column_sums() const {
  std::vector<double> columns(n_, 0.0);
  for (const auto& step : steps_) {
    for (const RateEntry& e : step) columns[e.index] += e.eta;
  }
  return columns;
}

void RateSchedule::write_csv(std::ostream& out) const {
  out << "t,i,eta\n";
  for (std::size_t t = 0; t < steps_.size(); ++t) {
    for (const RateEntry& e : steps_[t]) {
      if (e.eta == 0.0) continue;
      out << t << ',' << e.index << ',' << format_double(e.eta) << '\n';
    }
  }
}

RateSchedule RateSchedule::read_csv(std::istream& in, std::size_t n, std::size_t steps) {
  std::string line;
  if (!std::getline(in, line) || line != "t,i,eta") {
    throw std::invalid_argument("schedule CSV must start with header 't,i,eta'");
  }
  std::vector<std::vector<RateEntry>> rows(steps);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::size_t t = 0;
    std::size_t i = 0;
    double eta = 0.0;
    char c1 = 0;
    char c2 = 0;
    if (!(fields >> t >> c1 >> i >> c2 >> eta) || c1 != ',' || c2 != ',' || t >= steps) {
      throw std::invalid_argument("bad schedule CSV line " + std::to_string(lineno) + ": '" +
                                  line + "'");
    }
    rows[t].push_back({i, eta});
  }
  return RateSchedule(n, std::move(rows));
}

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kFullGd:
      return "full_gd";
    case ScheduleKind::kShuffle:
      return "shuffle";
    case ScheduleKind::kWithReplacement:
      return "with_replacement";
  }
  return "unknown";
}

ScheduleKind parse_schedule_kind(std::string_view text) {
  if (text == "full_gd") return ScheduleKind::kFullGd;
  if (text == "shuffle") return ScheduleKind::kShuffle;
  if (text == "with_replacement") return ScheduleKind::kWithReplacement;
  throw std::invalid_argument("unknown schedule kind '" + std::string(text) + "'");
}

RateSchedule make_schedule(ScheduleKind kind, std::size_t n, std::size_t steps_or_passes,
                           std::size_t k, double eta, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("schedule needs n >= 1");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("rate eta must be positive");
  if (kind != ScheduleKind::kFullGd && (k == 0 || k > n)) {
    throw std::invalid_argument("batch size must satisfy 1 <= k <= n");
  }
  Stream stream(seed);
  std::vector<std::vector<RateEntry>> steps;
  switch (kind) {
    case ScheduleKind::kFullGd: {
      const double rate = eta / static_cast<double>(n);
      std::vector<RateEntry> row;
      row.reserve(n);
      for (std::size_t i = 0; i < n; ++i) row.push_back({i, rate});
      steps.assign(steps_or_passes, row);
      break;
    }
    case ScheduleKind::kShuffle: {
      const double rate = eta / static_cast<double>(k);
      std::vector<std::size_t> perm(n);
      for (std::size_t pass = 0; pass < steps_or_passes; ++pass) {
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        stream.shuffle(std::span<std::size_t>(perm));
        for (std::size_t start = 0; start < n; start += k) {
          std::vector<RateEntry> row;
          for (std::size_t i = start; i < std::min(n, start + k); ++i) row.push_back({perm[i], rate});
          steps.push_back(std::move(row));
        }
      }
      break;
    }
    case ScheduleKind::kWithReplacement: {
      const double rate = eta / static_cast<double>(k);
      std::vector<std::size_t> pool(n);
      for (std::size_t t = 0; t < steps_or_passes; ++t) {
        // Partial Fisher-Yates: the first k entries are a uniform k-subset.
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<RateEntry> row;
        row.reserve(k);
        for (std::size_t j = 0; j < k; ++j) {
          const std::size_t pick = j + stream.uniform_index(n - j);
          std::swap(pool[j], pool[pick]);
          row.push_back({pool[j], rate});
        }
        steps.push_back(std::move(row));
      }
      break;
    }
  }
  return RateSchedule(n, std::move(steps));
}

double binomial_upper_tail(std::size_t trials, double p, std::size_t m) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial p must lie in [0,1]");
  if (m == 0) return 1.0;
  if (m > trials) return 0.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  const double T = static_cast<double>(trials);
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  // Sum the smaller side exactly in log space.
  double tail = 0.0;
  for (std::size_t j = m; j <= trials; ++j) {
    const double x = static_cast<double>(j);
    const double log_pmf = std::lgamma(T + 1.0) - std::lgamma(x + 1.0) - std::lgamma(T - x + 1.0) +
                           x * log_p + (T - x) * log_q;
    const double term = std::exp(log_pmf);
    tail += term;
    if (x > T * p && term < tail * 1e-18) break;
  }
  return std::min(1.0, tail);
}

double replacement_rate_tail(std::size_t steps, std::size_t k, std::size_t n, double eta,
                             double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
  if (n == 0 || k == 0 || k > n) throw std::invalid_argument("need 1 <= k <= n");
  if (!(eta > 0.0)) throw std::invalid_argument("rate eta must be positive");
  const double p = static_cast<double>(k) / static_cast<double>(n);
  const double nn = static_cast<double>(n);
  std::size_t m = 0;
  while (m < steps && nn * binomial_upper_tail(steps, p, m) > beta) ++m;
  return eta / static_cast<double>(k) * static_cast<double>(m);
}

SolveResult pgd(const LossFamily& f, const VecDataset& s, const Vec& w0,
                const RateSchedule& schedule, const Ball& body) {
  const double sigma = f.smoothness();
  if (!std::isfinite(sigma)) {
    throw std::invalid_argument("pgd requires a smooth loss family (finite sigma)");
  }
  if (schedule.n() != s.size()) {
    throw std::invalid_argument("schedule is for n = " + std::to_string(schedule.n()) +
                                " samples, dataset has " + std::to_string(s.size()));
  }
  check_dim(w0, f.dim(), "initial point");
  if (sigma > 0.0) {
    const double cap = 2.0 / sigma;
    const auto& l1 = schedule.per_step_l1();
    for (std::size_t t = 0; t < l1.size(); ++t) {
      if (l1[t] > cap * (1.0 + 1e-12)) {
        throw std::invalid_argument("step " + std::to_string(t) + " has ||beta_t||_1 = " +
                                    format_double(l1[t]) + " > 2/sigma = " + format_double(cap));
      }
    }
  }
  Vec w = body.project(w0);
  for (std::size_t t = 0; t < schedule.steps(); ++t) {
    Vec step = Vec::Zero(w.size());
    for (const RateEntry& e : schedule.step(t)) {
      if (e.eta != 0.0) step += e.eta * f.grad(w, s[e.index]);
    }
    w = body.project(w - step);
  }
  const double lip = f.lipschitz();
  return {w, empirical_loss(f, s, w), 2.0 * lip * lip * schedule.one_inf_norm(), schedule.steps()};
}

double erm_certificate(double lipschitz, double lambda, double lambda0, std::size_t n) {
  const double strong = lambda + lambda0;
  if (!(strong > 0.0) || n == 0) {
    throw std::invalid_argument("reg_erm needs lambda > 0 or a strongly convex loss family");
  }
  return 4.0 * lipschitz * lipschitz / (strong * static_cast<double>(n));
}

SolveResult reg_erm(const LossFamily& f, const VecDataset& s, double lambda, const Ball& body,
                    const ErmOptions& opts) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("regularization lambda must be finite and nonnegative");
  }
  const double certificate = erm_certificate(f.lipschitz(), lambda, f.strong_convexity(), s.size());
  if (auto w = f.regularized_minimizer(s, lambda, body)) {
    return {*w, empirical_loss(f, s, *w), certificate, 0};
  }
  SolveResult r = accelerated_pg(f, s, lambda, body, opts);
  r.certificate = certificate;
  return r;
}

Vec empirical_minimizer(const LossFamily& f, const VecDataset& s, const Ball& body,
                        const ErmOptions& opts) {
  if (auto w = f.regularized_minimizer(s, 0.0, body)) return *w;
  return accelerated_pg(f, s, 0.0, body, opts).w;
}

PsgdResult psgd(const LossFamily& f, const VecDataset& s, const Vec& w0, const PsgdParams& params,
                std::uint64_t seed, const Ball& body) {
  RateSchedule schedule = make_schedule(params.kind, s.size(), params.steps_or_passes,
                                        params.batch, params.eta, seed);
  SolveResult solve = pgd(f, s, w0, schedule, body);
  const double lip2 = f.lipschitz() * f.lipschitz();
  const double n = static_cast<double>(s.size());
  double zeta = 0.0;
  switch (params.kind) {
    case ScheduleKind::kFullGd:
      zeta = static_cast<double>(params.steps_or_passes) * params.eta / n;
      break;
    case ScheduleKind::kShuffle:
      zeta = static_cast<double>(params.steps_or_passes) * params.eta /
             static_cast<double>(params.batch);
      break;
    case ScheduleKind::kWithReplacement:
      zeta = replacement_rate_tail(params.steps_or_passes, params.batch, s.size(), params.eta,
                                   params.beta);
      break;
  }
  const double realized = solve.certificate;
  return PsgdResult{std::move(solve), std::move(schedule), realized, 2.0 * lip2 * zeta};
}

PsgdParams smooth_gd_preset(std::size_t n, double sigma) {
  if (n < 2) throw std::invalid_argument("smooth-gd preset needs n >= 2");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("smooth-gd preset needs a finite positive sigma");
  }
  const double nn = static_cast<double>(n);
  // The small offset keeps exact integers from rounding down.
  const double steps = std::floor(sigma * std::sqrt(nn) / std::log(nn) + 1e-9);
  return {ScheduleKind::kFullGd, static_cast<std::size_t>(steps), n, 1.0 / sigma, 0.01};
}

PsgdParams resample_sgd_preset(std::size_t n) {
  if (n < 1) throw std::invalid_argument("resample-sgd preset needs n >= 1");
  return {ScheduleKind::kWithReplacement, n, 1, 1.0 / std::sqrt(static_cast<double>(n)), 0.01};
}

MoreauEnvelope::MoreauEnvelope(std::function<double(double)> f, double sigma, double lipschitz)
    : f_(std::move(f)), sigma_(sigma), lipschitz_(lipschitz) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("Moreau smoothing needs sigma > 0");
  }
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) {
    throw std::invalid_argument("Moreau smoothing needs a positive Lipschitz constant");
  }
}

double MoreauEnvelope::prox(double w) const {
  double lo = w - lipschitz_ / sigma_;
  double hi = w + lipschitz_ / sigma_;
  auto objective = [&](double v) { return f_(v) + 0.5 * sigma_ * (w - v) * (w - v); };
  for (int it = 0; it < 400 && hi - lo > 1e-13; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (objective(m1) <= objective(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return 0.5 * (lo + hi);
}

double MoreauEnvelope::operator()(double w) const {
  const double v = prox(w);
  return f_(v) + 0.5 * sigma_ * (w - v) * (w - v);
}

double MoreauEnvelope::derivative(double w) const { return sigma_ * (w - prox(w)); }

MoreauEnvelope moreau_smooth(std::function<double(double)> f, double sigma, double lipschitz) {
  return MoreauEnvelope(std::move(f), sigma, lipschitz);
}

double excess_loss(const LossFamily& f, const VecDistribution& p, const Vec& w, const Ball& body) {
  const std::optional<Vec> best = f.population_minimizer(p, body);
  if (!best) {
    throw std::invalid_argument("excess_loss: loss family '" + std::string(f.name()) +
                                "' has no closed-form population minimizer");
  }
  return std::max(0.0, population_loss(f, p, w) - population_loss(f, p, *best));
}

}  // namespace unistab::convexopt
