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

#ifndef UNISTAB_CONVEXOPT_HPP_
#define UNISTAB_CONVEXOPT_HPP_

// Stability-certified convex solvers: regularized ERM, projected gradient
// descent with arbitrary per-sample rate schedules, and projected SGD with
// shuffled or with-replacement batches. Certificates use the Lipschitz
// constant of the loss family: 4 L^2 / ((lambda + lambda0) n) for ERM and
// 2 L^2 ||beta||_{1,inf} for PGD.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "unistab/core.hpp"

namespace unistab::convexopt {

using Vec = Eigen::VectorXd;
using VecDataset = Dataset<Vec>;
using VecDistribution = FiniteDistribution<Vec>;

// Raised when an iterative solver hits its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::size_t iterations, double residual)
      : std::runtime_error(what), iterations_(iterations), residual_(residual) {}
  std::size_t iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  std::size_t iterations_;
  double residual_;
};

// Euclidean ball of radius <= 1 centered at the origin.
class Ball {
 public:
  explicit Ball(double radius = 1.0);
  double radius() const { return radius_; }
  Vec project(const Vec& v) const;
  bool contains(const Vec& v, double tol = 1e-12) const;

 private:
  double radius_;
};

// Family of convex losses l(., z) with range [0, 1] over the unit ball.
class LossFamily {
 public:
  virtual ~LossFamily() = default;

  virtual std::string_view name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual double eval(const Vec& w, const Vec& z) const = 0;
  virtual Vec grad(const Vec& w, const Vec& z) const = 0;
  virtual double lipschitz() const = 0;
  // +infinity for nonsmooth losses.
  virtual double smoothness() const = 0;
  virtual double strong_convexity() const { return 0.0; }

  // argmin over the body of F_P(w) = E_{z~P} l(w, z), when known in closed
  // form. Required by excess_loss.
  virtual std::optional<Vec> population_minimizer(const VecDistribution&, const Ball&) const {
    return std::nullopt;
  }
  // argmin over the body of F_s(w) + (lambda/2)||w||^2, when known in closed form.
  virtual std::optional<Vec> regularized_minimizer(const VecDataset&, double /*lambda*/,
                                                   const Ball&) const {
    return std::nullopt;
  }
};

// l(w, z) = ||w - z||^2 / 4. Lipschitz 1, smoothness 1/2, strongly convex 1/2.
class QuadraticLoss final : public LossFamily {
 public:
  explicit QuadraticLoss(std::size_t dim) : dim_(dim) {}
  std::string_view name() const override { return "quadratic"; }
  std::size_t dim() const override { return dim_; }
  double eval(const Vec& w, const Vec& z) const override;
  Vec grad(const Vec& w, const Vec& z) const override;
  double lipschitz() const override { return 1.0; }
  double smoothness() const override { return 0.5; }
  double strong_convexity() const override { return 0.5; }
  std::optional<Vec> population_minimizer(const VecDistribution& p, const Ball& body) const override;
  std::optional<Vec> regularized_minimizer(const VecDataset& s, double lambda,
                                           const Ball& body) const override;

 private:
  std::size_t dim_;
};

// l(w, z) = (1 + <w, z>) / 2. Lipschitz 1/2, smoothness 0.
class LinearLoss final : public LossFamily {
 public:
  explicit LinearLoss(std::size_t dim) : dim_(dim) {}
  std::string_view name() const override { return "linear"; }
  std::size_t dim() const override { return dim_; }
  double eval(const Vec& w, const Vec& z) const override;
  Vec grad(const Vec& w, const Vec& z) const override;
  double lipschitz() const override { return 0.5; }
  double smoothness() const override { return 0.0; }
  std::optional<Vec> population_minimizer(const VecDistribution& p, const Ball& body) const override;
  std::optional<Vec> regularized_minimizer(const VecDataset& s, double lambda,
                                           const Ball& body) const override;

 private:
  std::size_t dim_;
};

// Normalized logistic loss. z = (x, y) packs a feature vector x of size
// dim with a label y in {-1, +1} in the last coordinate;
// l(w, z) = ln(1 + exp(-y <w, x>)) / ln(1 + e).
class LogisticLoss final : public LossFamily {
 public:
  explicit LogisticLoss(std::size_t dim) : dim_(dim) {}
  std::string_view name() const override { return "logistic"; }
  std::size_t dim() const override { return dim_; }
  double eval(const Vec& w, const Vec& z) const override;
  Vec grad(const Vec& w, const Vec& z) const override;
  double lipschitz() const override;
  double smoothness() const override;

 private:
  std::size_t dim_;
};

// One-dimensional Huber loss: Moreau envelope of |w - z| / 2 with parameter
// sigma, in closed form.
class SmoothedAbsLoss final : public LossFamily {
 public:
  explicit SmoothedAbsLoss(double sigma);
  std::string_view name() const override { return "smoothed_abs"; }
  std::size_t dim() const override { return 1; }
  double eval(const Vec& w, const Vec& z) const override;
  Vec grad(const Vec& w, const Vec& z) const override;
  double lipschitz() const override { return 0.5; }
  double smoothness() const override { return sigma_; }

 private:
  double sigma_;
};

double empirical_loss(const LossFamily& f, const VecDataset& s, const Vec& w);
Vec empirical_gradient(const LossFamily& f, const VecDataset& s, const Vec& w);
double population_loss(const LossFamily& f, const VecDistribution& p, const Vec& w);

struct RateEntry {
  std::size_t index = 0;
  double eta = 0.0;
};

// T x n matrix of nonnegative per-step per-sample rates, stored sparsely.
class RateSchedule {
 public:
  RateSchedule(std::size_t n, std::vector<std::vector<RateEntry>> steps);

  std::size_t n() const { return n_; }
  std::size_t steps() const { return steps_.size(); }
  std::span<const RateEntry> step(std::size_t t) const { return steps_.at(t); }
  // ||beta_t||_1 for every step.
  const std::vector<double>& per_step_l1() const { return per_step_l1_; }
  std::vector<double> column_sums() const;
  // max_i sum_t eta_{t,i}
  double one_inf_norm() const { return one_inf_norm_; }

  // Rows "t,i,eta" after a header line; zero entries are omitted.
  void write_csv(std::ostream& out) const;
  static RateSchedule read_csv(std::istream& in, std::size_t n, std::size_t steps);

 private:
  std::size_t n_;
  std::vector<std::vector<RateEntry>> steps_;
  std::vector<double> per_step_l1_;
  double one_inf_norm_ = 0.0;
};

enum class ScheduleKind { kFullGd, kShuffle, kWithReplacement };

std::string_view to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(std::string_view text);

// full_gd: `steps_or_passes` steps with eta/n on every sample.
// shuffle: `steps_or_passes` passes; each pass partitions a fresh uniform
//   permutation into consecutive batches of size k (the last may be short),
//   in-batch rate eta/k.
// with_replacement: `steps_or_passes` steps, each an independent uniform
//   k-subset, in-batch rate eta/k.
RateSchedule make_schedule(ScheduleKind kind, std::size_t n, std::size_t steps_or_passes,
                           std::size_t k, double eta, std::uint64_t seed);

// Exact upper tail P[Binomial(trials, p) >= m].
double binomial_upper_tail(std::size_t trials, double p, std::size_t m);

// Smallest zeta = (eta/k) m with n P[Binomial(T, k/n) >= m] <= beta, capped at
// m = T since no column can exceed T occurrences.
double replacement_rate_tail(std::size_t steps, std::size_t k, std::size_t n, double eta,
                             double beta);

struct SolveResult {
  Vec w;
  double empirical_loss = 0.0;
  double certificate = 0.0;  // uniform stability of z -> l(w_s, z)
  std::size_t iterations = 0;
};

// Runs w_{t+1} = proj(w_t - sum_i eta_{t,i} grad l(w_t, s_i)) and returns w_T.
// Requires finite smoothness and ||beta_t||_1 <= 2/sigma for every step.
SolveResult pgd(const LossFamily& f, const VecDataset& s, const Vec& w0,
                const RateSchedule& schedule, const Ball& body = Ball());

struct ErmOptions {
  double tol = 1e-9;  // gradient-mapping norm
  std::size_t max_iterations = 1'000'000;
};

// 4 L^2 / ((lambda + lambda0) n): stability of the regularized minimizer for
// an L-Lipschitz, lambda0-strongly convex family.
double erm_certificate(double lipschitz, double lambda, double lambda0, std::size_t n);

// argmin over the body of F_s(w) + (lambda/2)||w||^2.
SolveResult reg_erm(const LossFamily& f, const VecDataset& s, double lambda,
                    const Ball& body = Ball(), const ErmOptions& opts = {});

// Minimizer of F_s over the body; closed form when the family provides one.
Vec empirical_minimizer(const LossFamily& f, const VecDataset& s, const Ball& body = Ball(),
                        const ErmOptions& opts = {});

struct PsgdParams {
  ScheduleKind kind = ScheduleKind::kWithReplacement;
  std::size_t steps_or_passes = 1;
  std::size_t batch = 1;
  double eta = 0.1;
  double beta = 0.01;  // failure probability for the high-probability certificate
};

struct PsgdResult {
  SolveResult solve;  // solve.certificate is the realized certificate
  RateSchedule schedule;
  double realized_certificate = 0.0;       // 2 L^2 ||beta||_{1,inf} of the drawn schedule
  double high_probability_certificate = 0.0;  // holds with probability >= 1 - beta
};

PsgdResult psgd(const LossFamily& f, const VecDataset& s, const Vec& w0, const PsgdParams& params,
                std::uint64_t seed, const Ball& body = Ball());

// Full gradient descent, eta = 1/sigma, T = floor(sigma sqrt(n) / ln n).
PsgdParams smooth_gd_preset(std::size_t n, double sigma);
// Batch size 1 with replacement, T = n, eta = 1/sqrt(T).
PsgdParams resample_sgd_preset(std::size_t n);

// Moreau envelope of a convex Lipschitz function of one variable:
// f~(w) = min_v f(v) + (sigma/2)(w - v)^2. The minimizer lies within
// lipschitz/sigma of w, which bounds the ternary search.
class MoreauEnvelope {
 public:
  MoreauEnvelope(std::function<double(double)> f, double sigma, double lipschitz = 1.0);

  double operator()(double w) const;
  double prox(double w) const;
  // f~'(w) = sigma (w - prox(w))
  double derivative(double w) const;
  double sigma() const { return sigma_; }

 private:
  std::function<double(double)> f_;
  double sigma_;
  double lipschitz_;
};

MoreauEnvelope moreau_smooth(std::function<double(double)> f, double sigma, double lipschitz = 1.0);

// F_P(w) - min over the body of F_P. Throws std::invalid_argument for loss
// families without a closed-form population minimizer.
double excess_loss(const LossFamily& f, const VecDistribution& p, const Vec& w,
                   const Ball& body = Ball());

}  // namespace unistab::convexopt

#endif  // UNISTAB_CONVEXOPT_HPP_
