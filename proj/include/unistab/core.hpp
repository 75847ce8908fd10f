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

#ifndef UNISTAB_CORE_HPP_
#define UNISTAB_CORE_HPP_

// Datasets, finite distributions and data-dependent functions M(s, z) with
// declared uniform-stability certificates, plus the estimation-error and
// leave-one-out quantities defined over them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "unistab/rng.hpp"

namespace unistab {

// Ordered n-tuple of domain points, n >= 1.
template <class Z>
class Dataset {
 public:
  explicit Dataset(std::vector<Z> elements) : elements_(std::move(elements)) {
    if (elements_.empty()) {
      throw std::invalid_argument("dataset must contain at least one point");
    }
  }

  std::size_t size() const { return elements_.size(); }
  const Z& operator[](std::size_t i) const { return elements_[i]; }
  std::span<const Z> elements() const { return elements_; }

  // s^{i <- z}
  Dataset replace(std::size_t i, Z z) const {
    if (i >= elements_.size()) {
      throw std::out_of_range("replace index " + std::to_string(i) +
                              " out of range for dataset of size " +
                              std::to_string(elements_.size()));
    }
    Dataset out = *this;
    out.elements_[i] = std::move(z);
    return out;
  }

 private:
  std::vector<Z> elements_;
};

// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  // Largest absolute value in the interval.
  double magnitude() const { return std::max(std::abs(lo), std::abs(hi)); }
  bool contains(double x, double tol = 0.0) const {
    return x >= lo - tol && x <= hi + tol;
  }
};

inline constexpr double kProbabilitySumTolerance = 1e-12;

// Probability vector over a finite support.
template <class Z>
class FiniteDistribution {
 public:
  FiniteDistribution(std::vector<Z> support, std::vector<double> probs)
      : support_(std::move(support)), probs_(std::move(probs)) {
    if (support_.empty() || support_.size() != probs_.size()) {
      throw std::invalid_argument(
          "distribution needs a nonempty support with one probability per point");
    }
    double total = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw std::invalid_argument("probabilities must be finite and nonnegative");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > kProbabilitySumTolerance) {
      throw std::invalid_argument("probabilities sum to " + std::to_string(total) +
                                  ", expected 1");
    }
    cumulative_.reserve(probs_.size());
    double acc = 0.0;
    for (double p : probs_) {
      acc += p;
      cumulative_.push_back(acc);
    }
  }

  static FiniteDistribution uniform(std::vector<Z> support) {
    const std::size_t m = support.size();
    if (m == 0) throw std::invalid_argument("uniform distribution over empty support");
    return FiniteDistribution(std::move(support), std::vector<double>(m, 1.0 / m));
  }

  static FiniteDistribution point_mass(Z z) {
    return FiniteDistribution({std::move(z)}, {1.0});
  }

  std::size_t size() const { return support_.size(); }
  std::span<const Z> support() const { return support_; }
  std::span<const double> probs() const { return probs_; }
  const Z& point(std::size_t j) const { return support_[j]; }
  double prob(std::size_t j) const { return probs_[j]; }

  // Exact sum over the support of P(z) f(z).
  template <class F>
  double expect(F&& f) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < support_.size(); ++j) {
      if (probs_[j] != 0.0) acc += probs_[j] * f(support_[j]);
    }
    return acc;
  }

  std::size_t sample_index(Stream& stream) const {
    const double u = stream.uniform01() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    std::size_t j = static_cast<std::size_t>(it - cumulative_.begin());
    if (j >= support_.size()) j = support_.size() - 1;
    // Skip zero-probability points that share a cumulative value.
    while (probs_[j] == 0.0 && j + 1 < support_.size()) ++j;
    return j;
  }

  const Z& sample(Stream& stream) const { return support_[sample_index(stream)]; }

  Dataset<Z> sample_dataset(std::size_t n, Stream& stream) const {
    std::vector<Z> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample(stream));
    return Dataset<Z>(std::move(out));
  }

 private:
  std::vector<Z> support_;
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

// M(s, z) together with its declared range and uniform-stability certificate.
// The certificate is a claim to be audited (see audit_stability), not
// something this type derives.
template <class Z>
class DataDependentFunction {
 public:
  using Evaluator = std::function<double(const Dataset<Z>&, const Z&)>;

  DataDependentFunction(Evaluator evaluator, Interval range, double stability,
                        bool unbiased = false)
      : evaluator_(std::make_shared<const Evaluator>(std::move(evaluator))),
        range_(range),
        stability_(stability),
        unbiased_(unbiased) {
    if (!(stability >= 0.0)) {
      throw std::invalid_argument("stability certificate must be nonnegative");
    }
    if (!(range.lo <= range.hi)) {
      throw std::invalid_argument("range must satisfy lo <= hi");
    }
  }

  double operator()(const Dataset<Z>& s, const Z& z) const { return (*evaluator_)(s, z); }

  const Interval& range() const { return range_; }
  double stability() const { return stability_; }
  bool unbiased() const { return unbiased_; }

 private:
  std::shared_ptr<const Evaluator> evaluator_;
  Interval range_;
  double stability_;
  bool unbiased_;
};

struct ExpectationEstimate {
  enum class Method { kAnalytic, kMonteCarlo };

  double value = 0.0;
  double std_error = 0.0;  // 0 for analytic estimates
  Method method = Method::kAnalytic;
  std::size_t samples = 0;  // Monte Carlo draws; 0 for analytic

  static ExpectationEstimate analytic(double v) { return {v, 0.0, Method::kAnalytic, 0}; }
};

// 𝓔_s[M(s)] = (1/n) sum_i M(s, s_i)
template <class Z>
double empirical_mean(const DataDependentFunction<Z>& m, const Dataset<Z>& s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += m(s, s[i]);
  return acc / static_cast<double>(s.size());
}

// E_{z~P}[M(s, z)], exact over the finite support.
template <class Z>
ExpectationEstimate true_mean(const DataDependentFunction<Z>& m, const Dataset<Z>& s,
                              const FiniteDistribution<Z>& p) {
  return ExpectationEstimate::analytic(p.expect([&](const Z& z) { return m(s, z); }));
}

// Δ_s(M) = |E_P[M(s)] - 𝓔_s[M(s)]|
template <class Z>
double estimation_error(const DataDependentFunction<Z>& m, const Dataset<Z>& s,
                        const FiniteDistribution<Z>& p) {
  return std::abs(true_mean(m, s, p).value - empirical_mean(m, s));
}

// L(s, z) = M(s, z) - E_{z'~P}[M(s, z')]. Unbiased by construction; the
// certificate doubles and the range widens to [lo - hi, hi - lo].
template <class Z>
DataDependentFunction<Z> unbias(const DataDependentFunction<Z>& m,
                                const FiniteDistribution<Z>& p) {
  const double width = m.range().width();
  return DataDependentFunction<Z>(
      [m, p](const Dataset<Z>& s, const Z& z) {
        return m(s, z) - p.expect([&](const Z& zp) { return m(s, zp); });
      },
      Interval{-width, width}, 2.0 * m.stability(), /*unbiased=*/true);
}

// (1/n) sum_i L(s^{i <- z}, s_i)
template <class Z>
double loo_error(const DataDependentFunction<Z>& l, const Dataset<Z>& s, const Z& z) {
  if (!l.unbiased()) {
    throw std::invalid_argument("leave-one-out error requires an unbiased function");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += l(s.replace(i, z), s[i]);
  return acc / static_cast<double>(s.size());
}

// Calls visit(dataset, weight) for every s in support^n with weight P^n(s),
// including zero-weight tuples.
template <class Z, class Visit>
void for_each_dataset(const FiniteDistribution<Z>& p, std::size_t n, Visit&& visit) {
  const std::size_t m = p.size();
  std::vector<std::size_t> idx(n, 0);
  std::vector<Z> elems(n, p.point(0));
  while (true) {
    double weight = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      weight *= p.prob(idx[i]);
      elems[i] = p.point(idx[i]);
    }
    visit(Dataset<Z>(elems), weight);
    std::size_t pos = 0;
    while (pos < n && ++idx[pos] == m) {
      idx[pos] = 0;
      ++pos;
    }
    if (pos == n) break;
  }
}

// Number of datasets in support^n, saturating at SIZE_MAX.
inline std::size_t dataset_count(std::size_t support_size, std::size_t n) {
  std::size_t count = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (support_size != 0 && count > std::numeric_limits<std::size_t>::max() / support_size) {
      return std::numeric_limits<std::size_t>::max();
    }
    count *= support_size;
  }
  return count;
}

struct DatasetExpectationOptions {
  std::size_t exact_limit = 1'000'000;  // enumerate when m^n <= this
  std::size_t mc_draws = 10'000;
  std::uint64_t seed = 0;
};

// E_{s~P^n}[f(s)]: exact by enumeration when feasible, Monte Carlo otherwise.
template <class Z, class F>
ExpectationEstimate expect_over_datasets(const FiniteDistribution<Z>& p, std::size_t n,
                                         F&& f, const DatasetExpectationOptions& opts = {}) {
  if (dataset_count(p.size(), n) <= opts.exact_limit) {
    double acc = 0.0;
    for_each_dataset(p, n, [&](const Dataset<Z>& s, double w) {
      if (w != 0.0) acc += w * f(s);
    });
    return ExpectationEstimate::analytic(acc);
  }
  if (opts.mc_draws < 2) throw std::invalid_argument("Monte Carlo needs at least 2 draws");
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t j = 0; j < opts.mc_draws; ++j) {
    Stream stream(derive_seed(opts.seed, j));
    const double x = f(p.sample_dataset(n, stream));
    const double d = x - mean;
    mean += d / static_cast<double>(j + 1);
    m2 += d * (x - mean);
  }
  const double var = m2 / static_cast<double>(opts.mc_draws - 1);
  return {mean, std::sqrt(var / static_cast<double>(opts.mc_draws)),
          ExpectationEstimate::Method::kMonteCarlo, opts.mc_draws};
}

inline constexpr double kCertificateSlack = 1e-9;

struct StabilityAudit {
  double observed = 0.0;  // max |M(s,z) - M(s',z)| over examined neighbors
  double declared = 0.0;
  std::size_t pairs = 0;

  bool violated() const { return observed > declared + kCertificateSlack; }
};

// Randomized lower bound on the true uniform stability: for each trial draw
// s ~ P^n, an index i and a replacement s' ~ P, and take the sup over the
// whole support of |M(s,z) - M(s^{i<-s'},z)|.
template <class Z>
StabilityAudit audit_stability(const DataDependentFunction<Z>& m,
                               const FiniteDistribution<Z>& p, std::size_t n,
                               std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("audit needs at least one trial");
  StabilityAudit audit{0.0, m.stability(), 0};
  for (std::size_t t = 0; t < trials; ++t) {
    Stream stream(derive_seed(seed, t));
    const Dataset<Z> s = p.sample_dataset(n, stream);
    const std::size_t i = stream.uniform_index(n);
    const Dataset<Z> s2 = s.replace(i, p.sample(stream));
    for (const Z& z : p.support()) {
      audit.observed = std::max(audit.observed, std::abs(m(s, z) - m(s2, z)));
    }
    ++audit.pairs;
  }
  return audit;
}

// Exhaustive version for tiny instances: every dataset, every index, every
// replacement and every z in the support.
template <class Z>
StabilityAudit audit_stability_exhaustive(const DataDependentFunction<Z>& m,
                                          const FiniteDistribution<Z>& p, std::size_t n) {
  StabilityAudit audit{0.0, m.stability(), 0};
  for_each_dataset(p, n, [&](const Dataset<Z>& s, double) {
    std::vector<double> base;
    base.reserve(p.size());
    for (const Z& z : p.support()) base.push_back(m(s, z));
    for (std::size_t i = 0; i < n; ++i) {
      for (const Z& r : p.support()) {
        const Dataset<Z> s2 = s.replace(i, r);
        for (std::size_t j = 0; j < p.size(); ++j) {
          audit.observed = std::max(audit.observed, std::abs(base[j] - m(s2, p.point(j))));
        }
        ++audit.pairs;
      }
    }
  });
  return audit;
}

}  // namespace unistab

#endif  // UNISTAB_CORE_HPP_
