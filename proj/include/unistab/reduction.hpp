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

#ifndef UNISTAB_REDUCTION_HPP_
#define UNISTAB_REDUCTION_HPP_

// Adaptive clamping, centering / range reduction and block decompositions
// of the leave-one-out error, over finite-support instances where every
// identity can be checked exactly.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "unistab/core.hpp"

namespace unistab::reduction {

inline double clamp_to(double x, double lo, double hi) { return x < lo ? lo : (x > hi ? hi : x); }

struct ClampSpec {
  double w = 1.0;  // window half-width
  // Bisection stops once the bracket is this narrow; 0 runs it down to
  // adjacent doubles.
  double tol = 0.0;

  void validate() const {
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("clamp window w must be positive");
    if (!(tol >= 0.0)) throw std::invalid_argument("clamp tolerance must be nonnegative");
  }
};

// Maximum |E_z[K(s,z)]| accepted as "unbiased" by find_shift.
inline constexpr double kUnbiasedTolerance = 1e-10;

// psi_s(x) = -E_z[(K - (x+w))_+] + E_z[((x-w) - K)_+], i.e. the change in
// E_z[K] caused by clamping to [x-w, x+w]. Nondecreasing and 1-Lipschitz.
template <class Z>
double psi(const DataDependentFunction<Z>& k, const Dataset<Z>& s,
           const FiniteDistribution<Z>& p, double x, double w) {
  return p.expect([&](const Z& z) {
    const double v = k(s, z);
    return -std::max(0.0, v - (x + w)) + std::max(0.0, (x - w) - v);
  });
}

namespace detail {

// Bisection for the left or right end of the zero set of a nondecreasing
// function on [lo, hi] with f(lo) <= 0 <= f(hi).
template <class F>
double zero_set_end(F&& f, double lo, double hi, double tol, bool left) {
  // left:  smallest x with f(x) >= 0
  // right: largest x with f(x) <= 0
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double v = f(mid);
    if (left ? (v >= 0.0) : (v > 0.0)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Root b_s in [-w, w] of psi_s. psi can vanish on a whole interval; the
// midpoint of that zero set is returned, which keeps |b_s - b_s'| within the
// stability of K for neighboring datasets.
template <class Z>
double find_shift(const DataDependentFunction<Z>& k, const Dataset<Z>& s,
                  const FiniteDistribution<Z>& p, const ClampSpec& spec) {
  spec.validate();
  const double mean = p.expect([&](const Z& z) { return k(s, z); });
  if (std::abs(mean) > kUnbiasedTolerance) {
    throw std::domain_error("find_shift requires E_z[K(s,z)] = 0, got " + std::to_string(mean));
  }
  auto f = [&](double x) { return psi(k, s, p, x, spec.w); };
  const double left = detail::zero_set_end(f, -spec.w, spec.w, spec.tol, true);
  const double right = detail::zero_set_end(f, -spec.w, spec.w, spec.tol, false);
  return clamp_to(0.5 * (left + right), -spec.w, spec.w);
}

// Thread-safe memo of shifts keyed by dataset contents. Inserts are
// idempotent: the value for a key is a pure function of the key.
template <class Z>
class ShiftCache {
 public:
  template <class Compute>
  double get_or_compute(const Dataset<Z>& s, Compute&& compute) {
    std::vector<Z> key(s.elements().begin(), s.elements().end());
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = shifts_.find(key);
      if (it != shifts_.end()) return it->second;
    }
    const double b = compute();
    std::lock_guard<std::mutex> lock(mu_);
    return shifts_.emplace(std::move(key), b).first->second;
  }

  std::map<std::vector<Z>, double> snapshot() const {
    std::lock_guard<std::mutex> lock(mu_);
    return shifts_;
  }

 private:
  mutable std::mutex mu_;
  std::map<std::vector<Z>, double> shifts_;
};

template <class Z>
struct ClampResult {
  DataDependentFunction<Z> clamped;  // K~(s,z) = clamp_[b_s-w, b_s+w](K(s,z))
  std::shared_ptr<ShiftCache<Z>> shifts;
  std::function<double(const Dataset<Z>&)> shift;  // b_s, memoized in `shifts`
  double w = 0.0;
  // E_{s,z}|K~ - K| for the dataset size the clamp was built for.
  ExpectationEstimate clamp_error_mean;
};

template <class Z>
struct ClampBudget {
  double upper = 0.0;  // E_{s,z}[(K - w)_+]
  double lower = 0.0;  // E_{s,z}[(-w - K)_+]

  double beta() const { return std::max(upper, lower); }
};

// One-sided tail masses of K outside [-w, w], the beta of the clamping lemma.
template <class Z>
ClampBudget<Z> clamp_budget(const DataDependentFunction<Z>& k, const FiniteDistribution<Z>& p,
                            std::size_t n, double w,
                            const DatasetExpectationOptions& opts = {}) {
  ClampBudget<Z> out;
  out.upper = expect_over_datasets(
                  p, n,
                  [&](const Dataset<Z>& s) {
                    return p.expect([&](const Z& z) { return std::max(0.0, k(s, z) - w); });
                  },
                  opts)
                  .value;
  out.lower = expect_over_datasets(
                  p, n,
                  [&](const Dataset<Z>& s) {
                    return p.expect([&](const Z& z) { return std::max(0.0, -w - k(s, z)); });
                  },
                  opts)
                  .value;
  return out;
}

// Builds K~ from an unbiased K. The clamped function keeps K's certificate,
// is unbiased and has range within [-2w, 2w].
template <std::totally_ordered Z>
ClampResult<Z> adaptive_clamp(const DataDependentFunction<Z>& k, const FiniteDistribution<Z>& p,
                              const ClampSpec& spec, std::size_t n,
                              const DatasetExpectationOptions& opts = {}) {
  spec.validate();
  if (!k.unbiased()) throw std::invalid_argument("adaptive_clamp requires an unbiased function");
  auto cache = std::make_shared<ShiftCache<Z>>();
  const double w = spec.w;
  auto shift_of = [k, p, spec, cache](const Dataset<Z>& s) {
    return cache->get_or_compute(s, [&] { return find_shift(k, s, p, spec); });
  };
  DataDependentFunction<Z> clamped(
      [k, shift_of, w](const Dataset<Z>& s, const Z& z) {
        const double b = shift_of(s);
        return clamp_to(k(s, z), b - w, b + w);
      },
      Interval{std::max(-2.0 * w, k.range().lo), std::min(2.0 * w, k.range().hi)},
      k.stability(), /*unbiased=*/true);
  ExpectationEstimate err = expect_over_datasets(
      p, n,
      [&](const Dataset<Z>& s) {
        return p.expect([&](const Z& z) { return std::abs(clamped(s, z) - k(s, z)); });
      },
      opts);
  return ClampResult<Z>{std::move(clamped), std::move(cache), std::move(shift_of), w, err};
}

// phi(z) = E_{s~P^n}[L(s,z)] tabulated over the support, and K = L - phi.
template <class Z>
struct Centering {
  std::map<Z, double> phi;
  std::map<Z, double> phi_std_error;  // zero in exact mode
  DataDependentFunction<Z> centered;
  bool exact = true;

  double phi_at(const Z& z) const { return phi.at(z); }
};

template <std::totally_ordered Z>
Centering<Z> center(const DataDependentFunction<Z>& l, const FiniteDistribution<Z>& p,
                    std::size_t n, const DatasetExpectationOptions& opts = {}) {
  auto phi = std::make_shared<std::map<Z, double>>();
  std::map<Z, double> se;
  bool exact = true;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const Z& z = p.point(j);
    if (phi->count(z)) continue;
    const ExpectationEstimate e =
        expect_over_datasets(p, n, [&](const Dataset<Z>& s) { return l(s, z); }, opts);
    (*phi)[z] = e.value;
    se[z] = e.std_error;
    exact = exact && e.method == ExpectationEstimate::Method::kAnalytic;
  }
  const double width = l.range().width();
  DataDependentFunction<Z> centered(
      [l, phi](const Dataset<Z>& s, const Z& z) {
        auto it = phi->find(z);
        if (it == phi->end()) {
          throw std::out_of_range("centering is only tabulated on the distribution support");
        }
        return l(s, z) - it->second;
      },
      Interval{-width, width}, l.stability(), l.unbiased());
  return Centering<Z>{*phi, std::move(se), std::move(centered), exact};
}

template <class Z>
struct RangeReduction {
  std::map<Z, double> phi;
  DataDependentFunction<Z> centered;  // K = L - phi
  ClampResult<Z> clamp;               // K~
  DataDependentFunction<Z> residual;  // K - K~
  double w = 0.0;                     // gamma sqrt(n ln(n/delta))
  double new_range = 0.0;             // R' = 2w
  double original_range = 0.0;        // R, max |L|

  const DataDependentFunction<Z>& clamped() const { return clamp.clamped; }
  // Budget on E_{s,z}|residual|: 8 R delta^2 / n^2.
  double residual_budget(std::size_t n, double delta) const {
    const double nn = static_cast<double>(n);
    return 8.0 * original_range * delta * delta / (nn * nn);
  }
};

// Centering followed by adaptive clamping with w = gamma sqrt(n ln(n/delta)).
// Requires exact dataset expectations so the centered function stays
// exactly unbiased.
template <std::totally_ordered Z>
RangeReduction<Z> range_reduce(const DataDependentFunction<Z>& l, const FiniteDistribution<Z>& p,
                               std::size_t n, double delta,
                               const DatasetExpectationOptions& opts = {}) {
  if (!l.unbiased()) throw std::invalid_argument("range_reduce requires an unbiased function");
  if (n < 4) throw std::invalid_argument("range_reduce requires n >= 4");
  if (!(delta > 0.0 && delta <= std::exp(-1.0))) {
    throw std::invalid_argument("range_reduce requires 0 < delta <= 1/e");
  }
  const double nn = static_cast<double>(n);
  const double R = l.range().magnitude();
  const double gamma = l.stability();
  const double root = std::sqrt(nn * std::log(nn / delta));
  if (!(gamma < R / (2.0 * root))) {
    throw std::invalid_argument("range_reduce hypothesis gamma < R / (2 sqrt(n ln(n/delta))) fails: gamma = " +
                                std::to_string(gamma) + ", bound = " + std::to_string(R / (2.0 * root)));
  }
  if (dataset_count(p.size(), n) > opts.exact_limit) {
    throw std::invalid_argument("range_reduce needs exact dataset enumeration (m^n too large)");
  }
  Centering<Z> c = center(l, p, n, opts);
  const double w = gamma * root;
  if (!(w > 0.0)) throw std::invalid_argument("range_reduce requires gamma > 0");
  ClampResult<Z> clamp = adaptive_clamp(c.centered, p, ClampSpec{w}, n, opts);
  DataDependentFunction<Z> k = c.centered;
  DataDependentFunction<Z> kt = clamp.clamped;
  const double kw = k.range().width();
  DataDependentFunction<Z> residual(
      [k, kt](const Dataset<Z>& s, const Z& z) { return k(s, z) - kt(s, z); },
      Interval{-kw, kw}, 2.0 * gamma, false);
  return RangeReduction<Z>{std::move(c.phi), std::move(c.centered), std::move(clamp),
                           std::move(residual), w, 2.0 * w, R};
}

struct BlockLoo {
  double total = 0.0;
  std::vector<double> per_block;
};

// Disjoint blocks of size n/k over per-index values v_i = L(s^{i<-z}, s_i).
BlockLoo block_loo(std::span<const double> values, std::size_t k);
// n blocks {j, ..., j+n'-1 mod n}, each of size n'.
BlockLoo overlapping_block_loo(std::span<const double> values, std::size_t n_prime);

// v_i = L(s^{i<-z}, s_i)
template <class Z>
std::vector<double> loo_terms(const DataDependentFunction<Z>& l, const Dataset<Z>& s, const Z& z) {
  std::vector<double> v;
  v.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) v.push_back(l(s.replace(i, z), s[i]));
  return v;
}

template <class Z>
BlockLoo block_loo(const DataDependentFunction<Z>& l, const Dataset<Z>& s, const Z& z,
                   std::size_t k) {
  return block_loo(loo_terms(l, s, z), k);
}

template <class Z>
BlockLoo overlapping_block_loo(const DataDependentFunction<Z>& l, const Dataset<Z>& s,
                               const Z& z, std::size_t n_prime) {
  return overlapping_block_loo(loo_terms(l, s, z), n_prime);
}

}  // namespace unistab::reduction

#endif  // UNISTAB_REDUCTION_HPP_
