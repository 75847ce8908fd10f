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

#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "unistab/core.hpp"
#include "unistab/rng.hpp"

using namespace unistab;

namespace {

// 'a' = 0, 'b' = 1, 'c' = 2
DataDependentFunction<int> count_fn(double scale, std::size_t n) {
  return DataDependentFunction<int>(
      [scale](const Dataset<int>& s, const int& z) {
        return scale * static_cast<double>(std::count(s.elements().begin(), s.elements().end(), z));
      },
      Interval{0.0, scale * static_cast<double>(n)}, scale);
}

DataDependentFunction<int> constant_fn(double c) {
  return DataDependentFunction<int>([c](const Dataset<int>&, const int&) { return c; },
                                    Interval{c, c}, 0.0);
}

}  // namespace

TEST_CASE("dataset basics") {
  CHECK_THROWS_AS(Dataset<int>(std::vector<int>{}), std::invalid_argument);
  const Dataset<int> s({0, 0, 1});
  CHECK(s.size() == 3);
  const Dataset<int> t = s.replace(1, 2);
  CHECK(t[1] == 2);
  CHECK(s[1] == 0);
  CHECK_THROWS_AS(s.replace(3, 0), std::out_of_range);
}

TEST_CASE("distribution validation") {
  CHECK_THROWS_AS(FiniteDistribution<int>({0, 1}, {0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(FiniteDistribution<int>({0, 1}, {1.5, -0.5}), std::invalid_argument);
  CHECK_THROWS_AS(FiniteDistribution<int>({0}, {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(FiniteDistribution<int>({}, {}), std::invalid_argument);
  CHECK_NOTHROW(FiniteDistribution<int>({0, 1, 2}, {0.1, 0.2, 0.7}));
}

TEST_CASE("sampling frequencies and zero-probability points") {
  const FiniteDistribution<int> p({0, 1, 2, 3}, {0.2, 0.0, 0.5, 0.3});
  Stream stream(7);
  std::map<int, int> hits;
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) ++hits[p.sample(stream)];
  CHECK(hits[1] == 0);
  CHECK(hits[0] / double(draws) == doctest::Approx(0.2).epsilon(0.02));
  CHECK(hits[2] / double(draws) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("empirical and true means on the worked examples") {
  const Dataset<int> aab({0, 0, 1});
  CHECK(empirical_mean(constant_fn(0.7), aab) == doctest::Approx(0.7));
  const auto m = count_fn(0.01, 3);
  CHECK(empirical_mean(m, aab) == doctest::Approx(0.05 / 3.0).epsilon(1e-12));
  CHECK(empirical_mean(m, Dataset<int>({0, 1, 2})) == doctest::Approx(0.01).epsilon(1e-12));

  const auto uniform_ab = FiniteDistribution<int>::uniform({0, 1});
  CHECK(true_mean(constant_fn(0.7), aab, uniform_ab).value == doctest::Approx(0.7));
  CHECK(true_mean(m, aab, uniform_ab).value == doctest::Approx(0.015).epsilon(1e-12));
  CHECK(true_mean(m, aab, FiniteDistribution<int>::point_mass(0)).value ==
        doctest::Approx(0.02).epsilon(1e-12));

  CHECK(estimation_error(constant_fn(0.7), aab, uniform_ab) == doctest::Approx(0.0));
  CHECK(estimation_error(m, aab, uniform_ab) == doctest::Approx(0.05 / 3.0 - 0.015).epsilon(1e-9));
}

TEST_CASE("indicator of the first sample over a large support") {
  const std::size_t n = 5;
  const int m = 1000;
  std::vector<int> support(m);
  for (int i = 0; i < m; ++i) support[i] = i;
  const auto p = FiniteDistribution<int>::uniform(support);
  const DataDependentFunction<int> ind(
      [](const Dataset<int>& s, const int& z) { return z == s[0] ? 1.0 : 0.0; }, Interval{0, 1},
      1.0);
  const Dataset<int> s({3, 17, 42, 99, 500});
  CHECK(empirical_mean(ind, s) == doctest::Approx(1.0 / n));
  CHECK(true_mean(ind, s, p).value == doctest::Approx(1.0 / m));
  CHECK(estimation_error(ind, s, p) == doctest::Approx(1.0 / n - 1.0 / m));
}

TEST_CASE("unbias") {
  const auto p = FiniteDistribution<int>::uniform({0, 1});
  const Dataset<int> aab({0, 0, 1});
  const auto l0 = unbias(constant_fn(0.3), p);
  CHECK(l0(aab, 0) == doctest::Approx(0.0));
  CHECK(l0.unbiased());

  const auto m = count_fn(0.01, 3);
  const auto l = unbias(m, p);
  CHECK(l(aab, 0) == doctest::Approx(0.02 - 0.015).epsilon(1e-12));
  CHECK(l(aab, 1) == doctest::Approx(0.01 - 0.015).epsilon(1e-12));
  CHECK(l.stability() == doctest::Approx(0.02));
  CHECK(l.range().lo == doctest::Approx(-0.03));
  CHECK(l.range().hi == doctest::Approx(0.03));
  CHECK(std::abs(p.expect([&](const int& z) { return l(aab, z); })) < 1e-15);
}

TEST_CASE("leave-one-out error") {
  const auto p = FiniteDistribution<int>::uniform({0, 1});
  const Dataset<int> aab({0, 0, 1});
  CHECK(loo_error(unbias(constant_fn(0.5), p), aab, 0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(loo_error(count_fn(0.01, 3), aab, 0), std::invalid_argument);

  const auto l = unbias(count_fn(0.01, 3), p);
  // Hand enumeration: replacing s_i by z = a.
  // i=0: s=(a,a,b), L(s, a) = 0.02-0.015; i=1: same; i=2: s=(a,a,a), L(s, b) = 0 - 0.015.
  const double expected = (0.005 + 0.005 + (-0.015)) / 3.0;
  CHECK(loo_error(l, aab, 0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("dataset enumeration covers every tuple with product weights") {
  const FiniteDistribution<int> p({0, 1, 2}, {0.5, 0.0, 0.5});
  std::size_t visited = 0;
  double total = 0.0;
  for_each_dataset(p, 3, [&](const Dataset<int>& s, double w) {
    ++visited;
    total += w;
    double expect_w = 1.0;
    for (int z : s.elements()) expect_w *= p.prob(static_cast<std::size_t>(z));
    CHECK(w == doctest::Approx(expect_w));
  });
  CHECK(visited == 27);
  CHECK(total == doctest::Approx(1.0));
  CHECK(dataset_count(3, 4) == 81);
  CHECK(dataset_count(1000, 100) == std::numeric_limits<std::size_t>::max());
}

TEST_CASE("expectation over datasets: exact and Monte Carlo agree") {
  const FiniteDistribution<int> p({0, 1, 2}, {0.2, 0.3, 0.5});
  auto f = [](const Dataset<int>& s) {
    double acc = 0.0;
    for (int z : s.elements()) acc += z * z;
    return acc;
  };
  // E[sum z^2] = n * (0.3 + 4*0.5) = 2.3 n
  const ExpectationEstimate exact = expect_over_datasets(p, 4, f);
  CHECK(exact.method == ExpectationEstimate::Method::kAnalytic);
  CHECK(exact.value == doctest::Approx(9.2).epsilon(1e-12));
  DatasetExpectationOptions opts;
  opts.exact_limit = 10;
  opts.mc_draws = 40000;
  opts.seed = 3;
  const ExpectationEstimate mc = expect_over_datasets(p, 4, f, opts);
  CHECK(mc.method == ExpectationEstimate::Method::kMonteCarlo);
  CHECK(std::abs(mc.value - 9.2) < 4.0 * mc.std_error);
}

TEST_CASE("stability audits") {
  const auto p = FiniteDistribution<int>::uniform({0, 1, 2});
  const auto c = constant_fn(0.4);
  CHECK(audit_stability(c, p, 4, 100, 1).observed == 0.0);

  const auto m = count_fn(0.01, 4);
  const StabilityAudit sampled = audit_stability(m, p, 4, 500, 2);
  CHECK(sampled.observed == doctest::Approx(0.01).epsilon(1e-12));
  CHECK_FALSE(sampled.violated());
  const StabilityAudit full = audit_stability_exhaustive(m, p, 4);
  CHECK(full.observed == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(full.pairs > 0);

  // Claim half the true stability: the audit must flag it.
  const DataDependentFunction<int> liar(
      [m](const Dataset<int>& s, const int& z) { return m(s, z); }, m.range(), 0.005);
  CHECK(audit_stability_exhaustive(liar, p, 4).violated());

  // Unbiasing at most doubles the certificate.
  const StabilityAudit u = audit_stability_exhaustive(unbias(m, p), p, 4);
  CHECK(u.observed <= 0.02 + kCertificateSlack);
  CHECK_FALSE(u.violated());
}

TEST_CASE("streams are deterministic and derived seeds differ") {
  Stream a(derive_seed(11, 3));
  Stream b(derive_seed(11, 3));
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  CHECK(derive_seed(11, 3) != derive_seed(11, 4));
  CHECK(derive_seed(11, 3) != derive_seed(12, 3));
  Stream c(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(c.uniform_index(7) < 7);
  }
  std::vector<int> v{1, 2, 3, 4, 5, 6};
  c.shuffle(std::span<int>(v));
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{1, 2, 3, 4, 5, 6});
}
