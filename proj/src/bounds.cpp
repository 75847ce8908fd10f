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

#include "unistab/bounds.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "unistab/format.hpp"

namespace unistab::bounds {
namespace {

constexpr double kInvE = 0.36787944117144233;  // 1/e

bool finite_all(std::initializer_list<double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

// n >= 4 and delta <= 1/e, shared by every bound derived from the
// range-reduction argument.
bool reduction_regime(const BoundParams& p) { return p.n >= 4.0 && p.delta <= kInvE; }

}  // namespace

void BoundParams::validate() const {
  if (!finite_all({n, R, gamma, delta, constants.c0, constants.c1, constants.c})) {
    throw std::invalid_argument("bound parameters must be finite");
  }
  if (n < 1.0) throw std::invalid_argument("n must be at least 1");
  if (!(R > 0.0)) throw std::invalid_argument("R must be positive");
  if (gamma < 0.0) throw std::invalid_argument("gamma must be nonnegative");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
}

double mcdiarmid_tail(double n, double gamma, double t) {
  if (!(n >= 1.0) || gamma < 0.0 || t < 0.0) {
    throw std::invalid_argument("mcdiarmid_tail needs n >= 1, gamma >= 0, t >= 0");
  }
  if (t == 0.0) return 1.0;
  if (gamma == 0.0) return 0.0;
  const double v = std::exp(-2.0 * t * t / (n * gamma * gamma));
  return std::min(1.0, std::max(0.0, v));
}

BoundValue be02_bound(const BoundParams& p) {
  p.validate();
  const double sn = std::sqrt(p.n);
  const double v = p.constants.c0 * p.R * (p.gamma / p.R * sn + 1.0 / sn) *
                   std::sqrt(std::log(1.0 / p.delta));
  return {v, true, "be02"};
}

BoundValue fv18_bound(const BoundParams& p) {
  p.validate();
  const double v = p.constants.c1 * (std::sqrt(p.gamma * p.R) + p.R / std::sqrt(p.n)) *
                   std::sqrt(std::log(1.0 / p.delta));
  return {v, true, "fv18"};
}

BoundValue main_bound(const BoundParams& p) {
  p.validate();
  const double g = p.gamma / p.R;
  const double n3 = p.n * p.n * p.n;
  const double v = 32.0 * g * std::log(5.0 * n3 / p.delta) * std::log2(p.n) +
                   2.0 * std::sqrt(std::log(4.0 / p.delta) / p.n);
  return {p.R * v, reduction_regime(p), "main"};
}

double gamma_threshold(const BoundParams& p) {
  p.validate();
  return p.R / (4.0 * std::sqrt(p.n * std::log(p.n / p.delta)));
}

BoundValue thm_large_gamma_bound(const BoundParams& p) {
  p.validate();
  const double g = p.gamma / p.R;
  const double n3 = p.n * p.n * p.n;
  const double v = 16.0 * g * std::log(n3 / p.delta) * std::log2(p.n);
  const bool valid = reduction_regime(p) && p.gamma >= gamma_threshold(p);
  return {p.R * v, valid, "thm_large"};
}

BoundValue thm_small_gamma_bound(const BoundParams& p) {
  p.validate();
  const double g = p.gamma / p.R;
  const double n3 = p.n * p.n * p.n;
  const double v = 16.0 * g * std::log(4.0 * n3 / p.delta) * std::log2(p.n) +
                   2.0 * std::sqrt(std::log(4.0 / p.delta) / p.n);
  const bool valid = reduction_regime(p) && p.gamma < gamma_threshold(p);
  return {p.R * v, valid, "thm_small"};
}

BoundValue inductive_bound(unsigned a, double delta) {
  if (a < 1) throw std::invalid_argument("inductive bound needs a >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  const double n = std::pow(4.0, static_cast<double>(a));
  const double v = 8.0 / std::sqrt(n) * std::log(n * n / delta) * std::log2(n);
  return {v, delta <= kInvE, "inductive"};
}

BoundValue scale_bound(const BoundFn& bound, const BoundParams& p, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("scaling factor must be positive");
  }
  BoundParams scaled = p;
  scaled.R = alpha * p.R;
  scaled.gamma = alpha * p.gamma;
  BoundValue out = bound(scaled);
  out.value /= alpha;
  return out;
}

MomentBounds moment_bounds(double gamma, double n) {
  if (gamma < 0.0 || !(n >= 1.0)) {
    throw std::invalid_argument("moment bounds need gamma >= 0 and n >= 1");
  }
  return {gamma + 1.0 / std::sqrt(n), gamma * gamma + 1.0 / n};
}

double GammaRule::at(double n) const {
  switch (kind) {
    case Kind::kFixed:
      return value;
    case Kind::kInvSqrtN:
      return 1.0 / std::sqrt(n);
    case Kind::kInvN:
      return 1.0 / n;
  }
  return value;
}

std::string GammaRule::to_string() const {
  switch (kind) {
    case Kind::kFixed:
      return "fixed:" + format_double(value);
    case Kind::kInvSqrtN:
      return "inv_sqrt_n";
    case Kind::kInvN:
      return "inv_n";
  }
  return {};
}

GammaRule GammaRule::parse(std::string_view text) {
  if (text == "inv_sqrt_n") return {Kind::kInvSqrtN, 0.0};
  if (text == "inv_n") return {Kind::kInvN, 0.0};
  constexpr std::string_view prefix = "fixed:";
  if (text.substr(0, prefix.size()) == prefix) {
    const std::string number(text.substr(prefix.size()));
    char* end = nullptr;
    const double v = std::strtod(number.c_str(), &end);
    if (number.empty() || end != number.c_str() + number.size() || !(v >= 0.0) ||
        !std::isfinite(v)) {
      throw std::invalid_argument("bad fixed gamma value '" + number + "'");
    }
    return {Kind::kFixed, v};
  }
  throw std::invalid_argument("unknown gamma rule '" + std::string(text) +
                              "' (expected fixed:V, inv_sqrt_n or inv_n)");
}

std::vector<BoundRow> bound_table(std::span<const double> n_list, const GammaRule& rule,
                                  double delta) {
  std::vector<BoundRow> rows;
  rows.reserve(n_list.size());
  for (double n : n_list) {
    BoundParams p;
    p.n = n;
    p.gamma = rule.at(n);
    p.delta = delta;
    const BoundValue large = thm_large_gamma_bound(p);
    const BoundValue small = thm_small_gamma_bound(p);
    rows.push_back({n, p.gamma, delta, be02_bound(p).value, fv18_bound(p).value,
                    main_bound(p).value, large.value, large.valid, small.value, small.valid});
  }
  return rows;
}

}  // namespace unistab::bounds
