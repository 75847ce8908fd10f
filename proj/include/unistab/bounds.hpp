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

#ifndef UNISTAB_BOUNDS_HPP_
#define UNISTAB_BOUNDS_HPP_

// Closed-form tail and moment bounds on the estimation error of uniformly
// stable data-dependent functions.
//
// Conventions: logarithms are natural except where a formula uses log2.
// `R` is the range scale of the function; every bound is homogeneous of
// degree one in (R, gamma), i.e. bound(aR, a*gamma) = a * bound(R, gamma).
// Bounds larger than the range are reported as-is; callers decide vacuity
// with BoundValue::vacuous.

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace unistab::bounds {

// Unnamed constants of the older bounds. All default to 1.
struct BoundConstants {
  double c0 = 1.0;
  double c1 = 1.0;
  double c = 1.0;
};

struct BoundParams {
  double n = 1.0;  // dataset size; a double so asymptotic points like 1e24 fit
  double R = 1.0;
  double gamma = 0.0;
  double delta = 0.5;
  BoundConstants constants;

  // Throws std::invalid_argument unless n >= 1, R > 0, gamma >= 0,
  // delta in (0,1) and everything is finite.
  void validate() const;
};

struct BoundValue {
  double value = 0.0;
  bool valid = true;  // preconditions of the underlying theorem hold
  std::string_view theorem_id;

  bool vacuous(double range_width) const { return !valid || value >= range_width; }
};

// exp(-2 t^2 / (n gamma^2)); 1 at t = 0, 0 when gamma = 0 and t > 0.
double mcdiarmid_tail(double n, double gamma, double t);

// c0 R (gamma/R sqrt(n) + 1/sqrt(n)) sqrt(ln(1/delta))
BoundValue be02_bound(const BoundParams& p);

// c1 (sqrt(gamma R) + R/sqrt(n)) sqrt(ln(1/delta))
BoundValue fv18_bound(const BoundParams& p);

// 32 g ln(5n^3/delta) log2(n) + 2 sqrt(ln(4/delta)/n) with g = gamma/R,
// scaled by R. Valid for n >= 4, delta <= 1/e.
BoundValue main_bound(const BoundParams& p);

// 16 g ln(n^3/delta) log2(n), scaled by R. Valid for delta <= 1/e, n >= 4
// and gamma >= R / (4 sqrt(n ln(n/delta))).
BoundValue thm_large_gamma_bound(const BoundParams& p);

// 16 g ln(4n^3/delta) log2(n) + 2 sqrt(ln(4/delta)/n), scaled by R. Valid
// for delta <= 1/e, n >= 4 and gamma < R / (4 sqrt(n ln(n/delta))).
BoundValue thm_small_gamma_bound(const BoundParams& p);

// Threshold separating the two theorems: R / (4 sqrt(n ln(n/delta))).
double gamma_threshold(const BoundParams& p);

// (8/sqrt(n)) ln(n^2/delta) log2(n) at n = 4^a, gamma = 1/sqrt(n),
// R = 8 sqrt(ln(n/delta)).
BoundValue inductive_bound(unsigned a, double delta);

using BoundFn = std::function<BoundValue(const BoundParams&)>;

// D(n, R, gamma) = (1/alpha) D(n, alpha R, alpha gamma).
BoundValue scale_bound(const BoundFn& bound, const BoundParams& p, double alpha);

struct MomentBounds {
  double first = 0.0;   // gamma + 1/sqrt(n)
  double second = 0.0;  // gamma^2 + 1/n
};

MomentBounds moment_bounds(double gamma, double n);

struct GammaRule {
  enum class Kind { kFixed, kInvSqrtN, kInvN };
  Kind kind = Kind::kInvSqrtN;
  double value = 0.0;  // used by kFixed

  double at(double n) const;
  std::string to_string() const;
  // "fixed:V", "inv_sqrt_n" or "inv_n".
  static GammaRule parse(std::string_view text);
};

struct BoundRow {
  double n = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  double be02 = 0.0;
  double fv18 = 0.0;
  double main = 0.0;
  double thm_large = 0.0;
  bool thm_large_valid = false;
  double thm_small = 0.0;
  bool thm_small_valid = false;
};

std::vector<BoundRow> bound_table(std::span<const double> n_list, const GammaRule& rule,
                                  double delta);

}  // namespace unistab::bounds

#endif  // UNISTAB_BOUNDS_HPP_
