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

#ifndef UNISTAB_DP_PREDICTION_HPP_
#define UNISTAB_DP_PREDICTION_HPP_

// Differentially private prediction for binary labels. The expected loss of
// an epsilon-DP predictor, viewed as a function of (dataset, query), is a
// data-dependent function with uniform stability e^epsilon - 1.

#include <array>
#include <compare>
#include <cstddef>

#include "unistab/bounds.hpp"
#include "unistab/core.hpp"

namespace unistab::dp {

struct LabeledPoint {
  double x = 0.0;
  int label = 0;  // 0 or 1

  friend auto operator<=>(const LabeledPoint&, const LabeledPoint&) = default;
};

struct LabelCounts {
  std::size_t zeros = 0;
  std::size_t ones = 0;
};

// Probability of each output label.
struct LabelDistribution {
  double p0 = 0.5;
  double p1 = 0.5;

  double prob(int label) const { return label == 1 ? p1 : p0; }
};

LabelCounts count_labels(const Dataset<LabeledPoint>& s);

// Exponential mechanism with utility c_y (sensitivity 1 under replacement of
// one example): P[y] proportional to exp(epsilon c_y / 2).
LabelDistribution exp_mech_majority(const LabelCounts& counts, double epsilon);
LabelDistribution exp_mech_majority(const Dataset<LabeledPoint>& s, double epsilon);

// Loss l(predicted, true) with values in [0, 1].
using LossMatrix = std::array<std::array<double, 2>, 2>;

inline constexpr LossMatrix kZeroOneLoss = {{{0.0, 1.0}, {1.0, 0.0}}};

// The global-majority exponential mechanism. Ignores the query point x.
class DPPredictor {
 public:
  explicit DPPredictor(double epsilon);

  double epsilon() const { return epsilon_; }
  LabelDistribution distribution(const Dataset<LabeledPoint>& s, double x) const;

 private:
  double epsilon_;
};

// M(s, (x, y)) = E_K[loss(K(s, x), y)] with declared stability e^eps - 1.
DataDependentFunction<LabeledPoint> expected_loss_function(const DPPredictor& predictor,
                                                           const LossMatrix& loss = kZeroOneLoss);

// Main estimation-error bound at gamma = e^eps - 1 for a [0,1]-valued loss.
bounds::BoundValue dp_generalization_bound(double n, double epsilon, double delta);

}  // namespace unistab::dp

#endif  // UNISTAB_DP_PREDICTION_HPP_
