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

#include "unistab/dp_prediction.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace unistab::dp {

LabelCounts count_labels(const Dataset<LabeledPoint>& s) {
  LabelCounts c;
  for (const LabeledPoint& p : s.elements()) {
    if (p.label == 1) {
      ++c.ones;
    } else if (p.label == 0) {
      ++c.zeros;
    } else {
      throw std::invalid_argument("labels must be 0 or 1, got " + std::to_string(p.label));
    }
  }
  return c;
}

namespace {

// 1 / (1 + exp(-x)) without overflow.
double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

LabelDistribution exp_mech_majority(const LabelCounts& counts, double epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("epsilon must be finite and nonnegative");
  }
  // P[1] = 1 / (1 + exp(eps (c0 - c1) / 2)). Both labels get their own
  // logistic so the small one does not round to zero through 1 - p.
  const double a = 0.5 * epsilon *
                   (static_cast<double>(counts.zeros) - static_cast<double>(counts.ones));
  return {logistic(a), logistic(-a)};
}

LabelDistribution exp_mech_majority(const Dataset<LabeledPoint>& s, double epsilon) {
  return exp_mech_majority(count_labels(s), epsilon);
}

DPPredictor::DPPredictor(double epsilon) : epsilon_(epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("epsilon must be finite and nonnegative");
  }
}

LabelDistribution DPPredictor::distribution(const Dataset<LabeledPoint>& s, double) const {
  return exp_mech_majority(s, epsilon_);
}

DataDependentFunction<LabeledPoint> expected_loss_function(const DPPredictor& predictor,
                                                           const LossMatrix& loss) {
  for (const auto& row : loss) {
    for (double v : row) {
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("loss values must lie in [0,1]");
    }
  }
  return DataDependentFunction<LabeledPoint>(
      [predictor, loss](const Dataset<LabeledPoint>& s, const LabeledPoint& z) {
        if (z.label != 0 && z.label != 1) {
          throw std::invalid_argument("query label must be 0 or 1");
        }
        const LabelDistribution d = predictor.distribution(s, z.x);
        return d.p0 * loss[0][z.label] + d.p1 * loss[1][z.label];
      },
      Interval{0.0, 1.0}, std::expm1(predictor.epsilon()));
}

bounds::BoundValue dp_generalization_bound(double n, double epsilon, double delta) {
  // epsilon = 0 is admitted as the limit of the (0, 1) range.
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("dp_generalization_bound needs epsilon in [0, 1)");
  }
  bounds::BoundParams p;
  p.n = n;
  p.gamma = std::expm1(epsilon);
  p.delta = delta;
  bounds::BoundValue v = bounds::main_bound(p);
  v.theorem_id = "dp_main";
  return v;
}

}  // namespace unistab::dp
