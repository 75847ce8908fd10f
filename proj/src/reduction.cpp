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

#include "unistab/reduction.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace unistab::reduction {

BlockLoo block_loo(std::span<const double> values, std::size_t k) {
  const std::size_t n = values.size();
  if (n == 0) throw std::invalid_argument("block_loo needs at least one value");
  if (k == 0 || n % k != 0) {
    throw std::invalid_argument("block count " + std::to_string(k) + " does not divide n = " +
                                std::to_string(n) + "; use overlapping_block_loo");
  }
  const std::size_t size = n / k;
  BlockLoo out;
  out.per_block.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    const auto first = values.begin() + static_cast<std::ptrdiff_t>(j * size);
    out.per_block.push_back(std::accumulate(first, first + static_cast<std::ptrdiff_t>(size), 0.0) /
                            static_cast<double>(size));
  }
  out.total = std::accumulate(out.per_block.begin(), out.per_block.end(), 0.0) /
              static_cast<double>(k);
  return out;
}

BlockLoo overlapping_block_loo(std::span<const double> values, std::size_t n_prime) {
  const std::size_t n = values.size();
  if (n_prime < 1 || n_prime > n) {
    throw std::invalid_argument("overlapping block size must satisfy 1 <= n' <= n");
  }
  BlockLoo out;
  out.per_block.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t t = 0; t < n_prime; ++t) acc += values[(j + t) % n];
    out.per_block.push_back(acc / static_cast<double>(n_prime));
  }
  out.total = std::accumulate(out.per_block.begin(), out.per_block.end(), 0.0) /
              static_cast<double>(n);
  return out;
}

}  // namespace unistab::reduction
