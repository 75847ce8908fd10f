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

#ifndef UNISTAB_FORMAT_HPP_
#define UNISTAB_FORMAT_HPP_

#include <cstdio>
#include <string>

namespace unistab {

// Shortest text that round-trips is not what we want for reports: every
// float is written with 17 significant digits so output bytes are stable.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace unistab

#endif  // UNISTAB_FORMAT_HPP_
