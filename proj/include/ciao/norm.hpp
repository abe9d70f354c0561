// Copyright 2026 The ciao-star Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace ciao {

// The norm used for distances, free regions and derivative bounds.
enum class Norm { L1, L2, Linf };

template <typename Derived>
double norm_eval(const Eigen::MatrixBase<Derived>& v, Norm norm) {
  switch (norm) {
    case Norm::L1:
      return v.template lpNorm<1>();
    case Norm::L2:
      return v.norm();
    case Norm::Linf:
      return v.size() == 0 ? 0.0 : v.template lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

// Norm whose unit ball is the polar of the unit ball of `norm`.
inline Norm dual_norm(Norm norm) {
  switch (norm) {
    case Norm::L1:
      return Norm::Linf;
    case Norm::Linf:
      return Norm::L1;
    case Norm::L2:
      return Norm::L2;
  }
  return Norm::L2;
}

template <typename Derived>
double dual_norm_eval(const Eigen::MatrixBase<Derived>& v, Norm norm) {
  return norm_eval(v, dual_norm(norm));
}

inline std::string to_string(Norm norm) {
  switch (norm) {
    case Norm::L1:
      return "1";
    case Norm::L2:
      return "2";
    case Norm::Linf:
      return "inf";
  }
  return "?";
}

inline Norm parse_norm(std::string_view text) {
  if (text == "1" || text == "l1" || text == "L1") return Norm::L1;
  if (text == "2" || text == "l2" || text == "L2") return Norm::L2;
  if (text == "inf" || text == "linf" || text == "Linf" || text == "oo") {
    return Norm::Linf;
  }
  throw std::invalid_argument("unknown norm '" + std::string(text) +
                              "' (expected 1, 2 or inf)");
}

}  // namespace ciao
