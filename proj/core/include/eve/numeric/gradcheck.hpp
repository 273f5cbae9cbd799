// Copyright 2026 The EVE Authors. All Rights Reserved.
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

#include <functional>
#include <string>
#include <vector>

#include "eve/numeric/graph.hpp"

namespace eve::nn {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  Eigen::Index worst_index = -1;
  std::size_t coordinates = 0;
};

/// Builds the scalar objective on the given graph.
using Objective = std::function<Var<double>(Graph<double>&)>;

/// Reverse-mode gradient vs central differences (f(x+eps) - f(x-eps)) / 2eps on
/// every coordinate of params. Relative error is |a - n| / max(|a|, |n|, 1e-3).
GradCheckResult grad_check(const Objective& f, const std::vector<Parameter<double>*>& params,
                           double eps = 1e-5);

}  // namespace eve::nn
