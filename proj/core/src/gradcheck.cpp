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

#include "eve/numeric/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "eve/error.hpp"

namespace eve::nn {

namespace {

double evaluate(const Objective& f) {
  Graph<double> g(false);
  const double v = f(g).item();
  if (!std::isfinite(v)) throw NonFiniteError("grad_check: objective is not finite");
  return v;
}

}  // namespace

GradCheckResult grad_check(const Objective& f, const std::vector<Parameter<double>*>& params,
                           double eps) {
  for (Parameter<double>* p : params) p->grad = Matrix<double>::Zero(p->value.rows(), p->value.cols());
  {
    Graph<double> g;
    const Var<double> loss = f(g);
    if (!std::isfinite(loss.item())) throw NonFiniteError("grad_check: objective is not finite");
    g.backward(loss);
  }
  GradCheckResult result;
  for (Parameter<double>* p : params) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      double& x = p->value.data()[i];
      const double saved = x;
      x = saved + eps;
      const double up = evaluate(f);
      x = saved - eps;
      const double down = evaluate(f);
      x = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p->grad.data()[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
      const double rel = std::abs(analytic - numeric) / denom;
      ++result.coordinates;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_parameter = p->name;
        result.worst_index = i;
      }
    }
  }
  return result;
}

}  // namespace eve::nn
