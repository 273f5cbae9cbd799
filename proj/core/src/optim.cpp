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

#include "eve/numeric/optim.hpp"

#include <cmath>

namespace eve::nn {

template <class T>
void Adam<T>::step(const std::vector<Parameter<T>*>& params) {
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  const T b1 = static_cast<T>(config_.beta1), b2 = static_cast<T>(config_.beta2);
  const T step_size = static_cast<T>(config_.lr / c1);
  const T eps = static_cast<T>(config_.eps);
  const T inv_c2 = static_cast<T>(1.0 / c2);
  for (Parameter<T>* p : params) {
    if (p->grad.size() != p->value.size()) continue;
    auto [it, inserted] = moments_.try_emplace(p->name);
    AdamMoments<T>& mo = it->second;
    if (inserted || mo.m.size() != p->value.size()) {
      mo.m = Matrix<T>::Zero(p->value.rows(), p->value.cols());
      mo.v = Matrix<T>::Zero(p->value.rows(), p->value.cols());
    }
    mo.m = b1 * mo.m + (T(1) - b1) * p->grad;
    mo.v = b2 * mo.v + (T(1) - b2) * p->grad.cwiseProduct(p->grad);
    p->value.array() -=
        step_size * mo.m.array() / ((mo.v.array() * inv_c2).sqrt() + eps);
  }
}

template <class T>
void Adam<T>::restore(std::int64_t steps, std::map<std::string, AdamMoments<T>> moments) {
  t_ = steps;
  moments_ = std::move(moments);
}

template <class T>
void Adam<T>::forget(const std::string& prefix) {
  for (auto it = moments_.begin(); it != moments_.end();) {
    if (it->first.starts_with(prefix))
      it = moments_.erase(it);
    else
      ++it;
  }
}

template <class T>
double global_grad_norm(const std::vector<Parameter<T>*>& params) {
  double sq = 0.0;
  for (const Parameter<T>* p : params)
    if (p->grad.size()) sq += p->grad.template cast<double>().squaredNorm();
  return std::sqrt(sq);
}

template <class T>
double clip_global_norm(const std::vector<Parameter<T>*>& params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (norm > max_norm && norm > 0.0) {
    const T factor = static_cast<T>(max_norm / norm);
    for (Parameter<T>* p : params) p->grad *= factor;
  }
  return norm;
}

template class Adam<float>;
template class Adam<double>;
template double clip_global_norm<float>(const std::vector<Parameter<float>*>&, double);
template double clip_global_norm<double>(const std::vector<Parameter<double>*>&, double);
template double global_grad_norm<float>(const std::vector<Parameter<float>*>&);
template double global_grad_norm<double>(const std::vector<Parameter<double>*>&);

}  // namespace eve::nn
