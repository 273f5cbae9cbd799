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

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "eve/numeric/graph.hpp"

namespace eve::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <class T>
struct AdamMoments {
  Matrix<T> m;
  Matrix<T> v;
};

template <class T>
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  /// Applies one update from the accumulated gradients.
  void step(const std::vector<Parameter<T>*>& params);

  const AdamConfig& config() const { return config_; }
  void set_lr(double lr) { config_.lr = lr; }
  std::int64_t steps() const { return t_; }

  /// Moments keyed by parameter name, for checkpointing.
  std::map<std::string, AdamMoments<T>>& moments() { return moments_; }
  const std::map<std::string, AdamMoments<T>>& moments() const { return moments_; }
  void restore(std::int64_t steps, std::map<std::string, AdamMoments<T>> moments);
  /// Drops the moments of every parameter whose name starts with prefix.
  void forget(const std::string& prefix);

 private:
  AdamConfig config_;
  std::int64_t t_ = 0;
  std::map<std::string, AdamMoments<T>> moments_;
};

/// Scales all gradients so that their joint L2 norm is at most max_norm.
/// Returns the norm before clipping.
template <class T>
double clip_global_norm(const std::vector<Parameter<T>*>& params, double max_norm);

template <class T>
double global_grad_norm(const std::vector<Parameter<T>*>& params);

}  // namespace eve::nn
