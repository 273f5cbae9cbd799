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

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "eve/rng.hpp"

namespace eve::nn {

/// Dense row-major matrix; rows index the batch, columns the features.
template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class T>
using Initializer = std::function<void(Matrix<T>&, Rng&)>;

/// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)).
template <class T>
Initializer<T> fan_in_uniform(Eigen::Index fan_in);

template <class T>
Initializer<T> constant_init(T value = T(0));

/// A named trainable tensor and its accumulated gradient.
template <class T>
struct Parameter {
  std::string name;
  Matrix<T> value;
  Matrix<T> grad;
  Initializer<T> init;

  Eigen::Index size() const { return value.size(); }
  void reinitialize(Rng& rng) { init(value, rng); }
};

/// Owns all parameters of a model, in registration (manifest) order.
template <class T>
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  /// Registers a parameter and fills it from `init`. Names must be unique.
  Parameter<T>& add(std::string name, Eigen::Index rows, Eigen::Index cols, Initializer<T> init,
                    Rng& rng);

  Parameter<T>& get(std::string_view name);
  const Parameter<T>& get(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::vector<Parameter<T>*> parameters();
  std::vector<const Parameter<T>*> parameters() const;
  /// Parameters whose name starts with prefix.
  std::vector<Parameter<T>*> with_prefix(std::string_view prefix);

  std::size_t count() const { return params_.size(); }
  /// Total number of scalar coordinates.
  std::size_t coordinates() const;
  void zero_grad();

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace eve::nn
