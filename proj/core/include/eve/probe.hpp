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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eve/corpus.hpp"
#include "eve/error.hpp"
#include "eve/numeric/tensor.hpp"
#include "json.hpp"

namespace eve {

class LabelError : public Error {
 public:
  using Error::Error;
};

enum class ProbeMode { Multiclass, Multilabel };

std::string_view probe_mode_name(ProbeMode m);
ProbeMode parse_probe_mode(std::string_view name);

struct ProbeConfig {
  int depth = 2;
  int hidden = 128;
  ProbeMode mode = ProbeMode::Multiclass;
  int epochs = 50;
  int patience = 5;
  double lr = 1e-3;
  std::size_t batch_size = 64;
  std::uint64_t seed = 1;

  void validate() const;
};

nlohmann::json to_json(const ProbeConfig& c);

struct ProbeSplit {
  nn::Matrix<double> x;
  /// Label indices per row; exactly one in multiclass mode.
  std::vector<std::vector<int>> labels;
};

struct ProbeData {
  ProbeSplit train;
  ProbeSplit valid;
  ProbeSplit test;
  std::vector<std::string> label_names;
};

/// Maps string labels to indices over the union of all splits.
ProbeData make_probe_data(const nn::Matrix<double>& train_x, std::span<const EditExample> train,
                          const nn::Matrix<double>& valid_x, std::span<const EditExample> valid,
                          const nn::Matrix<double>& test_x, std::span<const EditExample> test,
                          ProbeMode mode);

struct ProbeResult {
  int depth = 0;
  double train_accuracy = 0.0;
  double valid_accuracy = 0.0;
  double test_accuracy = 0.0;
  int best_epoch = 0;
  int epochs_run = 0;
  std::vector<double> label_f1;  // multilabel only

  nlohmann::json to_json() const;
};

/// MLP with `depth` ReLU hidden layers, Adam, early stopping on valid accuracy.
ProbeResult train_probe(const ProbeData& data, const ProbeConfig& config);

struct DepthSweep {
  std::vector<ProbeResult> results;
  std::vector<std::string> label_names;
  ProbeMode mode = ProbeMode::Multiclass;

  nlohmann::json to_json() const;
};

DepthSweep depth_sweep(const ProbeData& data, std::span<const int> depths, const ProbeConfig& config);

/// Line plot of test accuracy against depth.
std::string render_depth_svg(const DepthSweep& sweep, std::string_view title);

}  // namespace eve
