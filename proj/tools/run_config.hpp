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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "eve/corpus.hpp"
#include "eve/error.hpp"
#include "eve/model.hpp"
#include "eve/probe.hpp"
#include "eve/training.hpp"
#include "json.hpp"

namespace eve::cli {

class ConfigError : public Error {
 public:
  using Error::Error;
};

class VocabMismatchError : public Error {
 public:
  using Error::Error;
};

struct DataConfig {
  std::string dir = "data";
  std::size_t min_len = 1;
  std::size_t max_len = 60;
  int min_freq = 1;
};

struct RunConfig {
  std::uint64_t seed = 1;
  DataConfig data;
  ModelConfig model;
  TrainConfig training;
  ProbeConfig probe;
  std::vector<int> depths = {0, 1, 2, 3};

  /// Propagates the global seed into the per-module configs.
  void finalize();
};

RunConfig parse_run_config(std::string_view toml_text, std::string_view source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

std::string to_toml(const RunConfig& config);
nlohmann::json to_json(const RunConfig& config);

/// Defaults rendered for --help.
std::string default_config_text();

}  // namespace eve::cli
