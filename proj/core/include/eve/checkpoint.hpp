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

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "eve/numeric/tensor.hpp"

namespace eve {

inline constexpr char kCheckpointMagic[] = "EVECKPT1";

struct TensorBlock {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<float> data;  // row-major
};

/// "EVECKPT1", u64 LE header length, JSON header, raw LE float32 blocks.
struct CheckpointFile {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<TensorBlock> tensors;

  const TensorBlock* find(const std::string& name) const;
  const TensorBlock& at(const std::string& name) const;
};

/// Writes atomically through a temporary sibling file.
void write_checkpoint(const std::filesystem::path& path, const CheckpointFile& file);
CheckpointFile read_checkpoint(const std::filesystem::path& path);

template <class T>
TensorBlock to_block(const std::string& name, const nn::Matrix<T>& m);
template <class T>
void from_block(const TensorBlock& block, nn::Matrix<T>& m);

/// u64 LE header length, JSON {n, d, checkpoint_hash}, LE float32 rows.
struct RepresentationFile {
  nn::Matrix<double> rows;
  std::string checkpoint_hash;
  nlohmann::json extra = nlohmann::json::object();
};

void write_representations(const std::filesystem::path& path, const RepresentationFile& file);
RepresentationFile read_representations(const std::filesystem::path& path);

}  // namespace eve
