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

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eve {

using Token = std::string;
using TokenSeq = std::vector<Token>;

/// Padding symbol used by the aligner. Corpus loaders reject it as input.
inline constexpr std::string_view kPadSymbol = "<phi>";

enum class EditTag : unsigned char { Equal = 0, Insert = 1, Delete = 2, Replace = 3 };

inline constexpr int kNumEditTags = 4;

/// "=", "+", "-" or "<=>".
std::string_view tag_symbol(EditTag tag);

/// Both sides padded to a common length M with per-position tags.
struct AlignedEdit {
  TokenSeq src_padded;
  TokenSeq tgt_padded;
  std::vector<EditTag> tags;

  std::size_t length() const { return tags.size(); }
};

/// Corpus-level edit profile.
struct EditStats {
  std::size_t size = 0;
  double frac_only_insert = 0.0;
  double frac_only_delete = 0.0;
  double frac_only_replace = 0.0;
  double mean_length = 0.0;
};

/// Token-level matching of src against tgt.
///
/// Equal positions form a longest common subsequence; ties are broken toward
/// the smallest source index (forward walk, order match > delete > insert).
/// Inside every maximal run of non-Equal positions the k-th deletion is paired
/// with the k-th insertion into a Replace; the surplus stays Delete or Insert.
AlignedEdit align(std::span<const Token> src, std::span<const Token> tgt);

/// Changed tokens: target tokens at Insert/Replace positions, then source
/// tokens at Delete positions, each left to right.
TokenSeq changed_tokens(const AlignedEdit& edit);

/// Strips the pad symbol from one padded side.
TokenSeq strip_padding(std::span<const Token> padded);

/// True when the per-position tag/pad consistency rules hold.
bool is_consistent(const AlignedEdit& edit);

/// Throws eve::Error("empty corpus") when corpus is empty.
EditStats edit_stats(std::span<const AlignedEdit> corpus);

}  // namespace eve
