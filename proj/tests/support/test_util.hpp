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

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "eve/alignment.hpp"
#include "eve/corpus.hpp"

namespace eve::testing {

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / ("eve_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Textbook O(T*N) longest common subsequence length.
inline std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
  std::vector<std::vector<std::size_t>> dp(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      dp[i][j] = a[i - 1] == b[j - 1] ? dp[i - 1][j - 1] + 1 : std::max(dp[i - 1][j], dp[i][j - 1]);
  return dp[a.size()][b.size()];
}

inline std::size_t count_tag(const AlignedEdit& e, EditTag tag) {
  return static_cast<std::size_t>(std::count(e.tags.begin(), e.tags.end(), tag));
}

inline TokenSeq random_tokens(std::mt19937_64& rng, std::size_t len, int alphabet) {
  TokenSeq s;
  std::uniform_int_distribution<int> d(0, alphabet - 1);
  for (std::size_t i = 0; i < len; ++i) s.push_back(std::string(1, static_cast<char>('a' + d(rng))));
  return s;
}

/// Every sequence of length <= max_len over {a, b, c}.
inline std::vector<TokenSeq> all_sequences(std::size_t max_len, int alphabet = 3) {
  std::vector<TokenSeq> out = {{}};
  std::vector<TokenSeq> layer = {{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<TokenSeq> next;
    for (const TokenSeq& s : layer)
      for (int c = 0; c < alphabet; ++c) {
        TokenSeq t = s;
        t.push_back(std::string(1, static_cast<char>('a' + c)));
        next.push_back(std::move(t));
      }
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return out;
}

inline TokenSeq words(const std::string& text) {
  TokenSeq out;
  std::string cur;
  for (char ch : text) {
    if (ch == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace eve::testing
