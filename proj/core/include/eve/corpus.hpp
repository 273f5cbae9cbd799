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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "eve/alignment.hpp"

namespace eve {

/// One observed edit (x-, x+) with optional labels (sorted, unique).
struct EditExample {
  TokenSeq src;
  TokenSeq tgt;
  std::vector<std::string> labels;

  bool operator==(const EditExample&) const = default;
};

enum class Side { Source, Target };

/// Token <-> id bijection. Ids 0..4 are reserved.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr int kPhi = 4;
  static constexpr int kNumReserved = 5;

  static constexpr std::array<std::string_view, kNumReserved> kReservedTokens = {
      "<pad>", "<unk>", "<s>", "</s>", kPadSymbol};

  Vocabulary();
  /// Builds from an ordered token list whose first entries are the reserved tokens.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  int id(std::string_view token) const;  // kUnk when absent
  std::optional<int> find(std::string_view token) const;
  const std::string& token(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<int> encode(std::span<const Token> seq) const;
  TokenSeq decode(std::span<const int> ids) const;

  /// FNV-1a over the ordered token list, as hex.
  std::string hash() const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

bool is_reserved_token(std::string_view token);

/// Tokens of `side` with frequency >= min_freq, ordered by (descending
/// frequency, ascending lexicographic), after the reserved tokens.
Vocabulary build_vocab(std::span<const EditExample> examples, Side side, int min_freq);

struct LoadOptions {
  std::size_t min_len = 1;
  std::size_t max_len = 60;
};

/// Reads a JSON Lines corpus ({"src": [...], "tgt": [...], "labels": [...]}).
/// Drops no-edit lines and lines whose sides fall outside [min_len, max_len];
/// preserves file order. Throws FormatError (with line number / field name)
/// or IoError.
std::vector<EditExample> load_jsonl(const std::filesystem::path& path, LoadOptions options = {});

/// Parses one JSONL line; nullopt for the filtered cases.
std::optional<EditExample> parse_example_line(std::string_view line, std::size_t line_number,
                                              LoadOptions options);

/// Writes the same JSON Lines format, one object per line, "\n" terminated.
void save_jsonl(const std::filesystem::path& path, std::span<const EditExample> examples);
std::string example_to_json_line(const EditExample& example);

struct Splits {
  std::vector<EditExample> train;
  std::vector<EditExample> valid;
  std::vector<EditExample> test;
};

/// Seeded shuffled partition. Sizes are floor(r*n) for train and valid, the
/// remainder goes to test. Throws eve::Error for invalid ratios.
Splits split(std::span<const EditExample> examples, std::array<double, 3> ratios,
             std::uint64_t seed);

/// A group of examples processed together; lengths before padding.
struct Batch {
  std::vector<std::size_t> indices;  // into the source example list
  std::vector<AlignedEdit> edits;
  std::vector<std::size_t> edit_lengths;  // M per example
  std::vector<std::size_t> src_lengths;
  std::vector<std::size_t> tgt_lengths;
  std::size_t max_edit_length = 0;
  std::size_t max_src_length = 0;
  std::size_t max_tgt_length = 0;

  std::size_t size() const { return indices.size(); }
};

/// Chunks examples into batches. With bucketing, examples are sorted by M
/// (stable) before chunking and the chunk order is shuffled; otherwise the
/// whole example order is shuffled before chunking. `aligned` may be empty,
/// in which case edits are aligned on the fly.
std::vector<Batch> make_batches(std::span<const EditExample> examples, std::size_t batch_size,
                                bool bucket_by_length, std::uint64_t seed,
                                std::span<const AlignedEdit> aligned = {});

/// Aligns every example.
std::vector<AlignedEdit> align_all(std::span<const EditExample> examples);

// ---------------------------------------------------------------------------
// Synthetic labeled edits

enum class RuleClass { LowercaseFirst, DropToken, DupToken, SwapPunct, Synonym };

inline constexpr std::array<RuleClass, 5> kAllRuleClasses = {
    RuleClass::LowercaseFirst, RuleClass::DropToken, RuleClass::DupToken, RuleClass::SwapPunct,
    RuleClass::Synonym};

std::string_view rule_name(RuleClass rule);
/// Inverse of rule_name; throws eve::Error on unknown names.
RuleClass parse_rule(std::string_view name);

/// Fixed base vocabulary of the generator.
struct SyntheticLexicon {
  std::vector<std::string> lowercase;    // 200 word types
  std::vector<std::string> capitalized;  // 20 word types
  std::vector<std::pair<std::string, std::string>> synonyms;  // 30 pairs

  static const SyntheticLexicon& instance();
  /// Synonym of `word` (either direction), or nullopt.
  std::optional<std::string> synonym(std::string_view word) const;
};

/// n examples; src is a random sentence of length 5..20 and tgt applies
/// exactly one uniformly sampled rule class. Labels = {class name}.
/// `base_vocab_size` caps the number of lowercase word types used (<= 200).
std::vector<EditExample> gen_synthetic(std::size_t n, std::span<const RuleClass> classes,
                                       std::uint64_t seed, std::size_t base_vocab_size = 200);

}  // namespace eve
