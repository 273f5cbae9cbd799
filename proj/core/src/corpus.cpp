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

#include "eve/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "eve/error.hpp"
#include "eve/hash.hpp"
#include "eve/rng.hpp"
#include "json.hpp"

namespace eve {

using nlohmann::json;

Vocabulary::Vocabulary() {
  for (std::string_view t : kReservedTokens) add(std::string(t));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < kNumReserved) throw FormatError("vocabulary lacks reserved tokens");
  for (int i = 0; i < kNumReserved; ++i) {
    if (tokens[static_cast<std::size_t>(i)] != kReservedTokens[static_cast<std::size_t>(i)])
      throw FormatError("vocabulary reserved token mismatch at id " + std::to_string(i));
  }
  Vocabulary v;
  for (std::size_t i = kNumReserved; i < tokens.size(); ++i) {
    if (v.index_.count(tokens[i])) throw FormatError("duplicate vocabulary token " + tokens[i]);
    v.add(std::move(tokens[i]));
  }
  return v;
}

void Vocabulary::add(std::string token) {
  index_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

int Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

std::optional<int> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) throw Error("token id out of range: " + std::to_string(id));
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::encode(std::span<const Token> seq) const {
  std::vector<int> ids;
  ids.reserve(seq.size());
  for (const Token& t : seq) ids.push_back(id(t));
  return ids;
}

TokenSeq Vocabulary::decode(std::span<const int> ids) const {
  TokenSeq out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(token(i));
  return out;
}

std::string Vocabulary::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const std::string& t : tokens_) {
    h = fnv1a64(t, h);
    h = fnv1a64(std::string_view("\n"), h);
  }
  return to_hex(h);
}

bool is_reserved_token(std::string_view token) {
  return std::find(Vocabulary::kReservedTokens.begin(), Vocabulary::kReservedTokens.end(),
                   token) != Vocabulary::kReservedTokens.end();
}

Vocabulary build_vocab(std::span<const EditExample> examples, Side side, int min_freq) {
  std::map<std::string, long> counts;
  for (const EditExample& e : examples) {
    for (const Token& t : side == Side::Source ? e.src : e.tgt) ++counts[t];
  }
  std::vector<std::pair<std::string, long>> ordered;
  for (auto& [token, count] : counts) {
    if (count >= min_freq && !is_reserved_token(token)) ordered.emplace_back(token, count);
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens(Vocabulary::kReservedTokens.begin(),
                                  Vocabulary::kReservedTokens.end());
  for (auto& [token, count] : ordered) tokens.push_back(token);
  return Vocabulary::from_tokens(std::move(tokens));
}

namespace {

TokenSeq read_token_array(const json& obj, const char* field, std::size_t line_number) {
  auto it = obj.find(field);
  if (it == obj.end())
    throw FormatError("line " + std::to_string(line_number) + ": missing field \"" + field + "\"");
  if (!it->is_array())
    throw FormatError("line " + std::to_string(line_number) + ": field \"" + field +
                      "\" must be an array of strings");
  TokenSeq out;
  out.reserve(it->size());
  for (const json& t : *it) {
    if (!t.is_string())
      throw FormatError("line " + std::to_string(line_number) + ": field \"" + field +
                        "\" must be an array of strings");
    std::string token = t.get<std::string>();
    if (is_reserved_token(token))
      throw FormatError("line " + std::to_string(line_number) + ": reserved token " + token +
                        " in field \"" + field + "\"");
    if (token.empty() || token.find_first_of(" \t\r\n") != std::string::npos)
      throw FormatError("line " + std::to_string(line_number) + ": token with whitespace in \"" +
                        field + "\"");
    out.push_back(std::move(token));
  }
  return out;
}

}  // namespace

std::optional<EditExample> parse_example_line(std::string_view line, std::size_t line_number,
                                              LoadOptions options) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw FormatError("line " + std::to_string(line_number) + ": malformed JSON: " + e.what());
  }
  if (!obj.is_object()) throw FormatError("line " + std::to_string(line_number) + ": not an object");
  EditExample ex;
  ex.src = read_token_array(obj, "src", line_number);
  ex.tgt = read_token_array(obj, "tgt", line_number);
  if (auto it = obj.find("labels"); it != obj.end() && !it->is_null()) {
    if (!it->is_array())
      throw FormatError("line " + std::to_string(line_number) + ": field \"labels\" must be an array");
    for (const json& l : *it) {
      if (!l.is_string())
        throw FormatError("line " + std::to_string(line_number) + ": labels must be strings");
      ex.labels.push_back(l.get<std::string>());
    }
    std::sort(ex.labels.begin(), ex.labels.end());
    ex.labels.erase(std::unique(ex.labels.begin(), ex.labels.end()), ex.labels.end());
  }
  if (ex.src == ex.tgt) return std::nullopt;
  auto in_range = [&](std::size_t n) { return n >= options.min_len && n <= options.max_len; };
  if (!in_range(ex.src.size()) || !in_range(ex.tgt.size())) return std::nullopt;
  if (ex.src.empty() || ex.tgt.empty()) return std::nullopt;
  return ex;
}

std::vector<EditExample> load_jsonl(const std::filesystem::path& path, LoadOptions options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<EditExample> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (auto ex = parse_example_line(line, line_number, options)) out.push_back(std::move(*ex));
  }
  return out;
}

std::string example_to_json_line(const EditExample& example) {
  json obj;
  obj["src"] = example.src;
  obj["tgt"] = example.tgt;
  if (!example.labels.empty()) obj["labels"] = example.labels;
  return obj.dump();
}

void save_jsonl(const std::filesystem::path& path, std::span<const EditExample> examples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const EditExample& e : examples) out << example_to_json_line(e) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

Splits split(std::span<const EditExample> examples, std::array<double, 3> ratios,
             std::uint64_t seed) {
  for (double r : ratios) {
    if (!(r > 0.0) || !std::isfinite(r)) throw Error("split ratios must be positive");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9)
    throw Error("split ratios must sum to 1");
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng.engine());
  const std::size_t n = examples.size();
  // small epsilon so that e.g. 0.8 * 10 lands on 8 rather than 7.999...
  const auto n_train = static_cast<std::size_t>(std::floor(ratios[0] * static_cast<double>(n) + 1e-9));
  const auto n_valid = std::min(
      n - n_train, static_cast<std::size_t>(std::floor(ratios[1] * static_cast<double>(n) + 1e-9)));
  Splits s;
  for (std::size_t k = 0; k < n; ++k) {
    const EditExample& e = examples[order[k]];
    if (k < n_train) s.train.push_back(e);
    else if (k < n_train + n_valid) s.valid.push_back(e);
    else s.test.push_back(e);
  }
  return s;
}

std::vector<AlignedEdit> align_all(std::span<const EditExample> examples) {
  std::vector<AlignedEdit> out;
  out.reserve(examples.size());
  for (const EditExample& e : examples) out.push_back(align(e.src, e.tgt));
  return out;
}

std::vector<Batch> make_batches(std::span<const EditExample> examples, std::size_t batch_size,
                                bool bucket_by_length, std::uint64_t seed,
                                std::span<const AlignedEdit> aligned) {
  if (batch_size == 0) throw Error("batch_size must be >= 1");
  std::vector<AlignedEdit> local;
  if (aligned.empty() && !examples.empty()) {
    local = align_all(examples);
    aligned = local;
  }
  if (aligned.size() != examples.size()) throw DimensionError("aligned edits do not match examples");

  Rng rng(seed);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  if (bucket_by_length) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return aligned[a].length() < aligned[b].length();
    });
  } else {
    std::shuffle(order.begin(), order.end(), rng.engine());
  }

  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    Batch b;
    const std::size_t end = std::min(order.size(), start + batch_size);
    for (std::size_t k = start; k < end; ++k) {
      const std::size_t idx = order[k];
      b.indices.push_back(idx);
      b.edits.push_back(aligned[idx]);
      b.edit_lengths.push_back(aligned[idx].length());
      b.src_lengths.push_back(examples[idx].src.size());
      b.tgt_lengths.push_back(examples[idx].tgt.size());
      b.max_edit_length = std::max(b.max_edit_length, aligned[idx].length());
      b.max_src_length = std::max(b.max_src_length, examples[idx].src.size());
      b.max_tgt_length = std::max(b.max_tgt_length, examples[idx].tgt.size());
    }
    batches.push_back(std::move(b));
  }
  if (bucket_by_length) std::shuffle(batches.begin(), batches.end(), rng.engine());
  return batches;
}

}  // namespace eve
