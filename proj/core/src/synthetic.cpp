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

#include <algorithm>
#include <cctype>

#include "eve/corpus.hpp"
#include "eve/error.hpp"
#include "eve/rng.hpp"

namespace eve {

namespace {

constexpr const char* kSynonymWords[] = {
    "big",   "large",   "small", "little",   "fast",   "quick",    "happy", "glad",
    "begin", "start",   "end",   "finish",   "buy",    "purchase", "help",  "assist",
    "show",  "display", "answer", "reply",   "close",  "shut",     "shout", "yell",
    "choose", "select", "build", "construct", "smart", "clever",   "rich",  "wealthy",
    "sick",  "ill",     "angry", "mad",      "hard",   "difficult", "easy", "simple",
    "near",  "nearby",  "gift",  "present",  "job",    "work",     "road",  "street",
    "home",  "house",   "car",   "automobile", "kid",  "child",    "talk",  "speak",
    "look",  "see",     "stone", "rock"};

constexpr const char* kOtherWords[] = {
    "the", "a", "an", "of", "to", "in", "on", "at", "for", "with", "by", "from", "and", "or",
    "but", "is", "was", "are", "were", "be", "has", "had", "have", "will", "would", "can",
    "could", "should", "may", "might", "it", "he", "she", "they", "we", "you", "this", "that",
    "these", "those", "there", "here", "very", "not", "all", "some", "many", "few", "more",
    "most", "other", "new", "old", "good", "bad", "long", "short", "high", "low", "young",
    "early", "late", "first", "last", "next", "city", "river", "mountain", "village", "school",
    "market", "garden", "window", "door", "table", "book", "letter", "paper", "water", "fire",
    "tree", "bird", "dog", "cat", "horse", "fish", "food", "bread", "milk", "coffee", "tea",
    "music", "song", "game", "team", "player", "teacher", "doctor", "friend", "family",
    "mother", "father", "brother", "sister", "people", "man", "woman", "day", "night", "week",
    "year", "morning", "evening", "summer", "winter", "time", "money", "story", "idea",
    "question", "problem", "reason", "place", "country", "world", "war", "peace", "law", "art",
    "science", "history", "language", "word", "name", "color", "light", "sound", "voice",
    "heart", "hand"};

constexpr const char* kCapitalizedWords[] = {
    "Alice", "Bob",   "Carol", "David",  "Emma",   "Frank",  "Grace",   "Henry", "Paris", "London",
    "Berlin", "Tokyo", "Rome", "Madrid", "Monday", "Friday", "January", "July",  "Europe", "Africa"};

struct Generator {
  const SyntheticLexicon& lex;
  std::size_t vocab_cap;
  Rng& rng;

  const std::string& pick(const std::vector<std::string>& words, std::size_t cap) {
    return words[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(cap) - 1))];
  }

  TokenSeq sentence() {
    const auto len = static_cast<std::size_t>(rng.uniform_int(5, 20));
    TokenSeq s;
    s.reserve(len);
    s.push_back(pick(lex.capitalized, lex.capitalized.size()));
    for (std::size_t k = 1; k + 1 < len; ++k) {
      const double r = rng.uniform();
      if (r < 0.1) s.push_back(pick(lex.capitalized, lex.capitalized.size()));
      else if (r < 0.2) s.push_back(",");
      else s.push_back(pick(lex.lowercase, vocab_cap));
    }
    s.push_back(rng.bernoulli(0.5) ? "." : "!");
    return s;
  }

  std::size_t pick_position(const std::vector<std::size_t>& candidates) {
    return candidates[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1))];
  }

  // nullopt when the rule does not apply to this sentence.
  std::optional<TokenSeq> apply(RuleClass rule, const TokenSeq& src) {
    TokenSeq tgt = src;
    switch (rule) {
      case RuleClass::LowercaseFirst: {
        std::vector<std::size_t> caps;
        for (std::size_t i = 0; i < src.size(); ++i)
          if (std::isupper(static_cast<unsigned char>(src[i][0]))) caps.push_back(i);
        if (caps.empty()) return std::nullopt;
        std::string& t = tgt[pick_position(caps)];
        t[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(t[0])));
        return tgt;
      }
      case RuleClass::DropToken: {
        tgt.erase(tgt.begin() + rng.uniform_int(0, static_cast<std::int64_t>(src.size()) - 1));
        return tgt;
      }
      case RuleClass::DupToken: {
        const auto i = rng.uniform_int(0, static_cast<std::int64_t>(src.size()) - 1);
        tgt.insert(tgt.begin() + i + 1, src[static_cast<std::size_t>(i)]);
        return tgt;
      }
      case RuleClass::SwapPunct: {
        std::string& last = tgt.back();
        if (last == ".") last = "!";
        else if (last == "!") last = ".";
        else return std::nullopt;
        return tgt;
      }
      case RuleClass::Synonym: {
        std::vector<std::size_t> cands;
        for (std::size_t i = 0; i < src.size(); ++i)
          if (lex.synonym(src[i])) cands.push_back(i);
        if (cands.empty()) return std::nullopt;
        const std::size_t i = pick_position(cands);
        tgt[i] = *lex.synonym(src[i]);
        return tgt;
      }
    }
    return std::nullopt;
  }
};

}  // namespace

const SyntheticLexicon& SyntheticLexicon::instance() {
  static const SyntheticLexicon lex = [] {
    SyntheticLexicon l;
    for (const char* w : kSynonymWords) l.lowercase.emplace_back(w);
    for (const char* w : kOtherWords) l.lowercase.emplace_back(w);
    for (const char* w : kCapitalizedWords) l.capitalized.emplace_back(w);
    for (std::size_t i = 0; i + 1 < std::size(kSynonymWords); i += 2)
      l.synonyms.emplace_back(kSynonymWords[i], kSynonymWords[i + 1]);
    return l;
  }();
  return lex;
}

std::optional<std::string> SyntheticLexicon::synonym(std::string_view word) const {
  for (const auto& [a, b] : synonyms) {
    if (a == word) return b;
    if (b == word) return a;
  }
  return std::nullopt;
}

std::string_view rule_name(RuleClass rule) {
  switch (rule) {
    case RuleClass::LowercaseFirst: return "LOWERCASE_FIRST";
    case RuleClass::DropToken: return "DROP_TOKEN";
    case RuleClass::DupToken: return "DUP_TOKEN";
    case RuleClass::SwapPunct: return "SWAP_PUNCT";
    case RuleClass::Synonym: return "SYNONYM";
  }
  return "?";
}

RuleClass parse_rule(std::string_view name) {
  for (RuleClass r : kAllRuleClasses)
    if (rule_name(r) == name) return r;
  throw Error("unknown rule class: " + std::string(name));
}

std::vector<EditExample> gen_synthetic(std::size_t n, std::span<const RuleClass> classes,
                                       std::uint64_t seed, std::size_t base_vocab_size) {
  if (classes.empty()) throw Error("empty class set");
  if (n == 0) throw Error("n must be >= 1");
  const SyntheticLexicon& lex = SyntheticLexicon::instance();
  if (base_vocab_size < 2 || base_vocab_size > lex.lowercase.size())
    throw Error("base_vocab_size must lie in [2, " + std::to_string(lex.lowercase.size()) + "]");

  Rng rng(seed);
  Generator gen{lex, base_vocab_size, rng};
  std::vector<EditExample> out;
  out.reserve(n);
  constexpr int kMaxAttempts = 1000;
  for (std::size_t k = 0; k < n; ++k) {
    const RuleClass rule = classes[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(classes.size()) - 1))];
    bool done = false;
    for (int attempt = 0; attempt < kMaxAttempts && !done; ++attempt) {
      TokenSeq src = gen.sentence();
      if (auto tgt = gen.apply(rule, src)) {
        out.push_back({std::move(src), std::move(*tgt), {std::string(rule_name(rule))}});
        done = true;
      }
    }
    if (!done) throw Error("rule " + std::string(rule_name(rule)) + " never applicable");
  }
  return out;
}

}  // namespace eve
