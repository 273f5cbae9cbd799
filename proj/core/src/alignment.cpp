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

#include "eve/alignment.hpp"

#include <algorithm>

#include "eve/error.hpp"

namespace eve {

std::string_view tag_symbol(EditTag tag) {
  switch (tag) {
    case EditTag::Equal: return "=";
    case EditTag::Insert: return "+";
    case EditTag::Delete: return "-";
    case EditTag::Replace: return "<=>";
  }
  return "?";
}

namespace {

struct Column {
  EditTag tag;
  std::size_t src = 0;  // valid unless tag == Insert
  std::size_t tgt = 0;  // valid unless tag == Delete
};

// Appends one maximal non-Equal gap, zipping deletions with insertions.
void flush_gap(std::vector<Column>& out, std::vector<std::size_t>& dels,
               std::vector<std::size_t>& ins) {
  const std::size_t paired = std::min(dels.size(), ins.size());
  for (std::size_t k = 0; k < paired; ++k) out.push_back({EditTag::Replace, dels[k], ins[k]});
  for (std::size_t k = paired; k < dels.size(); ++k) out.push_back({EditTag::Delete, dels[k], 0});
  for (std::size_t k = paired; k < ins.size(); ++k) out.push_back({EditTag::Insert, 0, ins[k]});
  dels.clear();
  ins.clear();
}

}  // namespace

AlignedEdit align(std::span<const Token> src, std::span<const Token> tgt) {
  const std::size_t n = src.size();
  const std::size_t m = tgt.size();
  // suffix[i][j] = LCS length of src[i:], tgt[j:]
  std::vector<std::vector<std::size_t>> suffix(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      suffix[i][j] = src[i] == tgt[j] ? suffix[i + 1][j + 1] + 1
                                      : std::max(suffix[i + 1][j], suffix[i][j + 1]);
    }
  }

  std::vector<Column> columns;
  columns.reserve(n + m);
  std::vector<std::size_t> dels, ins;
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && src[i] == tgt[j] && suffix[i][j] == suffix[i + 1][j + 1] + 1) {
      flush_gap(columns, dels, ins);
      columns.push_back({EditTag::Equal, i, j});
      ++i;
      ++j;
    } else if (i < n && (j == m || suffix[i + 1][j] == suffix[i][j])) {
      dels.push_back(i++);
    } else {
      ins.push_back(j++);
    }
  }
  flush_gap(columns, dels, ins);

  AlignedEdit out;
  out.src_padded.reserve(columns.size());
  out.tgt_padded.reserve(columns.size());
  out.tags.reserve(columns.size());
  const Token pad(kPadSymbol);
  for (const Column& c : columns) {
    out.tags.push_back(c.tag);
    out.src_padded.push_back(c.tag == EditTag::Insert ? pad : src[c.src]);
    out.tgt_padded.push_back(c.tag == EditTag::Delete ? pad : tgt[c.tgt]);
  }
  return out;
}

TokenSeq changed_tokens(const AlignedEdit& edit) {
  TokenSeq out;
  for (std::size_t i = 0; i < edit.length(); ++i) {
    if (edit.tags[i] == EditTag::Insert || edit.tags[i] == EditTag::Replace)
      out.push_back(edit.tgt_padded[i]);
  }
  for (std::size_t i = 0; i < edit.length(); ++i) {
    if (edit.tags[i] == EditTag::Delete) out.push_back(edit.src_padded[i]);
  }
  return out;
}

TokenSeq strip_padding(std::span<const Token> padded) {
  TokenSeq out;
  for (const Token& t : padded)
    if (t != kPadSymbol) out.push_back(t);
  return out;
}

bool is_consistent(const AlignedEdit& edit) {
  const std::size_t m = edit.tags.size();
  if (edit.src_padded.size() != m || edit.tgt_padded.size() != m) return false;
  for (std::size_t i = 0; i < m; ++i) {
    const bool src_pad = edit.src_padded[i] == kPadSymbol;
    const bool tgt_pad = edit.tgt_padded[i] == kPadSymbol;
    switch (edit.tags[i]) {
      case EditTag::Equal:
        if (src_pad || edit.src_padded[i] != edit.tgt_padded[i]) return false;
        break;
      case EditTag::Insert:
        if (!src_pad || tgt_pad) return false;
        break;
      case EditTag::Delete:
        if (src_pad || !tgt_pad) return false;
        break;
      case EditTag::Replace:
        if (src_pad || tgt_pad || edit.src_padded[i] == edit.tgt_padded[i]) return false;
        break;
    }
  }
  return true;
}

EditStats edit_stats(std::span<const AlignedEdit> corpus) {
  if (corpus.empty()) throw Error("empty corpus");
  EditStats stats;
  stats.size = corpus.size();
  std::size_t only_ins = 0, only_del = 0, only_rep = 0, total_len = 0;
  for (const AlignedEdit& e : corpus) {
    bool ins = false, del = false, rep = false;
    for (EditTag t : e.tags) {
      ins |= t == EditTag::Insert;
      del |= t == EditTag::Delete;
      rep |= t == EditTag::Replace;
    }
    only_ins += ins && !del && !rep;
    only_del += del && !ins && !rep;
    only_rep += rep && !ins && !del;
    total_len += e.length();
  }
  const double n = static_cast<double>(corpus.size());
  stats.frac_only_insert = static_cast<double>(only_ins) / n;
  stats.frac_only_delete = static_cast<double>(only_del) / n;
  stats.frac_only_replace = static_cast<double>(only_rep) / n;
  stats.mean_length = static_cast<double>(total_len) / n;
  return stats;
}

}  // namespace eve
