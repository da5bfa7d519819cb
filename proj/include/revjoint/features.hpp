// Copyright 2026 The revjoint Authors. All Rights Reserved.
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

// Per-step features computed from the cursor positions of an EditStep.
//
// Groups:
//   loc:  cursor positions, position buckets, begin/end-of-paragraph flags
//   txt:  sentence lengths; edit distance, length and punctuation deltas for
//         the pair under the cursors and the two look-ahead pairs
//         (d1, d2+1) and (d1+1, d2)
//   pos:  POS unigram counts and per-tag count deltas for the same pairs
//   uni:  binary token presence for the sentences under the cursors
//
// Features never depend on labels, so an op-skeleton fully determines the
// feature matrix of a candidate sequence.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "revjoint/corpus.hpp"
#include "revjoint/editseq.hpp"
#include "revjoint/error.hpp"
#include "revjoint/textmetrics.hpp"

namespace revjoint {

enum class EditGranularity { Token, Char };

struct FeatureConfig {
  bool unigram = true;
  bool location = true;
  bool textual = true;
  bool language = true;
  /// Granularity of the edit-distance feature; token by default.
  EditGranularity edit_granularity = EditGranularity::Token;

  void validate() const {
    if (!unigram && !location && !textual && !language)
      throw DataError("feature config enables no feature group");
  }

  /// Stable "key=value" lines, used for config hashing and echoes.
  std::string describe() const {
    std::string s;
    s += "features.unigram=" + std::to_string(unigram) + "\n";
    s += "features.location=" + std::to_string(location) + "\n";
    s += "features.textual=" + std::to_string(textual) + "\n";
    s += "features.language=" + std::to_string(language) + "\n";
    s += std::string("features.edit_granularity=") +
         (edit_granularity == EditGranularity::Token ? "token" : "char") + "\n";
    return s;
  }

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

/// Feature name -> value. Ordered so that iteration is deterministic.
using FeatureVector = std::map<std::string, double>;

namespace detail {

inline std::string bucket(std::size_t pos) {
  return pos >= 5 ? std::string("5+") : std::to_string(pos);
}

inline std::vector<std::string> lowered(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(ascii_lower(t));
  return out;
}

inline std::map<std::string, int> tag_counts(const Sentence& s) {
  std::map<std::string, int> c;
  for (const auto& t : s.pos_tags) ++c[t];
  return c;
}

inline void pair_features(FeatureVector& fv, const std::string& prefix, const Sentence& a,
                          const Sentence& b, const FeatureConfig& cfg) {
  if (cfg.textual) {
    double dist = 0.0;
    double norm = 0.0;
    if (cfg.edit_granularity == EditGranularity::Token) {
      const auto la = lowered(a.tokens);
      const auto lb = lowered(b.tokens);
      dist = static_cast<double>(levenshtein(la, lb));
      norm = normalized_levenshtein(la, lb);
    } else {
      const auto ca = utf8_decode(ascii_lower(a.text));
      const auto cb = utf8_decode(ascii_lower(b.text));
      dist = static_cast<double>(levenshtein(ca, cb));
      norm = normalized_levenshtein(ca, cb);
    }
    fv["txt:" + prefix + ":edit"] = dist;
    fv["txt:" + prefix + ":edit_norm"] = norm;
    const int bin = std::min(4, static_cast<int>(std::floor(norm * 5.0)));
    fv["txt:" + prefix + ":edit_bin=" + std::to_string(bin)] = 1.0;
    if (dist == 0.0) fv["txt:" + prefix + ":identical"] = 1.0;
    const auto sa = sentence_stats(a);
    const auto sb = sentence_stats(b);
    const double len_diff =
        static_cast<double>(sb.token_count) - static_cast<double>(sa.token_count);
    const double punct_diff =
        static_cast<double>(sb.punct_count) - static_cast<double>(sa.punct_count);
    fv["txt:" + prefix + ":len_diff"] = len_diff;
    fv["txt:" + prefix + ":len_absdiff"] = std::abs(len_diff);
    fv["txt:" + prefix + ":punct_diff"] = punct_diff;
    fv["txt:" + prefix + ":punct_absdiff"] = std::abs(punct_diff);
  }
  if (cfg.language) {
    const auto ca = tag_counts(a);
    const auto cb = tag_counts(b);
    std::set<std::string> tags;
    for (const auto& [t, c] : ca) tags.insert(t);
    for (const auto& [t, c] : cb) tags.insert(t);
    double total = 0.0;
    for (const auto& t : tags) {
      const auto ia = ca.find(t);
      const auto ib = cb.find(t);
      const double d = static_cast<double>((ib == cb.end() ? 0 : ib->second) -
                                           (ia == ca.end() ? 0 : ia->second));
      if (d != 0.0) fv["posdiff:" + prefix + ":" + t] = d;
      total += std::abs(d);
    }
    fv["posdiff:" + prefix + ":abs_total"] = total;
  }
}

inline void drop_zeros(FeatureVector& fv) {
  for (auto it = fv.begin(); it != fv.end();) {
    if (it->second == 0.0) {
      it = fv.erase(it);
    } else {
      ++it;
    }
  }
}

}  // namespace detail

/// Features for cursors at (d1_pos, d2_pos). Positions one past the end are
/// legal when that side is exhausted; pair features needing the missing
/// sentence are omitted. Zero-valued entries are not stored.
inline FeatureVector extract(const ParagraphPair& p, std::size_t d1_pos, std::size_t d2_pos,
                             const FeatureConfig& config) {
  const std::size_t m = p.m();
  const std::size_t n = p.n();
  if (d1_pos < 1 || d1_pos > m + 1 || d2_pos < 1 || d2_pos > n + 1)
    throw DataError("feature position (" + std::to_string(d1_pos) + "," + std::to_string(d2_pos) +
                    ") outside " + std::to_string(m) + "x" + std::to_string(n) + " paragraph");
  const Sentence* s1 = d1_pos <= m ? &p.d1_sentences[d1_pos - 1] : nullptr;
  const Sentence* s2 = d2_pos <= n ? &p.d2_sentences[d2_pos - 1] : nullptr;

  FeatureVector fv;
  fv["bias"] = 1.0;

  if (config.location) {
    fv["loc:d1_pos"] = static_cast<double>(d1_pos);
    fv["loc:d2_pos"] = static_cast<double>(d2_pos);
    fv["loc:d1_bucket=" + detail::bucket(d1_pos)] = 1.0;
    fv["loc:d2_bucket=" + detail::bucket(d2_pos)] = 1.0;
    if (d1_pos == 1) fv["loc:d1_begin"] = 1.0;
    if (d2_pos == 1) fv["loc:d2_begin"] = 1.0;
    if (d1_pos >= m) fv["loc:d1_end"] = 1.0;
    if (d2_pos >= n) fv["loc:d2_end"] = 1.0;
    if (d1_pos == m + 1) fv["loc:d1_done"] = 1.0;
    if (d2_pos == n + 1) fv["loc:d2_done"] = 1.0;
  }

  if (config.textual) {
    if (s1) fv["txt:d1_len"] = static_cast<double>(s1->tokens.size());
    if (s2) fv["txt:d2_len"] = static_cast<double>(s2->tokens.size());
  }
  if (config.language) {
    if (s1)
      for (const auto& [t, c] : detail::tag_counts(*s1)) fv["pos:d1:" + t] = c;
    if (s2)
      for (const auto& [t, c] : detail::tag_counts(*s2)) fv["pos:d2:" + t] = c;
  }
  if (config.textual || config.language) {
    if (s1 && s2) detail::pair_features(fv, "cur", *s1, *s2, config);
    if (s1 && d2_pos + 1 <= n)
      detail::pair_features(fv, "d2next", *s1, p.d2_sentences[d2_pos], config);
    if (s2 && d1_pos + 1 <= m)
      detail::pair_features(fv, "d1next", p.d1_sentences[d1_pos], *s2, config);
  }
  if (config.unigram) {
    if (s1)
      for (const auto& t : s1->tokens) fv["uni:d1:" + ascii_lower(t)] = 1.0;
    if (s2)
      for (const auto& t : s2->tokens) fv["uni:d2:" + ascii_lower(t)] = 1.0;
  }
  detail::drop_zeros(fv);
  return fv;
}

// ---------------------------------------------------------------------------
// Indexed feature space

using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

/// Name <-> index mapping fixed at training time. Indices follow sorted
/// name order.
class FeatureSpace {
 public:
  FeatureSpace() = default;

  explicit FeatureSpace(std::vector<std::string> names) : names_(std::move(names)) {
    std::sort(names_.begin(), names_.end());
    names_.erase(std::unique(names_.begin(), names_.end()), names_.end());
    for (std::size_t k = 0; k < names_.size(); ++k)
      index_.emplace(names_[k], static_cast<std::uint32_t>(k));
  }

  /// Keeps features observed (nonzero) at least `min_count` times.
  static FeatureSpace build(const std::vector<FeatureVector>& vectors, std::size_t min_count) {
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& fv : vectors)
      for (const auto& [name, v] : fv) ++counts[name];
    std::vector<std::string> names;
    for (const auto& [name, c] : counts)
      if (c >= min_count) names.push_back(name);
    return FeatureSpace(std::move(names));
  }

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  std::optional<std::uint32_t> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Unknown names are dropped.
  SparseVector project(const FeatureVector& fv) const {
    SparseVector out;
    out.reserve(fv.size());
    for (const auto& [name, v] : fv) {
      auto it = index_.find(name);
      if (it != index_.end()) out.emplace_back(it->second, v);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Sorted "name<TAB>index" lines.
  void write(std::ostream& out) const {
    for (std::size_t k = 0; k < names_.size(); ++k) out << names_[k] << '\t' << k << '\n';
  }

  static FeatureSpace read(std::istream& in, const std::string& source) {
    std::vector<std::string> names;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      detail::strip_cr(line);
      if (line.empty()) continue;
      const auto tab = line.rfind('\t');
      std::size_t idx = 0;
      if (tab == std::string::npos || !detail::parse_index(line.substr(tab + 1), idx))
        throw ParseError(source, lineno, "expected name<TAB>index");
      if (idx != names.size()) throw ParseError(source, lineno, "feature indices must be dense");
      names.push_back(line.substr(0, tab));
    }
    FeatureSpace fs(names);
    if (fs.names_ != names) throw ParseError(source, lineno, "feature names must be sorted");
    return fs;
  }

  friend bool operator==(const FeatureSpace& a, const FeatureSpace& b) {
    return a.names_ == b.names_;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// Lazily computed, indexed features for every cursor position of one
/// paragraph pair. Not thread-safe; use one per thread.
class ParagraphFeatures {
 public:
  ParagraphFeatures(const ParagraphPair& p, const FeatureConfig& config, const FeatureSpace& space)
      : p_(&p), config_(config), space_(&space), cache_((p.m() + 1) * (p.n() + 1)) {}

  const ParagraphPair& paragraph() const noexcept { return *p_; }
  const FeatureSpace& space() const noexcept { return *space_; }

  const SparseVector& at(std::size_t d1_pos, std::size_t d2_pos) const {
    if (d1_pos < 1 || d1_pos > p_->m() + 1 || d2_pos < 1 || d2_pos > p_->n() + 1)
      throw DataError("feature position out of range");
    auto& slot = cache_[(d1_pos - 1) * (p_->n() + 1) + (d2_pos - 1)];
    if (!slot) slot = space_->project(extract(*p_, d1_pos, d2_pos, config_));
    return *slot;
  }

  /// One feature row per step, at the step's entry cursors.
  std::vector<SparseVector> for_sequence(const EditSequence& seq) const {
    std::vector<SparseVector> rows;
    rows.reserve(seq.size());
    for (const auto& s : seq.steps()) rows.push_back(at(s.d1_pos, s.d2_pos));
    return rows;
  }

 private:
  const ParagraphPair* p_;
  FeatureConfig config_;
  const FeatureSpace* space_;
  mutable std::vector<std::optional<SparseVector>> cache_;
};

}  // namespace revjoint
