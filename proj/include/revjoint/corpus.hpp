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

// Drafts, revisions, the revision-type taxonomy and the corpus/annotation
// file formats.
//
// Corpus file (UTF-8, TSV):
//   #essay<TAB>essay_id<TAB>student_id
//   #para<TAB>pair_id
//   D1|D2<TAB>index<TAB>text[<TAB>tok tok ...<TAB>tag tag ...]
//
// Annotation file (TSV):
//   pair_id<TAB>d1_index|-<TAB>d2_index|-<TAB>op<TAB>rev_type

#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "revjoint/error.hpp"
#include "revjoint/textmetrics.hpp"

namespace revjoint {

// ---------------------------------------------------------------------------
// Taxonomy

enum class RevisionType { Claim, Reasoning, Evidence, General, Surface, Nochange };

inline constexpr std::array<RevisionType, 6> kAllRevisionTypes = {
    RevisionType::Claim,   RevisionType::Reasoning, RevisionType::Evidence,
    RevisionType::General, RevisionType::Surface,   RevisionType::Nochange};

/// Granularity of the type labels. Coarse classes reuse RevisionType:
/// General stands for Content (Three) and for Support (Four).
enum class ClassScheme { Six, Four, Three };

enum class RevisionOp { Add, Delete, Modify, Nochange };

inline RevisionType coarsen(RevisionType t, ClassScheme scheme) {
  switch (scheme) {
    case ClassScheme::Six:
      return t;
    case ClassScheme::Four:
      if (t == RevisionType::Reasoning || t == RevisionType::Evidence) return RevisionType::General;
      return t;
    case ClassScheme::Three:
      if (t == RevisionType::Claim || t == RevisionType::Reasoning || t == RevisionType::Evidence)
        return RevisionType::General;
      return t;
  }
  return t;
}

/// Classes of a scheme in label-alphabet order; Nochange is always last.
inline std::vector<RevisionType> scheme_classes(ClassScheme scheme) {
  switch (scheme) {
    case ClassScheme::Six:
      return {kAllRevisionTypes.begin(), kAllRevisionTypes.end()};
    case ClassScheme::Four:
      return {RevisionType::Claim, RevisionType::General, RevisionType::Surface,
              RevisionType::Nochange};
    case ClassScheme::Three:
      return {RevisionType::General, RevisionType::Surface, RevisionType::Nochange};
  }
  return {};
}

/// Display name of a (coarsened) type under a scheme.
inline std::string type_name(RevisionType t, ClassScheme scheme = ClassScheme::Six) {
  switch (t) {
    case RevisionType::Claim:
      return "Claim";
    case RevisionType::Reasoning:
      return "Reasoning";
    case RevisionType::Evidence:
      return "Evidence";
    case RevisionType::General:
      if (scheme == ClassScheme::Three) return "Content";
      if (scheme == ClassScheme::Four) return "Support";
      return "General";
    case RevisionType::Surface:
      return "Surface";
    case RevisionType::Nochange:
      return "Nochange";
  }
  return "?";
}

/// Accepts the six fine names plus the coarse "Content" and "Support".
inline std::optional<RevisionType> parse_type(std::string_view s) {
  if (s == "Claim") return RevisionType::Claim;
  if (s == "Reasoning") return RevisionType::Reasoning;
  if (s == "Evidence") return RevisionType::Evidence;
  if (s == "General" || s == "Content" || s == "Support") return RevisionType::General;
  if (s == "Surface") return RevisionType::Surface;
  if (s == "Nochange") return RevisionType::Nochange;
  return std::nullopt;
}

inline std::string scheme_name(ClassScheme s) {
  switch (s) {
    case ClassScheme::Six:
      return "Six";
    case ClassScheme::Four:
      return "Four";
    case ClassScheme::Three:
      return "Three";
  }
  return "?";
}

inline std::optional<ClassScheme> parse_scheme(std::string_view s) {
  if (s == "Six" || s == "6") return ClassScheme::Six;
  if (s == "Four" || s == "4") return ClassScheme::Four;
  if (s == "Three" || s == "3") return ClassScheme::Three;
  return std::nullopt;
}

inline std::string op_name(RevisionOp op) {
  switch (op) {
    case RevisionOp::Add:
      return "Add";
    case RevisionOp::Delete:
      return "Delete";
    case RevisionOp::Modify:
      return "Modify";
    case RevisionOp::Nochange:
      return "Nochange";
  }
  return "?";
}

inline std::optional<RevisionOp> parse_op(std::string_view s) {
  if (s == "Add") return RevisionOp::Add;
  if (s == "Delete") return RevisionOp::Delete;
  if (s == "Modify") return RevisionOp::Modify;
  if (s == "Nochange") return RevisionOp::Nochange;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Documents

struct Sentence {
  std::string text;
  std::vector<std::string> tokens;
  std::vector<std::string> pos_tags;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

/// Builds a sentence from raw text with the fallback tokenizer.
inline Sentence make_sentence(std::string text, const PosTagger& tagger = DegenerateTagger{}) {
  Sentence s;
  s.tokens = tokenize(text);
  s.pos_tags = tagger.tag(s.tokens);
  s.text = std::move(text);
  return s;
}

inline SentenceStats sentence_stats(const Sentence& s) { return sentence_stats(s.tokens); }

struct ParagraphPair {
  std::vector<Sentence> d1_sentences;
  std::vector<Sentence> d2_sentences;
  std::string pair_id;

  std::size_t m() const noexcept { return d1_sentences.size(); }
  std::size_t n() const noexcept { return d2_sentences.size(); }

  friend bool operator==(const ParagraphPair&, const ParagraphPair&) = default;
};

struct DraftPair {
  std::string essay_id;
  std::string student_id;
  std::vector<ParagraphPair> paragraph_pairs;

  friend bool operator==(const DraftPair&, const DraftPair&) = default;
};

using Corpus = std::vector<DraftPair>;

// ---------------------------------------------------------------------------
// Revisions

struct Revision {
  std::optional<std::size_t> d1_index;  // 1-based
  std::optional<std::size_t> d2_index;  // 1-based
  RevisionOp op = RevisionOp::Nochange;
  RevisionType rev_type = RevisionType::Nochange;

  friend bool operator==(const Revision&, const Revision&) = default;
  friend auto operator<=>(const Revision&, const Revision&) = default;
};

inline std::string to_string(const Revision& r, ClassScheme scheme = ClassScheme::Six) {
  auto idx = [](const std::optional<std::size_t>& i) {
    return i ? std::to_string(*i) : std::string("Null");
  };
  return "(" + idx(r.d1_index) + "," + idx(r.d2_index) + "," + op_name(r.op) + "," +
         type_name(r.rev_type, scheme) + ")";
}

inline std::vector<Revision> apply_scheme(std::vector<Revision> revisions, ClassScheme scheme) {
  for (auto& r : revisions) r.rev_type = coarsen(r.rev_type, scheme);
  return revisions;
}

/// Checks the per-record invariants and the coverage bijection of a revision
/// list against a paragraph pair. Throws DataError describing the first
/// violation.
inline void validate_revisions(const ParagraphPair& p, const std::vector<Revision>& revisions) {
  const std::string where = "pair " + p.pair_id + ": ";
  std::vector<int> cov1(p.m() + 1, 0), cov2(p.n() + 1, 0);
  std::vector<std::pair<std::size_t, std::size_t>> aligned;
  for (const auto& r : revisions) {
    const std::string rs = to_string(r);
    switch (r.op) {
      case RevisionOp::Add:
        if (r.d1_index || !r.d2_index)
          throw DataError(where + "Add needs only a D2 index " + rs);
        break;
      case RevisionOp::Delete:
        if (!r.d1_index || r.d2_index)
          throw DataError(where + "Delete needs only a D1 index " + rs);
        break;
      case RevisionOp::Modify:
      case RevisionOp::Nochange:
        if (!r.d1_index || !r.d2_index)
          throw DataError(where + op_name(r.op) + " needs both indices " + rs);
        break;
    }
    if ((r.op == RevisionOp::Nochange) != (r.rev_type == RevisionType::Nochange))
      throw DataError(where + "Nochange op and Nochange type must coincide " + rs);
    if (r.d1_index) {
      if (*r.d1_index < 1 || *r.d1_index > p.m())
        throw DataError(where + "d1_index out of range " + rs);
      if (++cov1[*r.d1_index] > 1) throw DataError(where + "D1 sentence covered twice " + rs);
    }
    if (r.d2_index) {
      if (*r.d2_index < 1 || *r.d2_index > p.n())
        throw DataError(where + "d2_index out of range " + rs);
      if (++cov2[*r.d2_index] > 1) throw DataError(where + "D2 sentence covered twice " + rs);
    }
    if (r.d1_index && r.d2_index) aligned.emplace_back(*r.d1_index, *r.d2_index);
  }
  for (std::size_t i = 1; i <= p.m(); ++i)
    if (cov1[i] == 0) throw DataError(where + "uncovered D1 sentence " + std::to_string(i));
  for (std::size_t j = 1; j <= p.n(); ++j)
    if (cov2[j] == 0) throw DataError(where + "uncovered D2 sentence " + std::to_string(j));
  std::sort(aligned.begin(), aligned.end());
  for (std::size_t k = 1; k < aligned.size(); ++k) {
    if (aligned[k].second <= aligned[k - 1].second)
      throw DataError(where + "crossing alignment (" + std::to_string(aligned[k - 1].first) + "," +
                      std::to_string(aligned[k - 1].second) + ") and (" +
                      std::to_string(aligned[k].first) + "," + std::to_string(aligned[k].second) +
                      ")");
  }
}

// ---------------------------------------------------------------------------
// File formats

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::vector<std::string> split_spaces(std::string_view s) {
  std::vector<std::string> out;
  for (auto& part : split(s, ' '))
    if (!part.empty()) out.push_back(std::move(part));
  return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

inline bool parse_index(std::string_view s, std::size_t& out) {
  if (s.empty() || s.size() > 9) return false;
  std::size_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + static_cast<std::size_t>(c - '0');
  }
  out = v;
  return true;
}

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace detail

/// Parses the corpus format. Tokens fall back to tokenize(text) and tags to
/// `tagger` when the optional columns are absent.
inline Corpus parse_corpus(std::istream& in, const std::string& name,
                           const PosTagger& tagger = DegenerateTagger{}) {
  Corpus corpus;
  std::set<std::string> essay_ids, pair_ids;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) { throw ParseError(name, lineno, msg); };

  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (line.empty()) continue;
    const auto cols = detail::split(line, '\t');
    if (cols[0] == "#essay") {
      if (cols.size() != 3) fail("#essay line needs essay_id and student_id");
      if (cols[1].empty()) fail("empty essay_id");
      if (cols[2].empty()) fail("empty student_id");
      if (!essay_ids.insert(cols[1]).second) fail("duplicate essay_id " + cols[1]);
      corpus.push_back(DraftPair{cols[1], cols[2], {}});
    } else if (cols[0] == "#para") {
      if (corpus.empty()) fail("#para before any #essay");
      if (cols.size() != 2 || cols[1].empty()) fail("#para line needs a pair_id");
      if (!pair_ids.insert(cols[1]).second) fail("duplicate pair_id " + cols[1]);
      corpus.back().paragraph_pairs.push_back(ParagraphPair{{}, {}, cols[1]});
    } else if (cols[0] == "D1" || cols[0] == "D2") {
      if (corpus.empty() || corpus.back().paragraph_pairs.empty())
        fail("sentence line before any #para");
      if (cols.size() != 3 && cols.size() != 5)
        fail("sentence line needs 3 or 5 columns, got " + std::to_string(cols.size()));
      auto& para = corpus.back().paragraph_pairs.back();
      auto& side = cols[0] == "D1" ? para.d1_sentences : para.d2_sentences;
      std::size_t index = 0;
      if (!detail::parse_index(cols[1], index)) fail("bad sentence index '" + cols[1] + "'");
      if (index != side.size() + 1)
        fail(cols[0] + " index " + cols[1] + " out of order, expected " +
             std::to_string(side.size() + 1));
      Sentence s;
      s.text = cols[2];
      if (cols.size() == 5) {
        s.tokens = detail::split_spaces(cols[3]);
        s.pos_tags = detail::split_spaces(cols[4]);
        if (s.tokens.size() != s.pos_tags.size())
          fail("|pos_tags| (" + std::to_string(s.pos_tags.size()) + ") != |tokens| (" +
               std::to_string(s.tokens.size()) + ")");
      } else {
        s.tokens = tokenize(s.text);
        s.pos_tags = tagger.tag(s.tokens);
      }
      if (s.tokens.empty() && !s.text.empty()) fail("nonempty text with no tokens");
      side.push_back(std::move(s));
    } else {
      fail("unrecognized line kind '" + cols[0] + "'");
    }
  }
  for (const auto& dp : corpus) {
    for (const auto& p : dp.paragraph_pairs) {
      if (p.m() == 0 && p.n() == 0)
        throw ParseError(name, lineno, "paragraph pair " + p.pair_id + " has no sentences");
    }
  }
  return corpus;
}

inline Corpus load_corpus(const std::string& path, const PosTagger& tagger = DegenerateTagger{}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);
  return parse_corpus(in, path, tagger);
}

inline void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& dp : corpus) {
    out << "#essay\t" << dp.essay_id << '\t' << dp.student_id << '\n';
    for (const auto& p : dp.paragraph_pairs) {
      out << "#para\t" << p.pair_id << '\n';
      auto side = [&](const char* tag, const std::vector<Sentence>& ss) {
        for (std::size_t i = 0; i < ss.size(); ++i) {
          out << tag << '\t' << (i + 1) << '\t' << ss[i].text << '\t'
              << detail::join(ss[i].tokens, " ") << '\t' << detail::join(ss[i].pos_tags, " ")
              << '\n';
        }
      };
      side("D1", p.d1_sentences);
      side("D2", p.d2_sentences);
    }
  }
}

/// pair_id -> revisions, in file order.
using Annotations = std::map<std::string, std::vector<Revision>>;

/// Parses annotations and validates them against `corpus`: every pair must
/// be covered exactly once on both sides.
inline Annotations parse_annotations(std::istream& in, const std::string& name,
                                     const Corpus& corpus) {
  std::map<std::string, const ParagraphPair*> pairs;
  for (const auto& dp : corpus)
    for (const auto& p : dp.paragraph_pairs) pairs.emplace(p.pair_id, &p);

  Annotations ann;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) { throw ParseError(name, lineno, msg); };
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    const auto cols = detail::split(line, '\t');
    if (cols.size() != 5) fail("annotation line needs 5 columns");
    auto it = pairs.find(cols[0]);
    if (it == pairs.end()) fail("unknown pair_id " + cols[0]);
    Revision r;
    auto index = [&](const std::string& s, std::optional<std::size_t>& out) {
      if (s == "-") return;
      std::size_t v = 0;
      if (!detail::parse_index(s, v)) fail("bad index '" + s + "'");
      out = v;
    };
    index(cols[1], r.d1_index);
    index(cols[2], r.d2_index);
    auto op = parse_op(cols[3]);
    if (!op) fail("bad op '" + cols[3] + "'");
    auto ty = parse_type(cols[4]);
    if (!ty) fail("bad revision type '" + cols[4] + "'");
    r.op = *op;
    r.rev_type = *ty;
    const auto& p = *it->second;
    if (r.d1_index && (*r.d1_index < 1 || *r.d1_index > p.m()))
      fail("d1_index " + cols[1] + " out of range (m=" + std::to_string(p.m()) + ")");
    if (r.d2_index && (*r.d2_index < 1 || *r.d2_index > p.n()))
      fail("d2_index " + cols[2] + " out of range (n=" + std::to_string(p.n()) + ")");
    ann[cols[0]].push_back(r);
  }
  for (const auto& [id, p] : pairs) {
    try {
      validate_revisions(*p, ann[id]);
    } catch (const DataError& e) {
      throw DataError(name + ": " + e.what());
    }
  }
  return ann;
}

inline Annotations load_annotations(const std::string& path, const Corpus& corpus) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open annotation file: " + path);
  return parse_annotations(in, path, corpus);
}

inline void write_annotations(std::ostream& out, const Annotations& ann,
                              ClassScheme scheme = ClassScheme::Six) {
  for (const auto& [id, revs] : ann) {
    for (const auto& r : revs) {
      out << id << '\t' << (r.d1_index ? std::to_string(*r.d1_index) : "-") << '\t'
          << (r.d2_index ? std::to_string(*r.d2_index) : "-") << '\t' << op_name(r.op) << '\t'
          << type_name(coarsen(r.rev_type, scheme), scheme) << '\n';
    }
  }
}

}  // namespace revjoint
