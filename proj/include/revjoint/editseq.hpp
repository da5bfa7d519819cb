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

// Joint sequence representation of a paragraph's revisions.
//
// Two cursors walk the drafts. Every step either moves both (MM: the
// sentences under the cursors are aligned), keeps D1 and moves D2 (KM: the
// D2 sentence was added) or moves D1 and keeps D2 (MK: the D1 sentence was
// deleted). Each step carries a revision type, so one label sequence encodes
// both where and why a paragraph changed.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "revjoint/corpus.hpp"
#include "revjoint/error.hpp"

namespace revjoint {

enum class EditOp : std::uint8_t { MM, KM, MK };

inline constexpr std::array<EditOp, 3> kAllEditOps = {EditOp::MM, EditOp::KM, EditOp::MK};

inline constexpr bool moves_d1(EditOp op) noexcept { return op != EditOp::KM; }
inline constexpr bool moves_d2(EditOp op) noexcept { return op != EditOp::MK; }

inline std::string op_label(EditOp op) {
  switch (op) {
    case EditOp::MM:
      return "M-M";
    case EditOp::KM:
      return "K-M";
    case EditOp::MK:
      return "M-K";
  }
  return "?";
}

inline std::optional<EditOp> parse_edit_op(std::string_view s) {
  if (s == "M-M") return EditOp::MM;
  if (s == "K-M") return EditOp::KM;
  if (s == "M-K") return EditOp::MK;
  return std::nullopt;
}

struct EditStep {
  EditOp op = EditOp::MM;
  RevisionType rev_type = RevisionType::Nochange;
  std::size_t d1_pos = 1;  // cursor at step entry, 1-based
  std::size_t d2_pos = 1;

  friend bool operator==(const EditStep&, const EditStep&) = default;
};

/// An ordered list of steps over an m x n paragraph. Positions are stored on
/// each step and always equal the running cursor values of the op prefix.
class EditSequence {
 public:
  EditSequence() = default;

  /// Builds a sequence from ops and types, computing positions. Throws
  /// DataError if the ops do not consume exactly m D1 and n D2 sentences.
  static EditSequence from_ops(std::size_t m, std::size_t n, const std::vector<EditOp>& ops,
                               const std::vector<RevisionType>& types) {
    if (ops.size() != types.size()) throw DataError("ops/types length mismatch");
    EditSequence seq;
    seq.m_ = m;
    seq.n_ = n;
    seq.steps_.reserve(ops.size());
    std::size_t i = 1, j = 1;
    for (std::size_t k = 0; k < ops.size(); ++k) {
      seq.steps_.push_back(EditStep{ops[k], types[k], i, j});
      if (moves_d1(ops[k])) ++i;
      if (moves_d2(ops[k])) ++j;
      if (i > m + 1 || j > n + 1)
        throw DataError("cursor closure violated: step " + std::to_string(k + 1) +
                        " moves a cursor past the end of a " + std::to_string(m) + "x" +
                        std::to_string(n) + " paragraph");
    }
    if (i != m + 1 || j != n + 1)
      throw DataError("cursor closure violated: sequence consumes " + std::to_string(i - 1) +
                      "/" + std::to_string(m) + " D1 and " + std::to_string(j - 1) + "/" +
                      std::to_string(n) + " D2 sentences");
    return seq;
  }

  /// Same as from_ops with every type set to the dummy Nochange.
  static EditSequence from_ops(std::size_t m, std::size_t n, const std::vector<EditOp>& ops) {
    return from_ops(m, n, ops, std::vector<RevisionType>(ops.size(), RevisionType::Nochange));
  }

  std::size_t m() const noexcept { return m_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t size() const noexcept { return steps_.size(); }
  bool empty() const noexcept { return steps_.empty(); }
  const std::vector<EditStep>& steps() const noexcept { return steps_; }
  const EditStep& operator[](std::size_t k) const { return steps_[k]; }

  std::vector<EditOp> ops() const {
    std::vector<EditOp> out;
    out.reserve(steps_.size());
    for (const auto& s : steps_) out.push_back(s.op);
    return out;
  }

  std::vector<RevisionType> types() const {
    std::vector<RevisionType> out;
    out.reserve(steps_.size());
    for (const auto& s : steps_) out.push_back(s.rev_type);
    return out;
  }

  /// Copy with all types replaced by the dummy Nochange.
  EditSequence skeleton() const {
    EditSequence out = *this;
    for (auto& s : out.steps_) s.rev_type = RevisionType::Nochange;
    return out;
  }

  friend bool operator==(const EditSequence&, const EditSequence&) = default;

 private:
  std::vector<EditStep> steps_;
  std::size_t m_ = 0;
  std::size_t n_ = 0;
};

// ---------------------------------------------------------------------------
// Labels

struct Label {
  EditOp op = EditOp::MM;
  RevisionType rev_type = RevisionType::Nochange;

  friend bool operator==(const Label&, const Label&) = default;
};

inline std::string label_name(const Label& l, ClassScheme scheme = ClassScheme::Six) {
  return op_label(l.op) + "-" + type_name(l.rev_type, scheme);
}

/// The 3 x K label set of a class scheme, ordered op-major (MM, KM, MK) and
/// by scheme_classes() within each op.
class LabelAlphabet {
 public:
  LabelAlphabet() : LabelAlphabet(ClassScheme::Six) {}

  explicit LabelAlphabet(ClassScheme scheme) : scheme_(scheme), classes_(scheme_classes(scheme)) {
    for (EditOp op : kAllEditOps)
      for (RevisionType t : classes_) labels_.push_back(Label{op, t});
  }

  ClassScheme scheme() const noexcept { return scheme_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t class_count() const noexcept { return classes_.size(); }
  const std::vector<RevisionType>& classes() const noexcept { return classes_; }
  const Label& operator[](std::size_t k) const { return labels_.at(k); }
  const std::vector<Label>& labels() const noexcept { return labels_; }

  /// Index of a label; the type is coarsened to the scheme first.
  std::size_t index_of(const Label& l) const {
    const RevisionType t = coarsen(l.rev_type, scheme_);
    for (std::size_t c = 0; c < classes_.size(); ++c) {
      if (classes_[c] == t) return op_index(l.op) * classes_.size() + c;
    }
    throw DataError("label type not in alphabet");
  }

  std::string name(std::size_t k) const { return label_name(labels_.at(k), scheme_); }

  std::optional<std::size_t> parse(std::string_view s) const {
    for (std::size_t k = 0; k < labels_.size(); ++k)
      if (name(k) == s) return k;
    return std::nullopt;
  }

  friend bool operator==(const LabelAlphabet& a, const LabelAlphabet& b) {
    return a.scheme_ == b.scheme_;
  }

 private:
  static std::size_t op_index(EditOp op) { return static_cast<std::size_t>(op); }

  ClassScheme scheme_;
  std::vector<RevisionType> classes_;
  std::vector<Label> labels_;
};

// ---------------------------------------------------------------------------
// Serialization

/// Hyphenated labels separated by single spaces, e.g.
/// "M-M-Nochange K-M-Reasoning M-K-Reasoning M-M-Surface".
inline std::string to_string(const EditSequence& seq, ClassScheme scheme = ClassScheme::Six) {
  std::string out;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    if (k) out += ' ';
    out += label_name(Label{seq[k].op, seq[k].rev_type}, scheme);
  }
  return out;
}

/// Op-only form, e.g. "M-M K-M M-K M-M".
inline std::string skeleton_string(const EditSequence& seq) {
  std::string out;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    if (k) out += ' ';
    out += op_label(seq[k].op);
  }
  return out;
}

inline EditSequence parse_edit_sequence(std::string_view text, std::size_t m, std::size_t n) {
  std::vector<EditOp> ops;
  std::vector<RevisionType> types;
  for (const auto& tok : detail::split_spaces(text)) {
    if (tok.size() < 5 || tok[3] != '-') throw DataError("bad EditStep label '" + tok + "'");
    auto op = parse_edit_op(std::string_view(tok).substr(0, 3));
    auto ty = parse_type(std::string_view(tok).substr(4));
    if (!op || !ty) throw DataError("bad EditStep label '" + tok + "'");
    ops.push_back(*op);
    types.push_back(*ty);
  }
  return EditSequence::from_ops(m, n, ops, types);
}

// ---------------------------------------------------------------------------
// Transformations

using AlignedPairs = std::vector<std::pair<std::size_t, std::size_t>>;

/// Walks the cursors over a monotonic one-to-one alignment. At each gap
/// between consecutive aligned pairs, unaligned D2 sentences (KM) are emitted
/// before unaligned D1 sentences (MK). `type_of` supplies each step's type.
template <typename TypeOf>
EditSequence walk_alignment(std::size_t m, std::size_t n, const AlignedPairs& pairs,
                            TypeOf&& type_of) {
  std::vector<EditOp> ops;
  std::vector<RevisionType> types;
  ops.reserve(m + n);
  types.reserve(m + n);
  std::size_t i = 1, j = 1;
  auto flush_gap = [&](std::size_t i_end, std::size_t j_end) {
    for (; j < j_end; ++j) {
      ops.push_back(EditOp::KM);
      types.push_back(type_of(EditOp::KM, i, j));
    }
    for (; i < i_end; ++i) {
      ops.push_back(EditOp::MK);
      types.push_back(type_of(EditOp::MK, i, j));
    }
  };
  for (const auto& [a, b] : pairs) {
    if (a < i || b < j || a > m || b > n) throw DataError("alignment is not monotonic/in range");
    flush_gap(a, b);
    ops.push_back(EditOp::MM);
    types.push_back(type_of(EditOp::MM, i, j));
    ++i;
    ++j;
  }
  flush_gap(m + 1, n + 1);
  return EditSequence::from_ops(m, n, ops, types);
}

/// Canonical skeleton of an alignment with all types set to the dummy
/// Nochange.
inline EditSequence encode_alignment(std::size_t m, std::size_t n, AlignedPairs pairs) {
  std::sort(pairs.begin(), pairs.end());
  return walk_alignment(m, n, pairs,
                        [](EditOp, std::size_t, std::size_t) { return RevisionType::Nochange; });
}

inline bool sentences_identical(const Sentence& a, const Sentence& b) {
  if (a.text.empty() && b.text.empty()) return a.tokens == b.tokens;
  return a.text == b.text;
}

/// Revisions -> canonical EditSequence. Requires the coverage bijection, no
/// crossings, and that Nochange pairs are identical while Modify pairs
/// differ.
inline EditSequence encode(const ParagraphPair& p, const std::vector<Revision>& revisions) {
  validate_revisions(p, revisions);
  std::vector<std::optional<RevisionType>> add(p.n() + 1), del(p.m() + 1);
  std::vector<std::optional<RevisionType>> mod(p.m() + 1);
  AlignedPairs pairs;
  for (const auto& r : revisions) {
    if (r.op == RevisionOp::Add) {
      add[*r.d2_index] = r.rev_type;
    } else if (r.op == RevisionOp::Delete) {
      del[*r.d1_index] = r.rev_type;
    } else {
      const bool same =
          sentences_identical(p.d1_sentences[*r.d1_index - 1], p.d2_sentences[*r.d2_index - 1]);
      if (r.op == RevisionOp::Nochange && !same)
        throw DataError("pair " + p.pair_id + ": Nochange revision on differing sentences " +
                        to_string(r));
      if (r.op == RevisionOp::Modify && same)
        throw DataError("pair " + p.pair_id + ": Modify revision on identical sentences " +
                        to_string(r));
      mod[*r.d1_index] = r.rev_type;
      pairs.emplace_back(*r.d1_index, *r.d2_index);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return walk_alignment(p.m(), p.n(), pairs, [&](EditOp op, std::size_t i, std::size_t j) {
    switch (op) {
      case EditOp::MM:
        return *mod[i];
      case EditOp::KM:
        return *add[j];
      case EditOp::MK:
        return *del[i];
    }
    return RevisionType::Nochange;
  });
}

/// EditSequence -> revisions in step order. MM becomes Modify, or Nochange
/// when typed Nochange; MK becomes Delete; KM becomes Add.
inline std::vector<Revision> decode(const EditSequence& seq) {
  std::vector<Revision> out;
  out.reserve(seq.size());
  std::size_t i = 1, j = 1;
  for (const auto& s : seq.steps()) {
    if (s.d1_pos != i || s.d2_pos != j) throw DataError("EditStep positions are inconsistent");
    Revision r;
    r.rev_type = s.rev_type;
    switch (s.op) {
      case EditOp::MM:
        r.d1_index = i++;
        r.d2_index = j++;
        r.op = s.rev_type == RevisionType::Nochange ? RevisionOp::Nochange : RevisionOp::Modify;
        break;
      case EditOp::KM:
        r.d2_index = j++;
        r.op = RevisionOp::Add;
        break;
      case EditOp::MK:
        r.d1_index = i++;
        r.op = RevisionOp::Delete;
        break;
    }
    out.push_back(r);
  }
  if (i != seq.m() + 1 || j != seq.n() + 1) throw DataError("cursor closure violated in decode");
  return out;
}

/// Aligned (d1, d2) pairs implied by the MM steps.
inline AlignedPairs aligned_pairs(const EditSequence& seq) {
  AlignedPairs out;
  for (const auto& s : seq.steps())
    if (s.op == EditOp::MM) out.emplace_back(s.d1_pos, s.d2_pos);
  return out;
}

/// Reorders every run of unaligned steps to KM-before-MK, keeping each
/// step's type. Two sequences have the same alignment iff their canonical
/// skeletons are equal.
inline EditSequence canonicalize(const EditSequence& seq) {
  std::vector<EditOp> ops;
  std::vector<RevisionType> types;
  ops.reserve(seq.size());
  types.reserve(seq.size());
  std::vector<RevisionType> pending_del;
  auto flush = [&] {
    for (auto t : pending_del) {
      ops.push_back(EditOp::MK);
      types.push_back(t);
    }
    pending_del.clear();
  };
  for (const auto& s : seq.steps()) {
    if (s.op == EditOp::MK) {
      pending_del.push_back(s.rev_type);
    } else if (s.op == EditOp::KM) {
      ops.push_back(EditOp::KM);
      types.push_back(s.rev_type);
    } else {
      flush();
      ops.push_back(EditOp::MM);
      types.push_back(s.rev_type);
    }
  }
  flush();
  return EditSequence::from_ops(seq.m(), seq.n(), ops, types);
}

/// Compact key of the alignment an op-skeleton encodes.
inline std::string alignment_key(const EditSequence& seq) {
  std::string key;
  const EditSequence canonical = canonicalize(seq);
  for (const auto& s : canonical.steps())
    key.push_back(s.op == EditOp::MM ? '=' : (s.op == EditOp::KM ? '+' : '-'));
  return key;
}

/// C(m+n, n): the number of monotonic one-to-one alignments of an m x n
/// paragraph, equivalently of canonical op-skeletons.
inline std::uint64_t count_sequences(std::size_t m, std::size_t n) {
  if (m + n > 60) throw DataError("count_sequences overflow: m+n > 60");
  const std::size_t k = std::min(m, n);
  std::uint64_t c = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    // exact at every step; the product stays below 2^63 for m+n <= 60
    c = c * (m + n - k + i) / i;
  }
  return c;
}

}  // namespace revjoint
