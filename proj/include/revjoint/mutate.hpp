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

// Joint identification by mutation search.
//
// A candidate EditSequence is labeled by the CRF. Wherever the op part of a
// predicted label disagrees with the candidate's op (a collision), and at
// the step with the lowest marginal likelihood, the candidate is rewritten
// by one of three local operators:
//
//   split   MM       -> MK KM
//   merge   MK KM    -> MM            KM MK -> MM
//           MK MM    -> MM MK         KM MM -> MM KM
//   flip    MK MM    -> KM MK MK      KM MM -> MK KM KM
//           MK KM    -> KM MK         KM MK -> MK KM
//
// Seeds form generation 1 and are always expanded; a later candidate is
// expanded only when its likelihood beats its parent's. The winner has the
// fewest collisions, then the highest likelihood.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "revjoint/crf.hpp"
#include "revjoint/editseq.hpp"
#include "revjoint/error.hpp"
#include "revjoint/features.hpp"
#include "revjoint/seedgen.hpp"

namespace revjoint {

struct Collision {
  std::size_t step_index = 0;
  EditOp candidate_op = EditOp::MM;
  EditOp predicted_op = EditOp::MM;

  friend bool operator==(const Collision&, const Collision&) = default;
};

struct LabeledCandidate {
  EditSequence candidate;
  LabeledSequence labeling;
  std::vector<Collision> collisions;
  int generation = 1;
  double parent_value = 0.0;  // compare value of the parent (generation > 1)
  bool expanded = false;
  SeedOrigin origin = SeedOrigin::OneBest;
};

struct SearchResult {
  LabeledCandidate best;
  std::vector<LabeledCandidate> trace;  // every labeled candidate, in labeling order
  std::vector<Revision> revisions;
  EditSequence labeled_sequence;  // winner's final (op, type) sequence

  /// Highest generation that was expanded.
  int generations() const {
    int g = 0;
    for (const auto& c : trace)
      if (c.expanded) g = std::max(g, c.generation);
    return g;
  }
};

inline std::vector<Collision> detect_collisions(const EditSequence& candidate,
                                                const LabeledSequence& labeling,
                                                const LabelAlphabet& alphabet) {
  if (candidate.size() != labeling.labels.size())
    throw DataError("collision check: candidate and labeling lengths differ");
  std::vector<Collision> out;
  for (std::size_t k = 0; k < candidate.size(); ++k) {
    const EditOp predicted = alphabet[labeling.labels[k]].op;
    if (predicted != candidate[k].op) out.push_back(Collision{k, candidate[k].op, predicted});
  }
  return out;
}

/// Applies one mutation operator to step `index`, moving its op to
/// `target`. Returns nullopt when the operator is inapplicable at that
/// position. Throws DataError for an invalid index or a no-op target.
/// Inserted steps carry the dummy Nochange type.
inline std::optional<EditSequence> mutate_step(const EditSequence& seq, std::size_t index,
                                               EditOp target) {
  if (index >= seq.size()) throw DataError("mutation index out of range");
  const EditOp cur = seq[index].op;
  if (cur == target) throw DataError("mutation target equals current op");

  std::vector<EditOp> ops = seq.ops();
  std::vector<RevisionType> types = seq.types();
  const auto N = RevisionType::Nochange;
  const bool has_next = index + 1 < seq.size();
  const EditOp next = has_next ? seq[index + 1].op : EditOp::MM;

  auto replace = [&](std::size_t count, std::vector<EditOp> with) {
    auto first = static_cast<std::ptrdiff_t>(index);
    ops.erase(ops.begin() + first, ops.begin() + first + static_cast<std::ptrdiff_t>(count));
    types.erase(types.begin() + first, types.begin() + first + static_cast<std::ptrdiff_t>(count));
    ops.insert(ops.begin() + first, with.begin(), with.end());
    types.insert(types.begin() + first, with.size(), N);
  };

  if (cur == EditOp::MM) {
    // split an alignment into a delete and an add
    replace(1, {EditOp::MK, EditOp::KM});
  } else if (target == EditOp::MM) {
    if (!has_next) return std::nullopt;
    const EditOp opposite = cur == EditOp::MK ? EditOp::KM : EditOp::MK;
    if (next == opposite) {
      replace(2, {EditOp::MM});
    } else if (next == EditOp::MM) {
      replace(2, {EditOp::MM, cur});
    } else {
      return std::nullopt;
    }
  } else {
    // MK <-> KM
    if (!has_next) return std::nullopt;
    if (next == EditOp::MM) {
      replace(2, {target, cur, cur});
    } else if (next == target) {
      replace(2, {target, cur});
    } else {
      return std::nullopt;
    }
  }
  return EditSequence::from_ops(seq.m(), seq.n(), ops, types);
}

namespace detail {

inline std::size_t min_likelihood_step(const LabeledSequence& labeling) {
  std::size_t arg = 0;
  for (std::size_t k = 1; k < labeling.step_likelihoods.size(); ++k)
    if (labeling.step_likelihoods[k] < labeling.step_likelihoods[arg]) arg = k;
  return arg;
}

}  // namespace detail

/// One mutation per collision (toward the predicted op) plus every
/// applicable mutation of the lowest-likelihood step; duplicates removed.
inline std::vector<EditSequence> propose_mutations(const LabeledCandidate& lc) {
  std::vector<EditSequence> out;
  std::set<std::string> seen;
  auto push = [&](std::optional<EditSequence> s) {
    if (!s) return;
    if (seen.insert(skeleton_string(*s)).second) out.push_back(std::move(*s));
  };
  for (const auto& c : lc.collisions) push(mutate_step(lc.candidate, c.step_index, c.predicted_op));
  if (!lc.candidate.empty()) {
    const std::size_t k = detail::min_likelihood_step(lc.labeling);
    for (EditOp target : kAllEditOps)
      if (target != lc.candidate[k].op) push(mutate_step(lc.candidate, k, target));
  }
  return out;
}

/// Final (op, type) sequence of a labeled candidate. When the predicted ops
/// form a valid sequence they are used as is; otherwise the candidate's ops
/// are kept. Types come from the labeling where its op agrees, else from
/// the most probable label sharing the kept op. KM/MK never keep the dummy
/// Nochange.
inline EditSequence resolve_labels(const EditSequence& candidate, const LabeledSequence& labeling,
                                   const LabelAlphabet& alphabet) {
  const std::size_t L = candidate.size();
  const std::size_t K = alphabet.size();
  std::vector<EditOp> predicted(L);
  for (std::size_t t = 0; t < L; ++t) predicted[t] = alphabet[labeling.labels[t]].op;
  std::vector<EditOp> ops = predicted;
  try {
    (void)EditSequence::from_ops(candidate.m(), candidate.n(), ops);
  } catch (const DataError&) {
    ops = candidate.ops();
  }
  std::vector<RevisionType> types(L);
  for (std::size_t t = 0; t < L; ++t) {
    const Label& lab = alphabet[labeling.labels[t]];
    const bool unaligned = ops[t] != EditOp::MM;
    if (lab.op == ops[t] && !(unaligned && lab.rev_type == RevisionType::Nochange)) {
      types[t] = lab.rev_type;
      continue;
    }
    double best = -1.0;
    RevisionType arg = unaligned ? alphabet.classes().front() : RevisionType::Nochange;
    for (std::size_t y = 0; y < K; ++y) {
      if (alphabet[y].op != ops[t]) continue;
      if (unaligned && alphabet[y].rev_type == RevisionType::Nochange) continue;
      const double p = labeling.marginals.empty() ? 0.0 : labeling.marginals[t * K + y];
      if (p > best) {
        best = p;
        arg = alphabet[y].rev_type;
      }
    }
    types[t] = arg;
  }
  return EditSequence::from_ops(candidate.m(), candidate.n(), ops, types);
}

struct SearchOptions {
  LikelihoodMode mode = LikelihoodMode::PerStep;
  /// Safety cap on labelings; the alignment memo already bounds the search
  /// by C(m+n, n).
  std::size_t max_labelings = 100000;
};

inline bool better_candidate(const LabeledCandidate& a, const LabeledCandidate& b,
                             LikelihoodMode mode, ClassScheme scheme) {
  if (a.collisions.size() != b.collisions.size()) return a.collisions.size() < b.collisions.size();
  const double va = a.labeling.compare_value(mode);
  const double vb = b.labeling.compare_value(mode);
  if (va != vb) return va > vb;
  return to_string(a.candidate, scheme) < to_string(b.candidate, scheme);
}

/// Generational mutation search. Candidates are memoized by the alignment
/// they encode, so at most C(m+n, n) labelings are performed.
inline SearchResult search(const SeedSet& seeds, const CrfModel& model,
                           const ParagraphFeatures& features, const SearchOptions& options = {}) {
  if (seeds.seeds.empty()) throw DataError("search needs at least one seed");
  const auto& alphabet = model.alphabet();
  SearchResult result;
  std::unordered_set<std::string> visited;

  auto label_one = [&](const EditSequence& seq, int generation, double parent_value,
                       SeedOrigin origin) -> std::optional<std::size_t> {
    if (!visited.insert(alignment_key(seq)).second) return std::nullopt;
    if (result.trace.size() >= options.max_labelings) return std::nullopt;
    LabeledCandidate lc;
    lc.candidate = seq;
    lc.labeling = label(model, seq, features);
    lc.collisions = detect_collisions(seq, lc.labeling, alphabet);
    lc.generation = generation;
    lc.parent_value = parent_value;
    lc.origin = origin;
    result.trace.push_back(std::move(lc));
    return result.trace.size() - 1;
  };

  std::vector<std::size_t> frontier;
  for (const auto& s : seeds.seeds) {
    if (auto idx = label_one(s.sequence, 1, 0.0, s.origin)) frontier.push_back(*idx);
  }
  int generation = 1;
  while (!frontier.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t idx : frontier) {
      result.trace[idx].expanded = true;
      const double parent_value = result.trace[idx].labeling.compare_value(options.mode);
      const SeedOrigin origin = result.trace[idx].origin;
      const auto proposals = propose_mutations(result.trace[idx]);
      for (const auto& child : proposals) {
        auto cidx = label_one(child, generation + 1, parent_value, origin);
        if (!cidx) continue;
        if (result.trace[*cidx].labeling.compare_value(options.mode) > parent_value)
          next.push_back(*cidx);
      }
    }
    frontier = std::move(next);
    ++generation;
  }

  std::size_t best = 0;
  for (std::size_t k = 1; k < result.trace.size(); ++k)
    if (better_candidate(result.trace[k], result.trace[best], options.mode, alphabet.scheme()))
      best = k;
  result.best = result.trace[best];
  result.labeled_sequence = resolve_labels(result.best.candidate, result.best.labeling, alphabet);
  result.revisions = decode(result.labeled_sequence);
  return result;
}

/// One line per labeled candidate:
///   generation, op-skeleton, collisions, raw loglik, normalized loglik,
///   expanded flag (TAB-separated).
inline std::string format_trace(const SearchResult& r) {
  std::string out;
  for (const auto& c : r.trace) {
    const double raw = c.labeling.seq_loglik;
    const double norm = c.labeling.compare_value(LikelihoodMode::PerStep);
    char buf[128];
    std::snprintf(buf, sizeof buf, "\t%zu\t%.6f\t%.6f\t%d\n", c.collisions.size(), raw, norm,
                  c.expanded ? 1 : 0);
    out += std::to_string(c.generation) + "\t" + skeleton_string(c.candidate) + buf;
  }
  return out;
}

}  // namespace revjoint
