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

// Baseline sentence alignment: a logistic aligned/not-aligned scorer over
// normalized edit distance, and a monotonic one-to-one global alignment DP.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "revjoint/corpus.hpp"
#include "revjoint/crf.hpp"
#include "revjoint/editseq.hpp"
#include "revjoint/error.hpp"
#include "revjoint/textmetrics.hpp"

namespace revjoint {

/// Logistic model sigmoid(weight * d + bias) where d is the normalized
/// edit distance between two sentences.
struct AlignScorer {
  double weight = 0.0;
  double bias = 0.0;
  EditGranularity granularity = EditGranularity::Char;
  bool lowercase = true;

  double feature(const Sentence& a, const Sentence& b) const {
    if (granularity == EditGranularity::Char) {
      if (lowercase) return normalized_levenshtein(ascii_lower(a.text), ascii_lower(b.text));
      return normalized_levenshtein(a.text, b.text);
    }
    if (lowercase) {
      return normalized_levenshtein(detail::lowered(a.tokens), detail::lowered(b.tokens));
    }
    return normalized_levenshtein(a.tokens, b.tokens);
  }

  double score(const Sentence& a, const Sentence& b) const {
    return 1.0 / (1.0 + std::exp(-(weight * feature(a, b) + bias)));
  }

  /// log sigmoid(z), stable for large |z|.
  double log_score(const Sentence& a, const Sentence& b) const {
    const double z = weight * feature(a, b) + bias;
    return z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
  }

  void write(std::ostream& out, const std::string& config_hash = "") const {
    out << "weight=" << detail::format_double(weight) << '\n';
    out << "bias=" << detail::format_double(bias) << '\n';
    out << "granularity=" << (granularity == EditGranularity::Char ? "char" : "token") << '\n';
    out << "lowercase=" << (lowercase ? 1 : 0) << '\n';
    out << "config=" << config_hash << '\n';
  }

  static AlignScorer read(std::istream& in, const std::string& source,
                          std::string* config_hash = nullptr) {
    AlignScorer s;
    bool has_w = false, has_b = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      detail::strip_cr(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError(source, lineno, "expected key=value");
      const std::string key = line.substr(0, eq);
      const std::string val = line.substr(eq + 1);
      if (key == "weight") {
        s.weight = detail::parse_double(val, source, lineno);
        has_w = true;
      } else if (key == "bias") {
        s.bias = detail::parse_double(val, source, lineno);
        has_b = true;
      } else if (key == "granularity") {
        if (val != "char" && val != "token") throw ParseError(source, lineno, "bad granularity");
        s.granularity = val == "char" ? EditGranularity::Char : EditGranularity::Token;
      } else if (key == "lowercase") {
        s.lowercase = val == "1";
      } else if (key == "config") {
        if (config_hash) *config_hash = val;
      } else {
        throw ParseError(source, lineno, "unknown key '" + key + "'");
      }
    }
    if (!has_w || !has_b) throw ParseError(source, lineno, "scorer needs weight and bias");
    return s;
  }
};

struct AlignExample {
  Sentence a;
  Sentence b;
  bool aligned = false;
};

/// Penalized negative log-likelihood of the logistic scorer, weight-only L2:
///   sum_k log(1 + exp(-y_k z_k)) + l2 * weight^2 / 2,  y in {-1, +1}.
/// Fills grad = (d/dweight, d/dbias) when given.
inline double logistic_objective(double weight, double bias, const std::vector<double>& features,
                                 const std::vector<bool>& aligned, double l2,
                                 double* grad = nullptr) {
  double f = 0.5 * l2 * weight * weight;
  double gw = l2 * weight, gb = 0.0;
  for (std::size_t k = 0; k < features.size(); ++k) {
    const double y = aligned[k] ? 1.0 : -1.0;
    const double m = y * (weight * features[k] + bias);
    f += m >= 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
    const double s = 1.0 / (1.0 + std::exp(m));  // sigmoid(-m)
    gw -= y * s * features[k];
    gb -= y * s;
  }
  if (grad) {
    grad[0] = gw;
    grad[1] = gb;
  }
  return f;
}

/// Fits the scorer by Newton's method to gradient tolerance 1e-6.
inline AlignScorer train_scorer(const std::vector<AlignExample>& examples, double l2 = 1.0,
                                EditGranularity granularity = EditGranularity::Char) {
  if (examples.empty()) throw DataError("alignment scorer: no training pairs");
  AlignScorer scorer;
  scorer.granularity = granularity;
  std::vector<double> x;
  std::vector<bool> y;
  x.reserve(examples.size());
  std::size_t pos = 0;
  for (const auto& e : examples) {
    x.push_back(scorer.feature(e.a, e.b));
    y.push_back(e.aligned);
    pos += e.aligned ? 1 : 0;
  }
  if (pos == 0 || pos == examples.size())
    throw DataError("alignment scorer: training pairs are all one class");

  double w = 0.0, b = 0.0;
  double g[2];
  double f = logistic_objective(w, b, x, y, l2, g);
  for (int iter = 0; iter < 200; ++iter) {
    if (std::max(std::abs(g[0]), std::abs(g[1])) < 1e-6) break;
    double hww = l2, hwb = 0.0, hbb = 1e-12;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double p = 1.0 / (1.0 + std::exp(-(w * x[k] + b)));
      const double v = p * (1.0 - p);
      hww += v * x[k] * x[k];
      hwb += v * x[k];
      hbb += v;
    }
    const double det = hww * hbb - hwb * hwb;
    double dw = -(hbb * g[0] - hwb * g[1]) / det;
    double db = -(-hwb * g[0] + hww * g[1]) / det;
    if (!std::isfinite(dw) || !std::isfinite(db)) {
      dw = -g[0];
      db = -g[1];
    }
    double step = 1.0;
    double gn[2];
    double fn = f;
    for (int ls = 0; ls < 50; ++ls) {
      fn = logistic_objective(w + step * dw, b + step * db, x, y, l2, gn);
      if (fn <= f + 1e-4 * step * (g[0] * dw + g[1] * db)) break;
      step *= 0.5;
    }
    w += step * dw;
    b += step * db;
    f = fn;
    g[0] = gn[0];
    g[1] = gn[1];
    if (!std::isfinite(f)) throw NumericError("alignment scorer: non-finite objective");
  }
  scorer.weight = w;
  scorer.bias = b;
  return scorer;
}

/// Positive pairs from Modify/Nochange revisions; an equal number of
/// negatives sampled uniformly from unaligned cross pairs of the same
/// paragraphs.
inline std::vector<AlignExample> scorer_training_pairs(const Corpus& corpus,
                                                       const Annotations& annotations,
                                                       std::mt19937_64& rng) {
  std::vector<AlignExample> pos;
  std::vector<std::pair<const ParagraphPair*, std::pair<std::size_t, std::size_t>>> negatives;
  for (const auto& dp : corpus) {
    for (const auto& p : dp.paragraph_pairs) {
      auto it = annotations.find(p.pair_id);
      if (it == annotations.end()) continue;
      std::vector<std::vector<char>> aligned(p.m() + 1, std::vector<char>(p.n() + 1, 0));
      for (const auto& r : it->second) {
        if (r.d1_index && r.d2_index) {
          aligned[*r.d1_index][*r.d2_index] = 1;
          pos.push_back(AlignExample{p.d1_sentences[*r.d1_index - 1],
                                     p.d2_sentences[*r.d2_index - 1], true});
        }
      }
      for (std::size_t i = 1; i <= p.m(); ++i)
        for (std::size_t j = 1; j <= p.n(); ++j)
          if (!aligned[i][j]) negatives.push_back({&p, {i, j}});
    }
  }
  std::vector<AlignExample> out = pos;
  const std::size_t want = std::min(pos.size(), negatives.size());
  // partial Fisher-Yates for a deterministic uniform sample
  for (std::size_t k = 0; k < want; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, negatives.size() - 1);
    std::swap(negatives[k], negatives[pick(rng)]);
    const auto& [p, ij] = negatives[k];
    out.push_back(AlignExample{p->d1_sentences[ij.first - 1], p->d2_sentences[ij.second - 1],
                               false});
  }
  return out;
}

/// Monotonic one-to-one sentence alignment of a paragraph pair.
struct Alignment {
  AlignedPairs pairs;  // sorted, 1-based
  std::size_t m = 0;
  std::size_t n = 0;

  void validate() const {
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto [i, j] = pairs[k];
      if (i < 1 || i > m || j < 1 || j > n) throw DataError("alignment pair out of range");
      if (k > 0 && (i <= pairs[k - 1].first || j <= pairs[k - 1].second))
        throw DataError("alignment is not monotonic one-to-one");
    }
  }

  friend bool operator==(const Alignment&, const Alignment&) = default;
};

inline Alignment alignment_of(const EditSequence& seq) {
  return Alignment{aligned_pairs(seq), seq.m(), seq.n()};
}

inline Alignment alignment_of(const ParagraphPair& p, const std::vector<Revision>& revisions) {
  Alignment a{{}, p.m(), p.n()};
  for (const auto& r : revisions)
    if (r.d1_index && r.d2_index) a.pairs.emplace_back(*r.d1_index, *r.d2_index);
  std::sort(a.pairs.begin(), a.pairs.end());
  return a;
}

inline constexpr double kDefaultGapPenalty = -0.6931471805599453;  // log(0.5)

struct AlignmentResult {
  Alignment alignment;
  double score = 0.0;
};

/// Maximizes sum of log score(i, j) over aligned pairs plus gap_penalty per
/// unaligned sentence. Ties prefer align, then skip-D1, then skip-D2.
inline AlignmentResult global_align_scored(const ParagraphPair& p, const AlignScorer& scorer,
                                           double gap_penalty = kDefaultGapPenalty) {
  const std::size_t m = p.m(), n = p.n();
  const double ninf = -std::numeric_limits<double>::infinity();
  std::vector<double> dp((m + 1) * (n + 1), ninf);
  std::vector<char> move((m + 1) * (n + 1), 0);  // 'A' align, 'D' skip D1, 'I' skip D2
  auto at = [&](std::size_t i, std::size_t j) -> double& { return dp[i * (n + 1) + j]; };
  at(0, 0) = 0.0;
  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t j = 0; j <= n; ++j) {
      if (i == 0 && j == 0) continue;
      double best = ninf;
      char mv = 0;
      if (i > 0 && j > 0) {
        const double v =
            at(i - 1, j - 1) + scorer.log_score(p.d1_sentences[i - 1], p.d2_sentences[j - 1]);
        if (v > best) {
          best = v;
          mv = 'A';
        }
      }
      if (i > 0) {
        const double v = at(i - 1, j) + gap_penalty;
        if (v > best) {
          best = v;
          mv = 'D';
        }
      }
      if (j > 0) {
        const double v = at(i, j - 1) + gap_penalty;
        if (v > best) {
          best = v;
          mv = 'I';
        }
      }
      at(i, j) = best;
      move[i * (n + 1) + j] = mv;
    }
  }
  AlignmentResult res;
  res.alignment.m = m;
  res.alignment.n = n;
  res.score = at(m, n);
  std::size_t i = m, j = n;
  while (i > 0 || j > 0) {
    const char mv = move[i * (n + 1) + j];
    if (mv == 'A') {
      res.alignment.pairs.emplace_back(i, j);
      --i;
      --j;
    } else if (mv == 'D') {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(res.alignment.pairs.begin(), res.alignment.pairs.end());
  return res;
}

inline Alignment global_align(const ParagraphPair& p, const AlignScorer& scorer,
                              double gap_penalty = kDefaultGapPenalty) {
  return global_align_scored(p, scorer, gap_penalty).alignment;
}

}  // namespace revjoint
