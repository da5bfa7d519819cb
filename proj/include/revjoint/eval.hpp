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

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "revjoint/align.hpp"
#include "revjoint/corpus.hpp"
#include "revjoint/error.hpp"
#include "revjoint/pipeline.hpp"
#include "revjoint/seedgen.hpp"

namespace revjoint {

// ---------------------------------------------------------------------------
// Alignment accuracy

/// numerator = 2 * |agreed pairs| + agreed unaligned D1 + agreed unaligned
/// D2; accuracy = numerator / (d1_total + d2_total).
struct ExtractionScore {
  std::size_t agreed_pairs = 0;
  std::size_t agreed_unaligned_d1 = 0;
  std::size_t agreed_unaligned_d2 = 0;
  std::size_t d1_total = 0;
  std::size_t d2_total = 0;

  std::size_t numerator() const {
    return 2 * agreed_pairs + agreed_unaligned_d1 + agreed_unaligned_d2;
  }
  double agreed_alignments() const { return static_cast<double>(numerator()) / 2.0; }
  double accuracy() const {
    const std::size_t total = d1_total + d2_total;
    return total == 0 ? 1.0 : static_cast<double>(numerator()) / static_cast<double>(total);
  }

  ExtractionScore& operator+=(const ExtractionScore& o) {
    agreed_pairs += o.agreed_pairs;
    agreed_unaligned_d1 += o.agreed_unaligned_d1;
    agreed_unaligned_d2 += o.agreed_unaligned_d2;
    d1_total += o.d1_total;
    d2_total += o.d2_total;
    return *this;
  }
};

inline ExtractionScore alignment_accuracy(const Alignment& gold, const Alignment& pred) {
  if (gold.m != pred.m || gold.n != pred.n)
    throw DataError("alignment accuracy: paragraph sizes differ");
  gold.validate();
  pred.validate();
  ExtractionScore s;
  s.d1_total = gold.m;
  s.d2_total = gold.n;
  std::vector<char> g1(gold.m + 1, 0), g2(gold.n + 1, 0), p1(gold.m + 1, 0), p2(gold.n + 1, 0);
  const std::set<std::pair<std::size_t, std::size_t>> gset(gold.pairs.begin(), gold.pairs.end());
  for (const auto& [i, j] : gold.pairs) g1[i] = g2[j] = 1;
  for (const auto& pr : pred.pairs) {
    p1[pr.first] = p2[pr.second] = 1;
    if (gset.count(pr)) ++s.agreed_pairs;
  }
  for (std::size_t i = 1; i <= gold.m; ++i)
    if (!g1[i] && !p1[i]) ++s.agreed_unaligned_d1;
  for (std::size_t j = 1; j <= gold.n; ++j)
    if (!g2[j] && !p2[j]) ++s.agreed_unaligned_d2;
  return s;
}

// ---------------------------------------------------------------------------
// Revision classification

struct ClassScore {
  RevisionType type = RevisionType::Nochange;
  std::size_t correct = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;

  double precision() const {
    return predicted == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(predicted);
  }
  double recall() const {
    return gold == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(gold);
  }
  /// Classes absent from both gold and predictions take no part in macro
  /// averages.
  bool present() const { return predicted > 0 || gold > 0; }
};

struct ClassificationScore {
  ClassScheme scheme = ClassScheme::Six;
  std::vector<ClassScore> classes;  // scheme order

  explicit ClassificationScore(ClassScheme s = ClassScheme::Six) : scheme(s) {
    for (RevisionType t : scheme_classes(s)) classes.push_back(ClassScore{t, 0, 0, 0});
  }

  ClassScore& of(RevisionType t) {
    const RevisionType c = coarsen(t, scheme);
    for (auto& cs : classes)
      if (cs.type == c) return cs;
    throw DataError("type outside scheme");
  }
  const ClassScore& of(RevisionType t) const {
    return const_cast<ClassificationScore*>(this)->of(t);
  }

  double macro_precision(bool include_nochange = true) const {
    return macro([](const ClassScore& c) { return c.precision(); }, include_nochange);
  }
  double macro_recall(bool include_nochange = true) const {
    return macro([](const ClassScore& c) { return c.recall(); }, include_nochange);
  }

  ClassificationScore& operator+=(const ClassificationScore& o) {
    if (o.scheme != scheme) throw DataError("cannot add scores of different schemes");
    for (std::size_t k = 0; k < classes.size(); ++k) {
      classes[k].correct += o.classes[k].correct;
      classes[k].predicted += o.classes[k].predicted;
      classes[k].gold += o.classes[k].gold;
    }
    return *this;
  }

 private:
  template <typename Metric>
  double macro(Metric metric, bool include_nochange) const {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& c : classes) {
      if (!include_nochange && c.type == RevisionType::Nochange) continue;
      if (!c.present()) continue;
      sum += metric(c);
      ++count;
    }
    return count == 0 ? 1.0 : sum / static_cast<double>(count);
  }
};

/// A predicted revision is correct iff gold holds the identical
/// (d1_index, d2_index, op, type) tuple, types mapped to the scheme.
inline ClassificationScore classification_scores(const std::vector<Revision>& gold,
                                                 const std::vector<Revision>& pred,
                                                 ClassScheme scheme) {
  ClassificationScore s(scheme);
  const auto g = apply_scheme(gold, scheme);
  const auto p = apply_scheme(pred, scheme);
  const std::set<Revision> gset(g.begin(), g.end());
  for (const auto& r : g) ++s.of(r.rev_type).gold;
  for (const auto& r : p) {
    auto& c = s.of(r.rev_type);
    ++c.predicted;
    if (gset.count(r)) ++c.correct;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Corpus-level evaluation

struct EvalResult {
  ExtractionScore extraction;
  ClassificationScore classification;
};

/// Scores predictions against gold over every paragraph of the corpus.
/// Paragraphs missing from `pred` count as fully wrong only if gold has
/// them; missing gold is an error.
inline EvalResult evaluate(const std::vector<const ParagraphPair*>& paragraphs,
                           const Annotations& gold, const Annotations& pred, ClassScheme scheme) {
  EvalResult r{{}, ClassificationScore(scheme)};
  static const std::vector<Revision> kNone;
  for (const ParagraphPair* p : paragraphs) {
    auto g = gold.find(p->pair_id);
    if (g == gold.end()) throw DataError("no gold annotation for paragraph " + p->pair_id);
    auto q = pred.find(p->pair_id);
    const auto& pv = q == pred.end() ? kNone : q->second;
    r.extraction += alignment_accuracy(alignment_of(*p, g->second), alignment_of(*p, pv));
    r.classification += classification_scores(g->second, pv, scheme);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Cross-validation

enum class Approach { Baseline, OneBest, NCandidate };
inline constexpr std::array<Approach, 3> kAllApproaches = {Approach::Baseline, Approach::OneBest,
                                                           Approach::NCandidate};

inline std::string approach_name(Approach a) {
  switch (a) {
    case Approach::Baseline: return "Baseline";
    case Approach::OneBest: return "1Best";
    case Approach::NCandidate: return "+NCandidate";
  }
  return "?";
}

inline PredictMode approach_mode(Approach a) {
  switch (a) {
    case Approach::Baseline: return PredictMode::Pipeline;
    case Approach::OneBest: return PredictMode::JointOneBest;
    case Approach::NCandidate: return PredictMode::JointNCandidate;
  }
  return PredictMode::Pipeline;
}

struct ApproachScores {
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double mean_generations = 0.0;  // 0 for the baseline
};

struct FoldResult {
  std::size_t fold = 0;
  std::vector<std::string> test_students;
  std::size_t test_paragraphs = 0;
  std::array<ApproachScores, 3> scores{};
};

struct PairedTest {
  Approach a = Approach::NCandidate;
  Approach b = Approach::Baseline;
  std::string metric;
  double mean_difference = 0.0;
  double t = 0.0;
  double p_value = 1.0;
};

/// Two-sided paired t-test on per-fold differences a - b.
inline PairedTest paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw DataError("paired t-test needs >= 2 pairs");
  const double k = static_cast<double>(a.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= k;
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i] - mean) * (a[i] - b[i] - mean);
  const double sd = std::sqrt(ss / (k - 1.0));
  PairedTest r;
  r.mean_difference = mean;
  if (sd == 0.0) {
    r.t = mean == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), mean);
    r.p_value = mean == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t = mean / (sd / std::sqrt(k));
  boost::math::students_t dist(k - 1.0);
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

struct CvOptions {
  std::size_t folds = 10;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  bool include_nochange = true;
};

struct ExperimentReport {
  ClassScheme scheme = ClassScheme::Six;
  std::string config_hash;
  std::size_t requested_folds = 10;
  std::vector<FoldResult> folds;
  std::array<ApproachScores, 3> mean{};
  std::vector<PairedTest> tests;

  std::string tsv() const {
    std::ostringstream out;
    out << "# config " << config_hash << "\tscheme " << scheme_name(scheme) << "\tfolds "
        << folds.size() << '\n';
    out << "fold\tapproach\taccuracy\tmacro_precision\tmacro_recall\tmean_generations\n";
    auto row = [&](const std::string& fold, Approach a, const ApproachScores& s) {
      out << fold << '\t' << approach_name(a) << '\t' << fmt(s.accuracy) << '\t'
          << fmt(s.macro_precision) << '\t' << fmt(s.macro_recall) << '\t'
          << fmt(s.mean_generations) << '\n';
    };
    for (const auto& f : folds)
      for (Approach a : kAllApproaches)
        row(std::to_string(f.fold), a, f.scores[static_cast<std::size_t>(a)]);
    for (Approach a : kAllApproaches) row("mean", a, mean[static_cast<std::size_t>(a)]);
    out << "test\tmetric\tmean_difference\tt\tp\n";
    for (const auto& t : tests)
      out << approach_name(t.a) << "-" << approach_name(t.b) << '\t' << t.metric << '\t'
          << fmt(t.mean_difference) << '\t' << fmt(t.t) << '\t' << fmt(t.p_value) << '\n';
    return out.str();
  }

  std::string text() const {
    std::ostringstream out;
    char buf[160];
    out << "scheme " << scheme_name(scheme) << ", " << folds.size() << " folds";
    if (folds.size() != requested_folds) out << " (reduced from " << requested_folds << ")";
    out << ", config " << config_hash << "\n\n";
    std::snprintf(buf, sizeof buf, "%-12s %9s %9s %9s %11s\n", "approach", "accuracy",
                  "macro-P", "macro-R", "generations");
    out << buf;
    for (Approach a : kAllApproaches) {
      const auto& s = mean[static_cast<std::size_t>(a)];
      std::snprintf(buf, sizeof buf, "%-12s %9.4f %9.4f %9.4f %11.3f\n", approach_name(a).c_str(),
                    s.accuracy, s.macro_precision, s.macro_recall, s.mean_generations);
      out << buf;
    }
    out << "\npaired t-tests over folds\n";
    for (const auto& t : tests) {
      const std::string name = approach_name(t.a) + " vs " + approach_name(t.b);
      std::snprintf(buf, sizeof buf, "%-26s %-9s diff %+8.4f  t %8.3f  p %.4f%s\n", name.c_str(),
                    t.metric.c_str(), t.mean_difference, t.t, t.p_value,
                    t.p_value < 0.05 ? "  *" : "");
      out << buf;
    }
    return out.str();
  }

 private:
  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
  }
};

/// Assigns students to k folds: sorted unique ids, Fisher-Yates shuffled
/// with `seed`, then dealt round-robin.
inline std::vector<std::vector<std::string>> student_folds(const Corpus& corpus, std::size_t k,
                                                           std::uint64_t seed) {
  std::set<std::string> ids;
  for (const auto& dp : corpus) ids.insert(dp.student_id);
  if (ids.size() < 2) throw DataError("cross-validation needs at least 2 students");
  std::vector<std::string> students(ids.begin(), ids.end());
  std::mt19937_64 rng(seed);
  for (std::size_t i = students.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(detail::unit_uniform(rng) * static_cast<double>(i + 1));
    std::swap(students[i], students[j]);
  }
  k = std::min(k, students.size());
  std::vector<std::vector<std::string>> folds(k);
  for (std::size_t i = 0; i < students.size(); ++i) folds[i % k].push_back(students[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

/// By-student k-fold cross-validation of the three approaches. Every fold
/// trains its own scorer, CRF and LSTM on the remaining students.
inline ExperimentReport cross_validate(const Corpus& corpus, const Annotations& annotations,
                                       RunConfig config, const CvOptions& options = {}) {
  if (options.folds < 2) throw DataError("cross-validation needs at least 2 folds");
  config.seed_mode = SeedMode::NCandidate;
  config.validate();
  const auto folds = student_folds(corpus, options.folds, options.seed);
  ExperimentReport report;
  report.scheme = config.scheme;
  report.config_hash = config.hash();
  report.requested_folds = options.folds;
  report.folds.resize(folds.size());

  parallel_for(folds.size(), options.jobs, [&](std::size_t f) {
    const std::set<std::string> test_ids(folds[f].begin(), folds[f].end());
    Corpus train, test;
    for (const auto& dp : corpus) (test_ids.count(dp.student_id) ? test : train).push_back(dp);
    const Models models = train_models(train, annotations, config);
    const auto paragraphs = paragraphs_of(test);
    FoldResult fr;
    fr.fold = f + 1;
    fr.test_students = folds[f];
    fr.test_paragraphs = paragraphs.size();
    for (Approach a : kAllApproaches) {
      const auto preds = predict_all(models, paragraphs, approach_mode(a), 1);
      Annotations pred;
      double generations = 0.0;
      for (std::size_t k = 0; k < paragraphs.size(); ++k) {
        pred[paragraphs[k]->pair_id] = preds[k].revisions;
        if (preds[k].search) generations += preds[k].search->generations();
      }
      const auto ev = evaluate(paragraphs, annotations, pred, config.scheme);
      auto& s = fr.scores[static_cast<std::size_t>(a)];
      s.accuracy = ev.extraction.accuracy();
      s.macro_precision = ev.classification.macro_precision(options.include_nochange);
      s.macro_recall = ev.classification.macro_recall(options.include_nochange);
      s.mean_generations =
          paragraphs.empty() ? 0.0 : generations / static_cast<double>(paragraphs.size());
    }
    report.folds[f] = std::move(fr);
  });

  const double k = static_cast<double>(report.folds.size());
  for (Approach a : kAllApproaches) {
    const auto ai = static_cast<std::size_t>(a);
    auto& m = report.mean[ai];
    for (const auto& f : report.folds) {
      m.accuracy += f.scores[ai].accuracy / k;
      m.macro_precision += f.scores[ai].macro_precision / k;
      m.macro_recall += f.scores[ai].macro_recall / k;
      m.mean_generations += f.scores[ai].mean_generations / k;
    }
  }
  auto series = [&](Approach a, double ApproachScores::*field) {
    std::vector<double> v;
    for (const auto& f : report.folds) v.push_back(f.scores[static_cast<std::size_t>(a)].*field);
    return v;
  };
  const std::pair<Approach, Approach> comparisons[] = {{Approach::NCandidate, Approach::Baseline},
                                                       {Approach::NCandidate, Approach::OneBest},
                                                       {Approach::OneBest, Approach::Baseline}};
  const std::pair<const char*, double ApproachScores::*> metrics[] = {
      {"accuracy", &ApproachScores::accuracy},
      {"precision", &ApproachScores::macro_precision},
      {"recall", &ApproachScores::macro_recall}};
  for (const auto& [a, b] : comparisons) {
    for (const auto& [name, field] : metrics) {
      PairedTest t = paired_t_test(series(a, field), series(b, field));
      t.a = a;
      t.b = b;
      t.metric = name;
      report.tests.push_back(t);
    }
  }
  return report;
}

}  // namespace revjoint
