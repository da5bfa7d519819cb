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

// First-order linear-chain CRF over EditStep labels.
//
// score(y | x) = start[y_1] + sum_t emit(x_t, y_t) + sum_t trans[y_{t-1}, y_t]
// P(y | x)     = exp(score(y | x) - log Z(x))
//
// All inference runs in log space.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "revjoint/editseq.hpp"
#include "revjoint/error.hpp"
#include "revjoint/features.hpp"
#include "revjoint/lbfgs.hpp"

namespace revjoint {

/// How sequence likelihoods of different lengths are compared.
enum class LikelihoodMode { PerStep, Raw };

namespace detail {

inline double log_sum_exp(std::span<const double> v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const std::string& source, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError(source, line, "bad number '" + s + "'");
  return v;
}

}  // namespace detail

/// Output of labeling one candidate sequence.
struct LabeledSequence {
  std::vector<std::size_t> labels;       // alphabet indices
  std::vector<double> step_likelihoods;  // marginal of the assigned label
  std::vector<double> marginals;         // L x K posterior marginals
  double seq_loglik = 0.0;               // log P(labels | x)
  double log_z = 0.0;

  /// Likelihood used to compare candidates of possibly different length.
  double compare_value(LikelihoodMode mode) const {
    if (mode == LikelihoodMode::Raw || labels.empty()) return seq_loglik;
    return seq_loglik / static_cast<double>(labels.size());
  }
};

class CrfModel {
 public:
  CrfModel() = default;

  CrfModel(LabelAlphabet alphabet, std::size_t num_features, double l2 = 1.0)
      : alphabet_(std::move(alphabet)),
        num_features_(num_features),
        l2_(l2),
        params_(param_count(num_features, alphabet_.size()), 0.0) {}

  static std::size_t param_count(std::size_t num_features, std::size_t num_labels) {
    return num_features * num_labels + num_labels * num_labels + num_labels;
  }

  const LabelAlphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t num_labels() const noexcept { return alphabet_.size(); }
  std::size_t num_features() const noexcept { return num_features_; }
  double l2() const noexcept { return l2_; }

  /// Flat parameter vector: emission (F x K), transition (K x K), start (K).
  std::vector<double>& params() noexcept { return params_; }
  const std::vector<double>& params() const noexcept { return params_; }

  double& emission(std::size_t f, std::size_t y) { return params_[f * num_labels() + y]; }
  double emission(std::size_t f, std::size_t y) const { return params_[f * num_labels() + y]; }
  double& transition(std::size_t from, std::size_t to) {
    return params_[trans_offset() + from * num_labels() + to];
  }
  double transition(std::size_t from, std::size_t to) const {
    return params_[trans_offset() + from * num_labels() + to];
  }
  double& start(std::size_t y) { return params_[start_offset() + y]; }
  double start(std::size_t y) const { return params_[start_offset() + y]; }

  std::size_t trans_offset() const noexcept { return num_features_ * num_labels(); }
  std::size_t start_offset() const noexcept { return trans_offset() + num_labels() * num_labels(); }

  std::string config_hash;

  /// Versioned text format:
  ///   revjoint-crf<TAB>1, scheme, config, l2, features, labels header lines,
  ///   then E<TAB>feature<TAB>label<TAB>weight and
  ///   T<TAB>label<TAB>label<TAB>weight lines (from-label "<START>" holds
  ///   the start weights). Zero weights are omitted.
  void write(std::ostream& out, const FeatureSpace& space) const {
    if (space.size() != num_features_) throw DataError("feature space size mismatch");
    out << "revjoint-crf\t1\n";
    out << "scheme\t" << scheme_name(alphabet_.scheme()) << '\n';
    out << "config\t" << config_hash << '\n';
    out << "l2\t" << detail::format_double(l2_) << '\n';
    out << "features\t" << num_features_ << '\n';
    out << "labels";
    for (std::size_t y = 0; y < num_labels(); ++y) out << '\t' << alphabet_.name(y);
    out << '\n';
    for (std::size_t f = 0; f < num_features_; ++f)
      for (std::size_t y = 0; y < num_labels(); ++y)
        if (emission(f, y) != 0.0)
          out << "E\t" << space.names()[f] << '\t' << alphabet_.name(y) << '\t'
              << detail::format_double(emission(f, y)) << '\n';
    for (std::size_t y = 0; y < num_labels(); ++y)
      if (start(y) != 0.0)
        out << "T\t<START>\t" << alphabet_.name(y) << '\t' << detail::format_double(start(y))
            << '\n';
    for (std::size_t a = 0; a < num_labels(); ++a)
      for (std::size_t b = 0; b < num_labels(); ++b)
        if (transition(a, b) != 0.0)
          out << "T\t" << alphabet_.name(a) << '\t' << alphabet_.name(b) << '\t'
              << detail::format_double(transition(a, b)) << '\n';
  }

  static CrfModel read(std::istream& in, const FeatureSpace& space, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    auto next = [&](const std::string& key) {
      while (std::getline(in, line)) {
        ++lineno;
        detail::strip_cr(line);
        if (line.empty()) continue;
        auto cols = detail::split(line, '\t');
        if (cols[0] != key) throw ParseError(source, lineno, "expected '" + key + "' line");
        return cols;
      }
      throw ParseError(source, lineno, "unexpected end of file, expected '" + key + "'");
    };
    auto magic = next("revjoint-crf");
    if (magic.size() != 2 || magic[1] != "1")
      throw ParseError(source, lineno, "unsupported CRF model version");
    auto scheme_cols = next("scheme");
    auto scheme = scheme_cols.size() == 2 ? parse_scheme(scheme_cols[1]) : std::nullopt;
    if (!scheme) throw ParseError(source, lineno, "bad scheme");
    auto config = next("config");
    auto l2 = next("l2");
    auto feats = next("features");
    std::size_t nf = 0;
    if (feats.size() != 2 || !detail::parse_index(feats[1], nf) || nf != space.size())
      throw ParseError(source, lineno, "feature count does not match feature space");
    CrfModel model(LabelAlphabet(*scheme), nf,
                   l2.size() == 2 ? detail::parse_double(l2[1], source, lineno) : 1.0);
    model.config_hash = config.size() == 2 ? config[1] : "";
    auto labels = next("labels");
    if (labels.size() != model.num_labels() + 1)
      throw ParseError(source, lineno, "label alphabet size mismatch");
    for (std::size_t y = 0; y < model.num_labels(); ++y)
      if (labels[y + 1] != model.alphabet().name(y))
        throw ParseError(source, lineno, "label alphabet order mismatch");
    auto label_index = [&](const std::string& s) {
      auto k = model.alphabet().parse(s);
      if (!k) throw ParseError(source, lineno, "unknown label '" + s + "'");
      return *k;
    };
    while (std::getline(in, line)) {
      ++lineno;
      detail::strip_cr(line);
      if (line.empty()) continue;
      auto cols = detail::split(line, '\t');
      if (cols.size() != 4) throw ParseError(source, lineno, "weight line needs 4 columns");
      const double w = detail::parse_double(cols[3], source, lineno);
      if (cols[0] == "E") {
        auto f = space.find(cols[1]);
        if (!f) throw ParseError(source, lineno, "unknown feature '" + cols[1] + "'");
        model.emission(*f, label_index(cols[2])) = w;
      } else if (cols[0] == "T") {
        const std::size_t to = label_index(cols[2]);
        if (cols[1] == "<START>") {
          model.start(to) = w;
        } else {
          model.transition(label_index(cols[1]), to) = w;
        }
      } else {
        throw ParseError(source, lineno, "unknown line kind '" + cols[0] + "'");
      }
    }
    return model;
  }

 private:
  LabelAlphabet alphabet_;
  std::size_t num_features_ = 0;
  double l2_ = 1.0;
  std::vector<double> params_;
};

// ---------------------------------------------------------------------------
// Inference primitives. They take the flat parameter vector so that training
// can evaluate arbitrary points.

namespace crf {

struct Shape {
  std::size_t features;
  std::size_t labels;
  std::size_t trans_offset() const { return features * labels; }
  std::size_t start_offset() const { return trans_offset() + labels * labels; }
};

/// L x K emission scores.
inline std::vector<double> emission_scores(std::span<const double> params, const Shape& shape,
                                           std::span<const SparseVector> rows) {
  const std::size_t K = shape.labels;
  std::vector<double> out(rows.size() * K, 0.0);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    double* o = &out[t * K];
    for (const auto& [f, v] : rows[t]) {
      if (f >= shape.features) throw DataError("feature index out of range for CRF model");
      const double* w = &params[f * K];
      for (std::size_t y = 0; y < K; ++y) o[y] += v * w[y];
    }
  }
  return out;
}

/// Log forward table alpha (L x K).
inline std::vector<double> forward(std::span<const double> params, const Shape& shape,
                                   const std::vector<double>& emit, std::size_t len) {
  const std::size_t K = shape.labels;
  std::vector<double> alpha(len * K);
  std::vector<double> tmp(K);
  for (std::size_t y = 0; y < K; ++y) alpha[y] = params[shape.start_offset() + y] + emit[y];
  for (std::size_t t = 1; t < len; ++t) {
    for (std::size_t y = 0; y < K; ++y) {
      for (std::size_t a = 0; a < K; ++a)
        tmp[a] = alpha[(t - 1) * K + a] + params[shape.trans_offset() + a * K + y];
      alpha[t * K + y] = detail::log_sum_exp(tmp) + emit[t * K + y];
    }
  }
  return alpha;
}

/// Log backward table beta (L x K), beta[L-1] = 0.
inline std::vector<double> backward(std::span<const double> params, const Shape& shape,
                                    const std::vector<double>& emit, std::size_t len) {
  const std::size_t K = shape.labels;
  std::vector<double> beta(len * K, 0.0);
  std::vector<double> tmp(K);
  for (std::size_t t = len; t-- > 1;) {
    for (std::size_t a = 0; a < K; ++a) {
      for (std::size_t y = 0; y < K; ++y)
        tmp[y] = params[shape.trans_offset() + a * K + y] + emit[t * K + y] + beta[t * K + y];
      beta[(t - 1) * K + a] = detail::log_sum_exp(tmp);
    }
  }
  return beta;
}

inline double log_partition(const std::vector<double>& alpha, std::size_t len, std::size_t K) {
  if (len == 0) return 0.0;
  return detail::log_sum_exp(std::span<const double>(&alpha[(len - 1) * K], K));
}

/// Unnormalized score of a labeling.
inline double path_score(std::span<const double> params, const Shape& shape,
                         const std::vector<double>& emit, std::span<const std::size_t> labels) {
  const std::size_t K = shape.labels;
  if (labels.empty()) return 0.0;
  double s = params[shape.start_offset() + labels[0]] + emit[labels[0]];
  for (std::size_t t = 1; t < labels.size(); ++t)
    s += params[shape.trans_offset() + labels[t - 1] * K + labels[t]] + emit[t * K + labels[t]];
  return s;
}

/// Viterbi decoding. `allowed` (L x K, optional) restricts labels per step.
/// Ties prefer the lower label index.
inline std::vector<std::size_t> viterbi(std::span<const double> params, const Shape& shape,
                                        const std::vector<double>& emit, std::size_t len,
                                        const std::vector<char>* allowed = nullptr) {
  const std::size_t K = shape.labels;
  const double ninf = -std::numeric_limits<double>::infinity();
  if (len == 0) return {};
  std::vector<double> delta(len * K, ninf);
  std::vector<std::size_t> back(len * K, 0);
  auto ok = [&](std::size_t t, std::size_t y) { return !allowed || (*allowed)[t * K + y]; };
  for (std::size_t y = 0; y < K; ++y)
    if (ok(0, y)) delta[y] = params[shape.start_offset() + y] + emit[y];
  for (std::size_t t = 1; t < len; ++t) {
    for (std::size_t y = 0; y < K; ++y) {
      if (!ok(t, y)) continue;
      double best = ninf;
      std::size_t arg = 0;
      for (std::size_t a = 0; a < K; ++a) {
        const double v = delta[(t - 1) * K + a] + params[shape.trans_offset() + a * K + y];
        if (v > best) {
          best = v;
          arg = a;
        }
      }
      delta[t * K + y] = best + emit[t * K + y];
      back[t * K + y] = arg;
    }
  }
  std::vector<std::size_t> path(len);
  double best = ninf;
  for (std::size_t y = 0; y < K; ++y) {
    if (delta[(len - 1) * K + y] > best) {
      best = delta[(len - 1) * K + y];
      path[len - 1] = y;
    }
  }
  if (!std::isfinite(best)) throw DataError("no admissible labeling under the label mask");
  for (std::size_t t = len - 1; t > 0; --t) path[t - 1] = back[t * K + path[t]];
  return path;
}

/// Negative penalized conditional log-likelihood and its gradient over a
/// batch of labeled sequences.
struct TrainingSequence {
  std::vector<SparseVector> rows;
  std::vector<std::size_t> labels;
};

inline double objective(std::span<const double> params, const Shape& shape,
                        std::span<const TrainingSequence> data, double l2,
                        std::vector<double>& grad) {
  const std::size_t K = shape.labels;
  grad.assign(params.size(), 0.0);
  double nll = 0.0;
  for (const auto& seq : data) {
    const std::size_t L = seq.labels.size();
    if (L == 0) continue;
    const auto emit = emission_scores(params, shape, seq.rows);
    const auto alpha = forward(params, shape, emit, L);
    const auto beta = backward(params, shape, emit, L);
    const double logz = log_partition(alpha, L, K);
    nll -= path_score(params, shape, emit, seq.labels) - logz;

    // observed counts (negative) and expected counts (positive)
    for (std::size_t t = 0; t < L; ++t) {
      const std::size_t y = seq.labels[t];
      for (const auto& [f, v] : seq.rows[t]) grad[f * K + y] -= v;
      if (t == 0) {
        grad[shape.start_offset() + y] -= 1.0;
      } else {
        grad[shape.trans_offset() + seq.labels[t - 1] * K + y] -= 1.0;
      }
    }
    for (std::size_t t = 0; t < L; ++t) {
      for (std::size_t y = 0; y < K; ++y) {
        const double p = std::exp(alpha[t * K + y] + beta[t * K + y] - logz);
        if (p == 0.0) continue;
        for (const auto& [f, v] : seq.rows[t]) grad[f * K + y] += p * v;
        if (t == 0) grad[shape.start_offset() + y] += p;
      }
      if (t == 0) continue;
      for (std::size_t a = 0; a < K; ++a) {
        for (std::size_t y = 0; y < K; ++y) {
          const double p = std::exp(alpha[(t - 1) * K + a] +
                                    params[shape.trans_offset() + a * K + y] +
                                    emit[t * K + y] + beta[t * K + y] - logz);
          grad[shape.trans_offset() + a * K + y] += p;
        }
      }
    }
  }
  double reg = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    reg += params[k] * params[k];
    grad[k] += l2 * params[k];
  }
  return nll + 0.5 * l2 * reg;
}

}  // namespace crf

// ---------------------------------------------------------------------------
// Model-level operations

inline crf::Shape shape_of(const CrfModel& model) {
  return crf::Shape{model.num_features(), model.num_labels()};
}

/// log P(labels | rows) = score(labels) - log Z.
inline double sequence_loglik(const CrfModel& model, std::span<const std::size_t> labels,
                              std::span<const SparseVector> rows) {
  if (labels.size() != rows.size()) throw DataError("labels/features length mismatch");
  for (auto y : labels)
    if (y >= model.num_labels()) throw DataError("label outside alphabet");
  const auto shape = shape_of(model);
  const auto emit = crf::emission_scores(model.params(), shape, rows);
  const auto alpha = crf::forward(model.params(), shape, emit, labels.size());
  return crf::path_score(model.params(), shape, emit, labels) -
         crf::log_partition(alpha, labels.size(), model.num_labels());
}

/// Labels `rows` with Viterbi and reports marginals and likelihoods. When
/// `allowed` is given (L x K mask) decoding is restricted to it.
inline LabeledSequence label_rows(const CrfModel& model, std::span<const SparseVector> rows,
                                  const std::vector<char>* allowed = nullptr) {
  const auto shape = shape_of(model);
  const std::size_t L = rows.size();
  const std::size_t K = model.num_labels();
  LabeledSequence out;
  if (L == 0) return out;
  const auto emit = crf::emission_scores(model.params(), shape, rows);
  const auto alpha = crf::forward(model.params(), shape, emit, L);
  const auto beta = crf::backward(model.params(), shape, emit, L);
  out.log_z = crf::log_partition(alpha, L, K);
  out.labels = crf::viterbi(model.params(), shape, emit, L, allowed);
  out.seq_loglik = crf::path_score(model.params(), shape, emit, out.labels) - out.log_z;
  out.marginals.resize(L * K);
  out.step_likelihoods.resize(L);
  for (std::size_t t = 0; t < L; ++t) {
    for (std::size_t y = 0; y < K; ++y)
      out.marginals[t * K + y] = std::exp(alpha[t * K + y] + beta[t * K + y] - out.log_z);
    out.step_likelihoods[t] = out.marginals[t * K + out.labels[t]];
  }
  return out;
}

/// Labels a candidate sequence. The decoder ranges over the full alphabet,
/// so predicted ops may disagree with the candidate's ops.
inline LabeledSequence label(const CrfModel& model, const EditSequence& candidate,
                             const ParagraphFeatures& features) {
  const auto rows = features.for_sequence(candidate);
  return label_rows(model, rows);
}

/// Labels a fixed skeleton, restricting each step to labels with the
/// step's own op. Used by the pipeline baseline.
inline LabeledSequence label_fixed_skeleton(const CrfModel& model, const EditSequence& skeleton,
                                            const ParagraphFeatures& features) {
  const auto rows = features.for_sequence(skeleton);
  const std::size_t K = model.num_labels();
  std::vector<char> allowed(rows.size() * K, 0);
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t y = 0; y < K; ++y)
      allowed[t * K + y] = model.alphabet()[y].op == skeleton[t].op ? 1 : 0;
  return label_rows(model, rows, &allowed);
}

struct CrfTrainOptions {
  double l2 = 1.0;
  LbfgsOptions lbfgs{};
};

struct CrfTrainReport {
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;
};

/// Fits a CRF by L-BFGS on the penalized negative log-likelihood. Stops when
/// the gradient max-norm falls below the tolerance or after max_iterations.
inline CrfModel train_crf(const std::vector<crf::TrainingSequence>& data,
                          const LabelAlphabet& alphabet, std::size_t num_features,
                          const CrfTrainOptions& options = {}, CrfTrainReport* report = nullptr) {
  if (data.empty()) throw DataError("CRF training set is empty");
  for (const auto& s : data) {
    if (s.rows.size() != s.labels.size()) throw DataError("CRF training sequence length mismatch");
    for (auto y : s.labels)
      if (y >= alphabet.size()) throw DataError("CRF training label outside alphabet");
    for (const auto& r : s.rows)
      for (const auto& [f, v] : r)
        if (f >= num_features) throw DataError("CRF training feature outside feature space");
  }
  CrfModel model(alphabet, num_features, options.l2);
  const crf::Shape shape{num_features, alphabet.size()};
  auto fg = [&](const std::vector<double>& x, std::vector<double>& g) {
    return crf::objective(x, shape, data, options.l2, g);
  };
  auto res = lbfgs_minimize(fg, model.params(), options.lbfgs);
  model.params() = std::move(res.x);
  if (report) {
    report->iterations = res.iterations;
    report->converged = res.converged;
    report->objective_history = std::move(res.value_history);
  }
  return model;
}

}  // namespace revjoint
