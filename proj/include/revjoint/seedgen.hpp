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

// Seed candidates for the mutation search.
//
// One-best seeds come from the DP alignment. N-candidate seeds are sampled
// from a single-layer LSTM that reads the step features at the current
// cursors and emits a distribution over EditStep labels; sampled ops move
// the cursors for the next step.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>

#include "revjoint/align.hpp"
#include "revjoint/editseq.hpp"
#include "revjoint/error.hpp"
#include "revjoint/features.hpp"

namespace revjoint {

/// Canonical skeleton of an alignment with dummy Nochange types.
inline EditSequence one_best_seed(const ParagraphPair& p, const Alignment& alignment) {
  if (alignment.m != p.m() || alignment.n != p.n())
    throw DataError("alignment does not match paragraph " + p.pair_id);
  alignment.validate();
  return encode_alignment(p.m(), p.n(), alignment.pairs);
}

// ---------------------------------------------------------------------------
// LSTM

struct LstmShape {
  std::size_t input = 0;
  std::size_t hidden = 100;
  std::size_t labels = 0;

  // flat layout: Wx (4H x F), Wh (4H x H), b (4H), Wy (K x H), by (K);
  // gate order within the 4H block: input, forget, output, candidate
  std::size_t wx() const { return 0; }
  std::size_t wh() const { return 4 * hidden * input; }
  std::size_t b() const { return wh() + 4 * hidden * hidden; }
  std::size_t wy() const { return b() + 4 * hidden; }
  std::size_t by() const { return wy() + labels * hidden; }
  std::size_t total() const { return by() + labels; }
};

struct LstmModel {
  LstmShape shape;
  ClassScheme scheme = ClassScheme::Six;
  std::vector<double> params;
  std::string config_hash;
};

namespace lstm {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Input squashing applied to raw feature values.
inline double squash(double v) { return v >= 0 ? std::log1p(v) : -std::log1p(-v); }

struct StepState {
  std::vector<double> gates;  // activated i, f, o, g (4H)
  std::vector<double> c;
  std::vector<double> h;
  std::vector<double> probs;  // K
};

/// One LSTM step from (h_prev, c_prev) with sparse input x.
inline void step(std::span<const double> P, const LstmShape& s, const SparseVector& x,
                 std::span<const double> h_prev, std::span<const double> c_prev, StepState& out) {
  const std::size_t H = s.hidden, F = s.input, K = s.labels;
  std::vector<double> z(P.begin() + s.b(), P.begin() + s.b() + 4 * H);
  for (const auto& [f, v] : x) {
    if (f >= F) throw DataError("LSTM input index out of range");
    const double xv = squash(v);
    for (std::size_t r = 0; r < 4 * H; ++r) z[r] += P[s.wx() + r * F + f] * xv;
  }
  for (std::size_t r = 0; r < 4 * H; ++r) {
    const double* row = &P[s.wh() + r * H];
    double acc = 0.0;
    for (std::size_t k = 0; k < H; ++k) acc += row[k] * h_prev[k];
    z[r] += acc;
  }
  out.gates.resize(4 * H);
  out.c.resize(H);
  out.h.resize(H);
  for (std::size_t k = 0; k < H; ++k) {
    out.gates[k] = sigmoid(z[k]);
    out.gates[H + k] = sigmoid(z[H + k]);
    out.gates[2 * H + k] = sigmoid(z[2 * H + k]);
    out.gates[3 * H + k] = std::tanh(z[3 * H + k]);
    out.c[k] = out.gates[H + k] * c_prev[k] + out.gates[k] * out.gates[3 * H + k];
    out.h[k] = out.gates[2 * H + k] * std::tanh(out.c[k]);
  }
  out.probs.assign(K, 0.0);
  double mx = -1e300;
  for (std::size_t y = 0; y < K; ++y) {
    double acc = P[s.by() + y];
    const double* row = &P[s.wy() + y * H];
    for (std::size_t k = 0; k < H; ++k) acc += row[k] * out.h[k];
    out.probs[y] = acc;
    mx = std::max(mx, acc);
  }
  double sum = 0.0;
  for (double& v : out.probs) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : out.probs) v /= sum;
}

/// Summed cross-entropy of `labels` and its gradient by backpropagation
/// through time. `grad` is resized and overwritten.
inline double loss_and_gradient(std::span<const double> P, const LstmShape& s,
                                std::span<const SparseVector> rows,
                                std::span<const std::size_t> labels, std::vector<double>& grad) {
  const std::size_t H = s.hidden, F = s.input, K = s.labels, T = rows.size();
  if (labels.size() != T) throw DataError("LSTM rows/labels length mismatch");
  grad.assign(s.total(), 0.0);
  std::vector<StepState> st(T);
  const std::vector<double> zeros(H, 0.0);
  double loss = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    step(P, s, rows[t], t ? std::span<const double>(st[t - 1].h) : zeros,
         t ? std::span<const double>(st[t - 1].c) : zeros, st[t]);
    loss -= std::log(std::max(st[t].probs[labels[t]], 1e-300));
  }
  std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0), dh(H), dz(4 * H);
  for (std::size_t t = T; t-- > 0;) {
    const auto& cur = st[t];
    const auto& c_prev = t ? st[t - 1].c : zeros;
    const auto& h_prev = t ? st[t - 1].h : zeros;
    dh = dh_next;
    for (std::size_t y = 0; y < K; ++y) {
      const double dlogit = cur.probs[y] - (y == labels[t] ? 1.0 : 0.0);
      grad[s.by() + y] += dlogit;
      for (std::size_t k = 0; k < H; ++k) {
        grad[s.wy() + y * H + k] += dlogit * cur.h[k];
        dh[k] += dlogit * P[s.wy() + y * H + k];
      }
    }
    for (std::size_t k = 0; k < H; ++k) {
      const double i = cur.gates[k], f = cur.gates[H + k], o = cur.gates[2 * H + k],
                   g = cur.gates[3 * H + k];
      const double tc = std::tanh(cur.c[k]);
      const double dc = dc_next[k] + dh[k] * o * (1.0 - tc * tc);
      dz[k] = dc * g * i * (1.0 - i);
      dz[H + k] = dc * c_prev[k] * f * (1.0 - f);
      dz[2 * H + k] = dh[k] * tc * o * (1.0 - o);
      dz[3 * H + k] = dc * i * (1.0 - g * g);
      dc_next[k] = dc * f;
    }
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    for (std::size_t r = 0; r < 4 * H; ++r) {
      grad[s.b() + r] += dz[r];
      for (const auto& [f, v] : rows[t]) grad[s.wx() + r * F + f] += dz[r] * squash(v);
      for (std::size_t k = 0; k < H; ++k) {
        grad[s.wh() + r * H + k] += dz[r] * h_prev[k];
        dh_next[k] += dz[r] * P[s.wh() + r * H + k];
      }
    }
  }
  return loss;
}

}  // namespace lstm

struct LstmTrainOptions {
  int epochs = 1;
  int iterations = 100;  // one iteration = one sequence, round-robin
  std::size_t hidden = 100;
  double learning_rate = 0.01;
  double init_scale = 0.08;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
};

struct LstmTrainingSequence {
  std::vector<SparseVector> rows;
  std::vector<std::size_t> labels;
};

inline LstmModel init_lstm(std::size_t input, std::size_t hidden, std::size_t labels,
                           ClassScheme scheme, double init_scale, std::uint64_t seed) {
  LstmModel m;
  m.shape = LstmShape{input, hidden, labels};
  m.scheme = scheme;
  m.params.resize(m.shape.total());
  std::mt19937_64 rng(seed);
  for (double& v : m.params) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v = (2.0 * u - 1.0) * init_scale;
  }
  for (std::size_t k = 0; k < hidden; ++k) m.params[m.shape.b() + hidden + k] = 1.0;  // forget
  return m;
}

/// Mean per-sequence cross-entropy over a data set.
inline double lstm_mean_loss(const LstmModel& model, const std::vector<LstmTrainingSequence>& data) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  std::vector<double> g;
  for (const auto& seq : data)
    total += lstm::loss_and_gradient(model.params, model.shape, seq.rows, seq.labels, g);
  return total / static_cast<double>(data.size());
}

/// Adam with global-norm clipping; one update per training sequence.
inline LstmModel train_lstm(const std::vector<LstmTrainingSequence>& data, std::size_t input_dim,
                            const LabelAlphabet& alphabet, const LstmTrainOptions& opt = {},
                            std::vector<double>* loss_trace = nullptr) {
  if (data.empty()) throw DataError("LSTM training set is empty");
  LstmModel model = init_lstm(input_dim, opt.hidden, alphabet.size(), alphabet.scheme(),
                              opt.init_scale, opt.seed);
  const std::size_t D = model.shape.total();
  std::vector<double> m1(D, 0.0), m2(D, 0.0), g;
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  long t = 0;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    for (int it = 0; it < opt.iterations; ++it) {
      const auto& seq = data[static_cast<std::size_t>(it) % data.size()];
      if (seq.labels.empty()) continue;
      const double loss =
          lstm::loss_and_gradient(model.params, model.shape, seq.rows, seq.labels, g);
      if (!std::isfinite(loss))
        throw NumericError("LSTM training: non-finite loss at iteration " + std::to_string(it));
      if (loss_trace) loss_trace->push_back(loss);
      double norm = 0.0;
      for (double v : g) norm += v * v;
      norm = std::sqrt(norm);
      const double scale = norm > opt.clip_norm ? opt.clip_norm / norm : 1.0;
      ++t;
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
      for (std::size_t k = 0; k < D; ++k) {
        const double gk = g[k] * scale;
        if (gk == 0.0 && m1[k] == 0.0) continue;
        m1[k] = b1 * m1[k] + (1 - b1) * gk;
        m2[k] = b2 * m2[k] + (1 - b2) * gk * gk;
        model.params[k] -= opt.learning_rate * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + eps);
      }
    }
  }
  return model;
}

/// Label distribution at every step of a fixed label sequence (teacher
/// forcing over given rows). Used for inspection and tests.
inline std::vector<std::vector<double>> lstm_distributions(const LstmModel& model,
                                                           std::span<const SparseVector> rows) {
  std::vector<std::vector<double>> out;
  const std::vector<double> zeros(model.shape.hidden, 0.0);
  lstm::StepState prev, cur;
  prev.h = zeros;
  prev.c = zeros;
  for (const auto& x : rows) {
    lstm::step(model.params, model.shape, x, prev.h, prev.c, cur);
    out.push_back(cur.probs);
    std::swap(prev, cur);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Seed sets

enum class SeedOrigin { OneBest, Sampled };

struct Seed {
  EditSequence sequence;
  SeedOrigin origin = SeedOrigin::OneBest;
};

struct SeedSet {
  std::vector<Seed> seeds;
  bool exhausted = false;  // sampling cap hit before N distinct candidates

  /// Adds a seed unless its alignment is already present. Returns true if
  /// added.
  bool add(EditSequence seq, SeedOrigin origin) {
    const auto key = alignment_key(seq);
    for (const auto& s : seeds)
      if (alignment_key(s.sequence) == key) return false;
    seeds.push_back(Seed{std::move(seq), origin});
    return true;
  }
};

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits; stable across platforms.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Samples one op-skeleton: at each step the label distribution is masked
/// to ops that keep both cursors in range, renormalized and sampled.
inline EditSequence sample_skeleton(const LstmModel& model, const LabelAlphabet& alphabet,
                                    const ParagraphFeatures& features, std::mt19937_64& rng) {
  const std::size_t m = features.paragraph().m();
  const std::size_t n = features.paragraph().n();
  const std::size_t K = alphabet.size();
  if (model.shape.labels != K) throw DataError("LSTM/alphabet size mismatch");
  std::vector<EditOp> ops;
  const std::vector<double> zeros(model.shape.hidden, 0.0);
  lstm::StepState prev, cur;
  prev.h = zeros;
  prev.c = zeros;
  std::size_t i = 1, j = 1;
  std::vector<double> w(K);
  while (i <= m || j <= n) {
    lstm::step(model.params, model.shape, features.at(i, j), prev.h, prev.c, cur);
    double total = 0.0;
    for (std::size_t y = 0; y < K; ++y) {
      const EditOp op = alphabet[y].op;
      const bool ok = (!moves_d1(op) || i <= m) && (!moves_d2(op) || j <= n);
      w[y] = ok ? cur.probs[y] : 0.0;
      total += w[y];
    }
    std::size_t pick = K;
    if (total > 0.0 && std::isfinite(total)) {
      double u = detail::unit_uniform(rng) * total;
      for (std::size_t y = 0; y < K; ++y) {
        if (w[y] == 0.0) continue;
        pick = y;
        if (u < w[y]) break;
        u -= w[y];
      }
    }
    if (pick == K) {
      // all admissible labels underflowed; fall back to a uniform choice
      std::vector<std::size_t> admissible;
      for (std::size_t y = 0; y < K; ++y) {
        const EditOp op = alphabet[y].op;
        if ((!moves_d1(op) || i <= m) && (!moves_d2(op) || j <= n)) admissible.push_back(y);
      }
      pick = admissible[static_cast<std::size_t>(detail::unit_uniform(rng) *
                                                 static_cast<double>(admissible.size()))];
    }
    const EditOp op = alphabet[pick].op;
    ops.push_back(op);
    if (moves_d1(op)) ++i;
    if (moves_d2(op)) ++j;
    std::swap(prev, cur);
  }
  return EditSequence::from_ops(m, n, ops);
}

/// Collects up to `count` sampled candidates with distinct alignments,
/// canonicalized and typed with the dummy Nochange. Gives up after
/// 20 * count attempts and sets `exhausted`.
inline SeedSet sample_candidates(const LstmModel& model, const LabelAlphabet& alphabet,
                                 const ParagraphFeatures& features, std::size_t count,
                                 std::mt19937_64& rng) {
  SeedSet set;
  const std::size_t cap = 20 * count;
  std::size_t attempts = 0;
  while (set.seeds.size() < count && attempts < cap) {
    ++attempts;
    set.add(canonicalize(sample_skeleton(model, alphabet, features, rng)).skeleton(),
            SeedOrigin::Sampled);
  }
  set.exhausted = set.seeds.size() < count;
  return set;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline std::string base64_encode(const std::vector<double>& values) {
  static_assert(std::endian::native == std::endian::little, "model files assume little-endian");
  using namespace boost::archive::iterators;
  using It = base64_from_binary<transform_width<const char*, 6, 8>>;
  const char* bytes = reinterpret_cast<const char*>(values.data());
  const std::size_t len = values.size() * sizeof(double);
  std::string out(It(bytes), It(bytes + len));
  out.append((3 - len % 3) % 3, '=');
  return out;
}

inline std::vector<double> base64_decode(const std::string& text, std::size_t count) {
  using namespace boost::archive::iterators;
  using It = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
  std::string trimmed = text;
  std::size_t pad = 0;
  while (!trimmed.empty() && trimmed.back() == '=') {
    trimmed.pop_back();
    ++pad;
  }
  std::string bytes;
  try {
    bytes.assign(It(trimmed.cbegin()), It(trimmed.cend()));
  } catch (const std::exception&) {
    throw DataError("bad base64 payload");
  }
  if (bytes.size() < count * sizeof(double)) throw DataError("base64 payload too short");
  bytes.resize(count * sizeof(double));
  std::vector<double> out(count);
  std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

}  // namespace detail

/// Versioned text file: header lines, then one "matrix<TAB>name<TAB>rows
/// <TAB>cols" block per parameter group followed by base64 lines of the
/// little-endian doubles and an "end" line.
inline void write_lstm(std::ostream& out, const LstmModel& model) {
  const auto& s = model.shape;
  out << "revjoint-lstm\t1\n";
  out << "scheme\t" << scheme_name(model.scheme) << '\n';
  out << "config\t" << model.config_hash << '\n';
  out << "input\t" << s.input << "\nhidden\t" << s.hidden << "\nlabels\t" << s.labels << '\n';
  struct Block {
    const char* name;
    std::size_t offset, rows, cols;
  };
  const Block blocks[] = {{"Wx", s.wx(), 4 * s.hidden, s.input},
                          {"Wh", s.wh(), 4 * s.hidden, s.hidden},
                          {"b", s.b(), 4 * s.hidden, 1},
                          {"Wy", s.wy(), s.labels, s.hidden},
                          {"by", s.by(), s.labels, 1}};
  for (const auto& b : blocks) {
    out << "matrix\t" << b.name << '\t' << b.rows << '\t' << b.cols << '\n';
    std::vector<double> vals(model.params.begin() + static_cast<std::ptrdiff_t>(b.offset),
                             model.params.begin() + static_cast<std::ptrdiff_t>(b.offset + b.rows * b.cols));
    const auto text = detail::base64_encode(vals);
    for (std::size_t k = 0; k < text.size(); k += 76) out << text.substr(k, 76) << '\n';
    out << "end\n";
  }
}

inline LstmModel read_lstm(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> std::vector<std::string> {
    while (std::getline(in, line)) {
      ++lineno;
      detail::strip_cr(line);
      if (!line.empty()) return detail::split(line, '\t');
    }
    throw ParseError(source, lineno, "unexpected end of LSTM model file");
  };
  auto expect = [&](const std::string& key) {
    auto cols = next();
    if (cols[0] != key || cols.size() != 2)
      throw ParseError(source, lineno, "expected '" + key + "' line");
    return cols[1];
  };
  auto number = [&](const std::string& key) {
    std::size_t v = 0;
    if (!detail::parse_index(expect(key), v)) throw ParseError(source, lineno, "bad " + key);
    return v;
  };
  if (expect("revjoint-lstm") != "1") throw ParseError(source, lineno, "unsupported version");
  LstmModel model;
  auto scheme = parse_scheme(expect("scheme"));
  if (!scheme) throw ParseError(source, lineno, "bad scheme");
  model.scheme = *scheme;
  model.config_hash = expect("config");
  model.shape.input = number("input");
  model.shape.hidden = number("hidden");
  model.shape.labels = number("labels");
  const auto& s = model.shape;
  model.params.assign(s.total(), 0.0);
  const std::pair<const char*, std::size_t> blocks[] = {
      {"Wx", s.wx()}, {"Wh", s.wh()}, {"b", s.b()}, {"Wy", s.wy()}, {"by", s.by()}};
  const std::size_t sizes[] = {4 * s.hidden * s.input, 4 * s.hidden * s.hidden, 4 * s.hidden,
                               s.labels * s.hidden, s.labels};
  for (std::size_t k = 0; k < 5; ++k) {
    auto head = next();
    std::size_t rows = 0, cols = 0;
    if (head.size() != 4 || head[0] != "matrix" || head[1] != blocks[k].first ||
        !detail::parse_index(head[2], rows) || !detail::parse_index(head[3], cols) ||
        rows * cols != sizes[k])
      throw ParseError(source, lineno, std::string("bad header for matrix ") + blocks[k].first);
    std::string payload;
    while (true) {
      auto body = next();
      if (body[0] == "end") break;
      payload += body[0];
    }
    try {
      const auto vals = detail::base64_decode(payload, sizes[k]);
      std::copy(vals.begin(), vals.end(),
                model.params.begin() + static_cast<std::ptrdiff_t>(blocks[k].second));
    } catch (const DataError& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  return model;
}

}  // namespace revjoint
