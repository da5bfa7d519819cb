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

// Training and prediction end to end, plus the on-disk model bundle:
//
//   config.txt    key=value run configuration and its hash
//   scorer.txt    sentence-alignment scorer
//   features.tsv  feature space
//   crf.model     CRF weights
//   lstm.model    seed generator (n-candidate bundles only)

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "revjoint/align.hpp"
#include "revjoint/corpus.hpp"
#include "revjoint/crf.hpp"
#include "revjoint/editseq.hpp"
#include "revjoint/error.hpp"
#include "revjoint/features.hpp"
#include "revjoint/mutate.hpp"
#include "revjoint/seedgen.hpp"

namespace revjoint {

enum class SeedMode { OneBest, NCandidate };

enum class PredictMode { Pipeline, JointOneBest, JointNCandidate };

inline std::string mode_name(PredictMode m) {
  switch (m) {
    case PredictMode::Pipeline: return "pipeline";
    case PredictMode::JointOneBest: return "joint-1best";
    case PredictMode::JointNCandidate: return "joint-ncand";
  }
  return "?";
}

inline std::optional<PredictMode> parse_mode(std::string_view s) {
  if (s == "pipeline") return PredictMode::Pipeline;
  if (s == "joint-1best") return PredictMode::JointOneBest;
  if (s == "joint-ncand") return PredictMode::JointNCandidate;
  return std::nullopt;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct RunConfig {
  ClassScheme scheme = ClassScheme::Six;
  SeedMode seed_mode = SeedMode::NCandidate;
  std::size_t candidates = 10;
  std::uint64_t seed = 1;
  LikelihoodMode likelihood = LikelihoodMode::PerStep;
  double crf_l2 = 1.0;
  int crf_max_iterations = 200;
  double crf_tolerance = 1e-4;
  std::size_t min_count = 2;
  FeatureConfig features;
  std::size_t lstm_hidden = 100;
  int lstm_epochs = 1;
  int lstm_iterations = 100;
  double lstm_learning_rate = 0.01;
  double scorer_l2 = 1.0;
  double gap_penalty = kDefaultGapPenalty;

  void validate() const {
    features.validate();
    if (candidates == 0) throw DataError("candidates must be >= 1");
    if (!(crf_l2 >= 0.0)) throw DataError("crf l2 must be >= 0");
    if (crf_max_iterations < 1) throw DataError("crf max iterations must be >= 1");
    if (!(crf_tolerance > 0.0)) throw DataError("crf tolerance must be > 0");
    if (min_count == 0) throw DataError("min_count must be >= 1");
    if (lstm_hidden == 0) throw DataError("lstm hidden size must be >= 1");
    if (lstm_epochs < 1 || lstm_iterations < 1) throw DataError("lstm epochs/iterations must be >= 1");
    if (!(lstm_learning_rate > 0.0)) throw DataError("lstm learning rate must be > 0");
    if (!(scorer_l2 >= 0.0)) throw DataError("scorer l2 must be >= 0");
    if (!(gap_penalty <= 0.0)) throw DataError("gap penalty must be <= 0");
  }

  /// Stable "key=value" lines; the hash is taken over exactly this text.
  std::string describe() const {
    std::string s;
    auto kv = [&](const std::string& k, const std::string& v) { s += k + "=" + v + "\n"; };
    kv("scheme", scheme_name(scheme));
    kv("seed_mode", seed_mode == SeedMode::OneBest ? "one-best" : "n-candidate");
    kv("candidates", std::to_string(candidates));
    kv("seed", std::to_string(seed));
    kv("likelihood", likelihood == LikelihoodMode::PerStep ? "per-step" : "raw");
    kv("crf.l2", detail::format_double(crf_l2));
    kv("crf.max_iterations", std::to_string(crf_max_iterations));
    kv("crf.tolerance", detail::format_double(crf_tolerance));
    kv("features.min_count", std::to_string(min_count));
    s += features.describe();
    kv("lstm.hidden", std::to_string(lstm_hidden));
    kv("lstm.epochs", std::to_string(lstm_epochs));
    kv("lstm.iterations", std::to_string(lstm_iterations));
    kv("lstm.learning_rate", detail::format_double(lstm_learning_rate));
    kv("scorer.l2", detail::format_double(scorer_l2));
    kv("align.gap_penalty", detail::format_double(gap_penalty));
    return s;
  }

  std::string hash() const { return hex64(fnv1a(describe())); }

  static RunConfig parse(std::istream& in, const std::string& source,
                         std::string* stored_hash = nullptr) {
    RunConfig c;
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& msg) { throw ParseError(source, lineno, msg); };
    auto num = [&](const std::string& v) -> std::size_t {
      std::size_t x = 0;
      if (!detail::parse_index(v, x)) fail("bad integer '" + v + "'");
      return x;
    };
    auto flag = [&](const std::string& v) {
      if (v != "0" && v != "1") fail("bad flag '" + v + "'");
      return v == "1";
    };
    while (std::getline(in, line)) {
      ++lineno;
      detail::strip_cr(line);
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail("expected key=value");
      const std::string k = line.substr(0, eq), v = line.substr(eq + 1);
      if (k == "scheme") {
        auto sc = parse_scheme(v);
        if (!sc) fail("bad scheme '" + v + "'");
        c.scheme = *sc;
      } else if (k == "seed_mode") {
        if (v != "one-best" && v != "n-candidate") fail("bad seed_mode '" + v + "'");
        c.seed_mode = v == "one-best" ? SeedMode::OneBest : SeedMode::NCandidate;
      } else if (k == "candidates") {
        c.candidates = num(v);
      } else if (k == "seed") {
        c.seed = num(v);
      } else if (k == "likelihood") {
        if (v != "per-step" && v != "raw") fail("bad likelihood mode '" + v + "'");
        c.likelihood = v == "raw" ? LikelihoodMode::Raw : LikelihoodMode::PerStep;
      } else if (k == "crf.l2") {
        c.crf_l2 = detail::parse_double(v, source, lineno);
      } else if (k == "crf.max_iterations") {
        c.crf_max_iterations = static_cast<int>(num(v));
      } else if (k == "crf.tolerance") {
        c.crf_tolerance = detail::parse_double(v, source, lineno);
      } else if (k == "features.min_count") {
        c.min_count = num(v);
      } else if (k == "features.unigram") {
        c.features.unigram = flag(v);
      } else if (k == "features.location") {
        c.features.location = flag(v);
      } else if (k == "features.textual") {
        c.features.textual = flag(v);
      } else if (k == "features.language") {
        c.features.language = flag(v);
      } else if (k == "features.edit_granularity") {
        if (v != "token" && v != "char") fail("bad edit granularity '" + v + "'");
        c.features.edit_granularity = v == "char" ? EditGranularity::Char : EditGranularity::Token;
      } else if (k == "lstm.hidden") {
        c.lstm_hidden = num(v);
      } else if (k == "lstm.epochs") {
        c.lstm_epochs = static_cast<int>(num(v));
      } else if (k == "lstm.iterations") {
        c.lstm_iterations = static_cast<int>(num(v));
      } else if (k == "lstm.learning_rate") {
        c.lstm_learning_rate = detail::parse_double(v, source, lineno);
      } else if (k == "scorer.l2") {
        c.scorer_l2 = detail::parse_double(v, source, lineno);
      } else if (k == "align.gap_penalty") {
        c.gap_penalty = detail::parse_double(v, source, lineno);
      } else if (k == "hash") {
        if (stored_hash) *stored_hash = v;
      } else {
        fail("unknown config key '" + k + "'");
      }
    }
    try {
      c.validate();
    } catch (const DataError& e) {
      throw ParseError(source, lineno, e.what());
    }
    return c;
  }
};

struct Models {
  RunConfig config;
  AlignScorer scorer;
  FeatureSpace space;
  CrfModel crf;
  std::optional<LstmModel> lstm;

  std::string hash() const { return config.hash(); }
};

struct TrainSummary {
  std::size_t sequences = 0;
  std::size_t steps = 0;
  std::size_t features = 0;
  CrfTrainReport crf;
  std::vector<double> lstm_loss;
};

/// Gold EditSequences and their step-level feature vectors for every
/// annotated paragraph.
struct GoldData {
  std::vector<const ParagraphPair*> paragraphs;
  std::vector<EditSequence> sequences;
  std::vector<std::vector<FeatureVector>> vectors;
};

inline GoldData gold_data(const Corpus& corpus, const Annotations& annotations,
                          const FeatureConfig& features) {
  GoldData g;
  for (const auto& dp : corpus) {
    for (const auto& p : dp.paragraph_pairs) {
      auto it = annotations.find(p.pair_id);
      if (it == annotations.end()) continue;
      EditSequence seq;
      try {
        seq = encode(p, it->second);
      } catch (const DataError& e) {
        throw DataError("paragraph " + p.pair_id + ": " + e.what());
      }
      std::vector<FeatureVector> rows;
      rows.reserve(seq.size());
      for (const auto& s : seq.steps()) rows.push_back(extract(p, s.d1_pos, s.d2_pos, features));
      g.paragraphs.push_back(&p);
      g.sequences.push_back(std::move(seq));
      g.vectors.push_back(std::move(rows));
    }
  }
  return g;
}

/// Trains the scorer, feature space, CRF and (for n-candidate configs) the
/// LSTM seed generator. Deterministic for a fixed config.
inline Models train_models(const Corpus& corpus, const Annotations& annotations,
                           const RunConfig& config, TrainSummary* summary = nullptr) {
  config.validate();
  Models models;
  models.config = config;
  const std::string hash = config.hash();

  std::mt19937_64 rng(config.seed);
  const auto examples = scorer_training_pairs(corpus, annotations, rng);
  models.scorer = train_scorer(examples, config.scorer_l2, EditGranularity::Char);

  const auto gold = gold_data(corpus, annotations, config.features);
  if (gold.sequences.empty()) throw DataError("no annotated paragraphs to train on");
  std::vector<FeatureVector> all;
  for (const auto& rows : gold.vectors) all.insert(all.end(), rows.begin(), rows.end());
  models.space = FeatureSpace::build(all, config.min_count);

  const LabelAlphabet alphabet(config.scheme);
  std::vector<crf::TrainingSequence> crf_data;
  std::vector<LstmTrainingSequence> lstm_data;
  std::size_t steps = 0;
  for (std::size_t k = 0; k < gold.sequences.size(); ++k) {
    crf::TrainingSequence ts;
    for (const auto& fv : gold.vectors[k]) ts.rows.push_back(models.space.project(fv));
    for (const auto& s : gold.sequences[k].steps())
      ts.labels.push_back(alphabet.index_of(Label{s.op, s.rev_type}));
    steps += ts.labels.size();
    lstm_data.push_back(LstmTrainingSequence{ts.rows, ts.labels});
    crf_data.push_back(std::move(ts));
  }

  CrfTrainOptions copt;
  copt.l2 = config.crf_l2;
  copt.lbfgs.max_iterations = config.crf_max_iterations;
  copt.lbfgs.gradient_tolerance = config.crf_tolerance;
  CrfTrainReport report;
  models.crf = train_crf(crf_data, alphabet, models.space.size(), copt, &report);
  models.crf.config_hash = hash;

  std::vector<double> lstm_loss;
  if (config.seed_mode == SeedMode::NCandidate) {
    LstmTrainOptions lopt;
    lopt.epochs = config.lstm_epochs;
    lopt.iterations = config.lstm_iterations;
    lopt.hidden = config.lstm_hidden;
    lopt.learning_rate = config.lstm_learning_rate;
    lopt.seed = config.seed;
    models.lstm = train_lstm(lstm_data, models.space.size(), alphabet, lopt, &lstm_loss);
    models.lstm->config_hash = hash;
  }

  if (summary) {
    summary->sequences = crf_data.size();
    summary->steps = steps;
    summary->features = models.space.size();
    summary->crf = std::move(report);
    summary->lstm_loss = std::move(lstm_loss);
  }
  return models;
}

struct ParagraphPrediction {
  std::vector<Revision> revisions;
  EditSequence labeled;
  std::optional<SearchResult> search;  // joint modes only
  std::size_t seeds = 0;
};

/// Per-paragraph RNG stream, independent of processing order.
inline std::uint64_t paragraph_seed(std::uint64_t seed, const std::string& pair_id) {
  return fnv1a(pair_id, fnv1a(std::to_string(seed)));
}

/// Builds the seed set for a joint mode: the 1-best seed, plus up to N
/// LSTM samples in n-candidate mode.
inline SeedSet build_seeds(const Models& models, const ParagraphPair& p,
                           const ParagraphFeatures& features, PredictMode mode) {
  SeedSet seeds;
  const auto alignment = global_align(p, models.scorer, models.config.gap_penalty);
  seeds.add(one_best_seed(p, alignment), SeedOrigin::OneBest);
  if (mode == PredictMode::JointNCandidate) {
    if (!models.lstm) throw DataError("joint-ncand needs a bundle trained with an LSTM");
    std::mt19937_64 rng(paragraph_seed(models.config.seed, p.pair_id));
    auto sampled = sample_candidates(*models.lstm, models.crf.alphabet(), features,
                                     models.config.candidates, rng);
    for (auto& s : sampled.seeds) seeds.add(std::move(s.sequence), SeedOrigin::Sampled);
    seeds.exhausted = sampled.exhausted;
  }
  return seeds;
}

inline ParagraphPrediction predict_paragraph(const Models& models, const ParagraphPair& p,
                                             PredictMode mode) {
  const ParagraphFeatures features(p, models.config.features, models.space);
  ParagraphPrediction out;
  if (mode == PredictMode::Pipeline) {
    const auto alignment = global_align(p, models.scorer, models.config.gap_penalty);
    const auto skeleton = one_best_seed(p, alignment);
    const auto labeling = label_fixed_skeleton(models.crf, skeleton, features);
    out.labeled = resolve_labels(skeleton, labeling, models.crf.alphabet());
    out.revisions = decode(out.labeled);
    out.seeds = 1;
    return out;
  }
  const auto seeds = build_seeds(models, p, features, mode);
  SearchOptions sopt;
  sopt.mode = models.config.likelihood;
  out.search = search(seeds, models.crf, features, sopt);
  out.labeled = out.search->labeled_sequence;
  out.revisions = out.search->revisions;
  out.seeds = seeds.seeds.size();
  return out;
}

/// Runs `fn(k)` for k in [0, count) on up to `jobs` threads. The first
/// exception is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) {
        try {
          fn(k);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

/// Every paragraph of `corpus`, in corpus order.
inline std::vector<const ParagraphPair*> paragraphs_of(const Corpus& corpus) {
  std::vector<const ParagraphPair*> out;
  for (const auto& dp : corpus)
    for (const auto& p : dp.paragraph_pairs) out.push_back(&p);
  return out;
}

inline std::vector<ParagraphPrediction> predict_all(const Models& models,
                                                    const std::vector<const ParagraphPair*>& ps,
                                                    PredictMode mode, std::size_t jobs = 1) {
  std::vector<ParagraphPrediction> out(ps.size());
  parallel_for(ps.size(), jobs, [&](std::size_t k) { out[k] = predict_paragraph(models, *ps[k], mode); });
  return out;
}

// ---------------------------------------------------------------------------
// Bundle

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("error writing " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

inline void save_bundle(const Models& models, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create bundle directory " + dir.string() + ": " + ec.message());
  const std::string hash = models.hash();

  detail::write_file(dir / "config.txt", models.config.describe() + "hash=" + hash + "\n");
  std::ostringstream scorer;
  models.scorer.write(scorer, hash);
  detail::write_file(dir / "scorer.txt", scorer.str());
  std::ostringstream feats;
  feats << "# config " << hash << '\n';
  models.space.write(feats);
  detail::write_file(dir / "features.tsv", feats.str());
  std::ostringstream crf;
  models.crf.write(crf, models.space);
  detail::write_file(dir / "crf.model", crf.str());
  if (models.lstm) {
    std::ostringstream lstm;
    write_lstm(lstm, *models.lstm);
    detail::write_file(dir / "lstm.model", lstm.str());
  } else {
    std::filesystem::remove(dir / "lstm.model", ec);
  }
}

/// Loads a bundle and checks that every artifact carries the hash of the
/// stored configuration.
inline Models load_bundle(const std::filesystem::path& dir) {
  Models models;
  const auto cfg_path = (dir / "config.txt").string();
  std::string stored;
  {
    std::istringstream in(detail::read_file(cfg_path));
    models.config = RunConfig::parse(in, cfg_path, &stored);
  }
  const std::string hash = models.hash();
  if (stored != hash)
    throw DataError(cfg_path + ": config hash " + stored + " does not match contents (" + hash + ")");
  auto mismatch = [&](const std::string& file, const std::string& got) {
    if (got != hash)
      throw DataError(file + ": config hash '" + got + "' does not match bundle config " + hash);
  };

  const auto scorer_path = (dir / "scorer.txt").string();
  {
    std::istringstream in(detail::read_file(scorer_path));
    std::string h;
    models.scorer = AlignScorer::read(in, scorer_path, &h);
    mismatch(scorer_path, h);
  }
  const auto feat_path = (dir / "features.tsv").string();
  {
    std::string text = detail::read_file(feat_path);
    const std::string prefix = "# config ";
    const auto eol = text.find('\n');
    if (text.compare(0, prefix.size(), prefix) != 0 || eol == std::string::npos)
      throw ParseError(feat_path, 1, "expected '# config <hash>' header");
    mismatch(feat_path, text.substr(prefix.size(), eol - prefix.size()));
    std::istringstream in(text.substr(eol + 1));
    models.space = FeatureSpace::read(in, feat_path);
  }
  const auto crf_path = (dir / "crf.model").string();
  {
    std::istringstream in(detail::read_file(crf_path));
    models.crf = CrfModel::read(in, models.space, crf_path);
    mismatch(crf_path, models.crf.config_hash);
    if (models.crf.alphabet().scheme() != models.config.scheme)
      throw DataError(crf_path + ": scheme does not match bundle config");
  }
  const auto lstm_path = dir / "lstm.model";
  if (std::filesystem::exists(lstm_path)) {
    std::istringstream in(detail::read_file(lstm_path));
    models.lstm = read_lstm(in, lstm_path.string());
    mismatch(lstm_path.string(), models.lstm->config_hash);
    if (models.lstm->shape.input != models.space.size() ||
        models.lstm->shape.labels != models.crf.num_labels())
      throw DataError(lstm_path.string() + ": shape does not match feature space/alphabet");
  } else if (models.config.seed_mode == SeedMode::NCandidate) {
    throw DataError("bundle " + dir.string() + " is missing lstm.model");
  }
  return models;
}

}  // namespace revjoint
