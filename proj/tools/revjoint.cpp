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

// revjoint: train, predict, evaluate, cross-validate, mutate-trace and
// gen-synth subcommands. Data goes to stdout or --out files, logs to stderr.
// Exit codes: 0 ok, 1 usage, 2 data error, 3 numeric failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "revjoint/corpus.hpp"
#include "revjoint/eval.hpp"
#include "revjoint/mutate.hpp"
#include "revjoint/pipeline.hpp"
#include "revjoint/synth.hpp"
#include "revjoint/textmetrics.hpp"

namespace {

using namespace revjoint;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct ConfigFlags {
  std::string scheme = "Six";
  std::string seed_mode = "n-candidate";
  std::size_t candidates = 10;
  std::uint64_t seed = 1;
  std::string likelihood = "per-step";
  double l2 = 1.0;
  int max_iterations = 200;
  std::size_t min_count = 2;
  bool no_unigram = false, no_location = false, no_textual = false, no_language = false;
  std::string edit_granularity = "token";
  std::size_t lstm_hidden = 100;
  int lstm_iterations = 100;

  void attach(CLI::App* app) {
    app->add_option("--scheme", scheme, "Six, Four or Three")->capture_default_str();
    app->add_option("--seed-mode", seed_mode, "one-best or n-candidate")->capture_default_str();
    app->add_option("--candidates", candidates, "sampled seeds per paragraph")->capture_default_str();
    app->add_option("--seed", seed, "RNG seed")->capture_default_str();
    app->add_option("--likelihood", likelihood, "per-step or raw")->capture_default_str();
    app->add_option("--l2", l2, "CRF L2 strength")->capture_default_str();
    app->add_option("--max-iterations", max_iterations, "CRF L-BFGS iterations")
        ->capture_default_str();
    app->add_option("--min-count", min_count, "feature cutoff")->capture_default_str();
    app->add_flag("--no-unigram", no_unigram);
    app->add_flag("--no-location", no_location);
    app->add_flag("--no-textual", no_textual);
    app->add_flag("--no-language", no_language);
    app->add_option("--edit-granularity", edit_granularity, "token or char")->capture_default_str();
    app->add_option("--lstm-hidden", lstm_hidden)->capture_default_str();
    app->add_option("--lstm-iterations", lstm_iterations)->capture_default_str();
  }

  RunConfig build() const {
    RunConfig c;
    auto sc = parse_scheme(scheme);
    if (!sc) throw CLI::ValidationError("--scheme", "unknown scheme '" + scheme + "'");
    c.scheme = *sc;
    if (seed_mode != "one-best" && seed_mode != "n-candidate")
      throw CLI::ValidationError("--seed-mode", "expected one-best or n-candidate");
    c.seed_mode = seed_mode == "one-best" ? SeedMode::OneBest : SeedMode::NCandidate;
    c.candidates = candidates;
    c.seed = seed;
    if (likelihood != "per-step" && likelihood != "raw")
      throw CLI::ValidationError("--likelihood", "expected per-step or raw");
    c.likelihood = likelihood == "raw" ? LikelihoodMode::Raw : LikelihoodMode::PerStep;
    c.crf_l2 = l2;
    c.crf_max_iterations = max_iterations;
    c.min_count = min_count;
    c.features.unigram = !no_unigram;
    c.features.location = !no_location;
    c.features.textual = !no_textual;
    c.features.language = !no_language;
    if (edit_granularity != "token" && edit_granularity != "char")
      throw CLI::ValidationError("--edit-granularity", "expected token or char");
    c.features.edit_granularity =
        edit_granularity == "char" ? EditGranularity::Char : EditGranularity::Token;
    c.lstm_hidden = lstm_hidden;
    c.lstm_iterations = lstm_iterations;
    c.validate();
    return c;
  }
};

Corpus read_corpus(const std::string& path, const std::string& lexicon) {
  if (lexicon.empty()) return load_corpus(path);
  const auto tagger = LexiconTagger::from_file(lexicon);
  return load_corpus(path, tagger);
}

std::ostream& open_out(const std::string& path, std::unique_ptr<std::ofstream>& holder) {
  if (path.empty() || path == "-") return std::cout;
  holder = std::make_unique<std::ofstream>(path, std::ios::binary);
  if (!*holder) throw DataError("cannot write " + path);
  return *holder;
}

/// Accepts op-only tokens ("M-K") as well as full labels.
EditSequence parse_seed(const std::string& text, std::size_t m, std::size_t n) {
  std::string expanded;
  for (const auto& tok : detail::split_spaces(text)) {
    if (!expanded.empty()) expanded += ' ';
    expanded += tok.size() == 3 ? tok + "-Nochange" : tok;
  }
  return parse_edit_sequence(expanded, m, n).skeleton();
}

const ParagraphPair& find_pair(const Corpus& corpus, const std::string& id) {
  for (const auto& dp : corpus)
    for (const auto& p : dp.paragraph_pairs)
      if (p.pair_id == id) return p;
  throw DataError("no paragraph pair '" + id + "' in corpus");
}

int run(int argc, char** argv) {
  CLI::App app{"Joint sentence alignment and revision classification"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "train a model bundle");
  std::string corpus_path, ann_path, out_dir, lexicon;
  ConfigFlags train_cfg;
  train->add_option("--corpus", corpus_path)->required();
  train->add_option("--annotations", ann_path)->required();
  train->add_option("--out", out_dir, "bundle directory")->required();
  train->add_option("--lexicon", lexicon, "token<TAB>tag lexicon for untagged corpora");
  train_cfg.attach(train);

  // predict
  auto* predict = app.add_subcommand("predict", "label a corpus with a bundle");
  std::string bundle_dir, mode_name_opt = "joint-ncand", pred_out, trace_out;
  std::size_t jobs = 1;
  predict->add_option("--bundle", bundle_dir)->required();
  predict->add_option("--corpus", corpus_path)->required();
  predict->add_option("--mode", mode_name_opt, "pipeline, joint-1best or joint-ncand")
      ->capture_default_str();
  predict->add_option("--out", pred_out, "annotation output (default stdout)");
  predict->add_option("--trace", trace_out, "write search traces here");
  predict->add_option("--jobs", jobs, "worker threads")->capture_default_str();
  predict->add_option("--lexicon", lexicon);

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "score predictions against gold");
  std::string gold_path, scheme_opt = "Six", tsv_out;
  bool exclude_nochange = false;
  evaluate_cmd->add_option("--corpus", corpus_path)->required();
  evaluate_cmd->add_option("--gold", gold_path)->required();
  evaluate_cmd->add_option("--pred", ann_path)->required();
  evaluate_cmd->add_option("--scheme", scheme_opt)->capture_default_str();
  evaluate_cmd->add_flag("--exclude-nochange", exclude_nochange);
  evaluate_cmd->add_option("--lexicon", lexicon);

  // cross-validate
  auto* cv = app.add_subcommand("cross-validate", "by-student k-fold comparison");
  ConfigFlags cv_cfg;
  CvOptions cv_opt;
  std::string report_out;
  cv->add_option("--corpus", corpus_path)->required();
  cv->add_option("--annotations", ann_path)->required();
  cv->add_option("--folds", cv_opt.folds)->capture_default_str();
  cv->add_option("--jobs", cv_opt.jobs, "folds evaluated in parallel")->capture_default_str();
  cv->add_option("--tsv", tsv_out, "machine-readable report");
  cv->add_option("--out", report_out, "text report (default stdout)");
  cv->add_flag("--exclude-nochange", exclude_nochange);
  cv->add_option("--lexicon", lexicon);
  cv_cfg.attach(cv);

  // mutate-trace
  auto* trace = app.add_subcommand("mutate-trace", "print the mutation search of one paragraph");
  std::string pair_id, seed_text;
  trace->add_option("--bundle", bundle_dir)->required();
  trace->add_option("--corpus", corpus_path)->required();
  trace->add_option("--pair", pair_id)->required();
  trace->add_option("--mode", mode_name_opt, "joint-1best or joint-ncand")->capture_default_str();
  trace->add_option("--seed-sequence", seed_text, "start from this op-skeleton instead");
  trace->add_option("--lexicon", lexicon);

  // gen-synth
  auto* gen = app.add_subcommand("gen-synth", "write a synthetic corpus and gold annotations");
  SynthOptions so;
  std::string weights_text;
  gen->add_option("--corpus", corpus_path, "corpus output")->required();
  gen->add_option("--annotations", ann_path, "annotation output")->required();
  gen->add_option("--essays", so.essays)->capture_default_str();
  gen->add_option("--essays-per-student", so.essays_per_student)->capture_default_str();
  gen->add_option("--min-paragraphs", so.min_paragraphs)->capture_default_str();
  gen->add_option("--max-paragraphs", so.max_paragraphs)->capture_default_str();
  gen->add_option("--min-revisions", so.min_events, "revisions per paragraph")
      ->capture_default_str();
  gen->add_option("--max-revisions", so.max_events)->capture_default_str();
  gen->add_option("--type-weights", weights_text,
                  "six comma-separated weights: Claim,Reasoning,Evidence,General,Surface,Nochange");
  gen->add_option("--p-modify", so.p_modify)->capture_default_str();
  gen->add_option("--p-add", so.p_add)->capture_default_str();
  gen->add_option("--heavy-surface", so.heavy_surface, "share of reworded Surface edits")
      ->capture_default_str();
  gen->add_option("--seed", so.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) {
      RunConfig config;
      try {
        config = train_cfg.build();
      } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
      }
      const auto corpus = read_corpus(corpus_path, lexicon);
      const auto ann = load_annotations(ann_path, corpus);
      TrainSummary summary;
      const auto models = train_models(corpus, ann, config, &summary);
      save_bundle(models, out_dir);
      std::cerr << "trained on " << summary.sequences << " paragraphs (" << summary.steps
                << " steps, " << summary.features << " features); CRF "
                << summary.crf.iterations << " iterations"
                << (summary.crf.converged ? ", converged" : "") << "; config "
                << models.hash() << '\n';
    } else if (*predict) {
      auto mode = parse_mode(mode_name_opt);
      if (!mode) {
        std::cerr << "--mode: unknown mode '" << mode_name_opt << "'\n";
        return kExitUsage;
      }
      const auto models = load_bundle(bundle_dir);
      const auto corpus = read_corpus(corpus_path, lexicon);
      const auto paragraphs = paragraphs_of(corpus);
      const auto preds = predict_all(models, paragraphs, *mode, jobs);
      Annotations out;
      for (std::size_t k = 0; k < paragraphs.size(); ++k)
        out[paragraphs[k]->pair_id] = preds[k].revisions;
      std::unique_ptr<std::ofstream> holder;
      auto& os = open_out(pred_out, holder);
      os << "# config " << models.hash() << " mode " << mode_name(*mode) << '\n';
      write_annotations(os, out, models.config.scheme);
      if (!trace_out.empty()) {
        std::unique_ptr<std::ofstream> th;
        auto& ts = open_out(trace_out, th);
        ts << "# config " << models.hash() << '\n';
        for (std::size_t k = 0; k < paragraphs.size(); ++k) {
          if (!preds[k].search) continue;
          ts << "#pair\t" << paragraphs[k]->pair_id << '\n' << format_trace(*preds[k].search);
        }
      }
    } else if (*evaluate_cmd) {
      auto scheme = parse_scheme(scheme_opt);
      if (!scheme) {
        std::cerr << "--scheme: unknown scheme '" << scheme_opt << "'\n";
        return kExitUsage;
      }
      const auto corpus = read_corpus(corpus_path, lexicon);
      const auto gold = load_annotations(gold_path, corpus);
      const auto pred = load_annotations(ann_path, corpus);
      const auto ev = evaluate(paragraphs_of(corpus), gold, pred, *scheme);
      std::printf("alignment_accuracy\t%.6f\n", ev.extraction.accuracy());
      std::printf("macro_precision\t%.6f\n", ev.classification.macro_precision(!exclude_nochange));
      std::printf("macro_recall\t%.6f\n", ev.classification.macro_recall(!exclude_nochange));
      for (const auto& c : ev.classification.classes)
        std::printf("class\t%s\tprecision\t%.6f\trecall\t%.6f\tcorrect\t%zu\tpredicted\t%zu\tgold\t%zu\n",
                    type_name(c.type, *scheme).c_str(), c.precision(), c.recall(), c.correct,
                    c.predicted, c.gold);
    } else if (*cv) {
      RunConfig config;
      try {
        config = cv_cfg.build();
      } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
      }
      cv_opt.seed = config.seed;
      cv_opt.include_nochange = !exclude_nochange;
      const auto corpus = read_corpus(corpus_path, lexicon);
      const auto ann = load_annotations(ann_path, corpus);
      const auto report = cross_validate(corpus, ann, config, cv_opt);
      if (report.folds.size() < cv_opt.folds)
        std::cerr << "warning: only " << report.folds.size() << " folds (fewer students than "
                  << cv_opt.folds << ")\n";
      std::unique_ptr<std::ofstream> holder;
      open_out(report_out, holder) << report.text();
      if (!tsv_out.empty()) {
        std::unique_ptr<std::ofstream> th;
        open_out(tsv_out, th) << report.tsv();
      }
    } else if (*trace) {
      auto mode = parse_mode(mode_name_opt);
      if (!mode || *mode == PredictMode::Pipeline) {
        std::cerr << "--mode: expected joint-1best or joint-ncand\n";
        return kExitUsage;
      }
      const auto models = load_bundle(bundle_dir);
      const auto corpus = read_corpus(corpus_path, lexicon);
      const auto& p = find_pair(corpus, pair_id);
      const ParagraphFeatures features(p, models.config.features, models.space);
      SeedSet seeds;
      if (!seed_text.empty()) {
        seeds.add(parse_seed(seed_text, p.m(), p.n()), SeedOrigin::OneBest);
      } else {
        seeds = build_seeds(models, p, features, *mode);
      }
      SearchOptions sopt;
      sopt.mode = models.config.likelihood;
      const auto result = search(seeds, models.crf, features, sopt);
      std::cout << format_trace(result);
      std::cerr << "winner: " << to_string(result.labeled_sequence, models.config.scheme) << '\n';
    } else if (*gen) {
      if (!weights_text.empty()) {
        const auto parts = detail::split(weights_text, ',');
        if (parts.size() != 6) {
          std::cerr << "--type-weights: expected six comma-separated values\n";
          return kExitUsage;
        }
        for (std::size_t k = 0; k < 6; ++k)
          so.type_weights[k] = detail::parse_double(parts[k], "--type-weights", 1);
      }
      const auto synth = generate_synthetic(so);
      std::unique_ptr<std::ofstream> ch, ah;
      write_corpus(open_out(corpus_path, ch), synth.corpus);
      write_annotations(open_out(ann_path, ah), synth.annotations);
    }
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
}
