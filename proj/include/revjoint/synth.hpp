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

// Synthetic draft pairs with gold revisions.
//
// Each paragraph is a run of revision events drawn i.i.d. from a type
// distribution. Content types leave cue phrases in the sentences they touch.
// A share of Surface modifications are heavy same-length, same-tag
// rewordings: they look unrelated at the character level, which misleads a
// similarity-only aligner, but keep the length and tag profile the CRF sees.

#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "revjoint/corpus.hpp"
#include "revjoint/error.hpp"
#include "revjoint/seedgen.hpp"

namespace revjoint {

struct SynthOptions {
  std::size_t essays = 60;
  std::size_t essays_per_student = 1;
  std::size_t min_paragraphs = 2;
  std::size_t max_paragraphs = 4;
  std::size_t min_events = 3;  // revisions per paragraph
  std::size_t max_events = 7;
  /// Relative frequency of Claim, Reasoning, Evidence, General, Surface,
  /// Nochange revisions.
  std::array<double, 6> type_weights = {111, 390, 110, 356, 300, 1265};
  /// How a non-Surface content revision is realized.
  double p_modify = 0.5;
  double p_add = 0.3;  // remainder: delete
  /// Share of Surface modifications that are heavy rewordings.
  double heavy_surface = 0.5;
  std::uint64_t seed = 1;

  void validate() const {
    if (essays == 0 || essays_per_student == 0) throw DataError("synth: essays must be >= 1");
    if (min_paragraphs == 0 || min_paragraphs > max_paragraphs)
      throw DataError("synth: bad paragraph range");
    if (min_events == 0 || min_events > max_events) throw DataError("synth: bad event range");
    double total = 0.0;
    for (double w : type_weights) {
      if (!(w >= 0.0)) throw DataError("synth: type weights must be >= 0");
      total += w;
    }
    if (!(total > 0.0)) throw DataError("synth: type weights sum to 0");
    if (p_modify < 0 || p_add < 0 || p_modify + p_add > 1.0)
      throw DataError("synth: bad op probabilities");
    if (heavy_surface < 0 || heavy_surface > 1) throw DataError("synth: bad heavy_surface rate");
  }
};

struct SynthCorpus {
  Corpus corpus;
  Annotations annotations;
};

namespace synth {

using Token = std::pair<std::string, std::string>;  // word, tag
using Words = std::vector<Token>;

struct Lexicon {
  std::vector<std::string> noun = {
      "students", "school",  "city",     "policy",  "program", "teachers", "parents",
      "money",    "time",    "rule",     "library", "park",    "community", "project",
      "homework", "lunch",   "bus",      "garden",  "computer", "club",    "team",
      "uniform",  "test",    "class",    "budget",  "law",     "energy",  "water",
      "health",   "family",  "town",     "market",  "museum",  "field",   "kitchen",
      "office",   "river",   "festival", "station", "bridge",  "village", "factory"};
  std::vector<std::string> verb = {"help",   "need",    "improve", "support", "change",
                                   "create", "reduce",  "build",   "provide", "allow",
                                   "keep",   "protect", "visit",   "share",   "plan",
                                   "open",   "close",   "fund",    "clean",   "join"};
  std::vector<std::string> adj = {"important", "new",    "better", "small",    "large",
                                  "public",    "local",  "free",   "healthy",  "safe",
                                  "modern",    "simple", "strong", "difficult", "useful",
                                  "quiet",     "busy",   "cheap",  "famous",   "green"};
  std::vector<std::string> adv = {"really", "often",   "also",    "still",
                                  "usually", "quickly", "clearly", "rarely"};
  std::vector<std::string> det = {"the", "a", "this", "every", "our", "some", "many"};
  std::vector<std::string> adp = {"in", "for", "of", "with", "at", "near", "about", "from"};
  std::vector<std::string> pron = {"it", "they", "we", "people"};
};

inline const Lexicon& lexicon() {
  static const Lexicon lex;
  return lex;
}

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return detail::unit_uniform(rng_); }
  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n));
  }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
  bool chance(double p) { return uniform() < p; }
  const std::string& pick(const std::vector<std::string>& v) { return v[below(v.size())]; }

  const std::vector<std::string>& pool(const std::string& tag) {
    const auto& L = lexicon();
    if (tag == "NOUN") return L.noun;
    if (tag == "VERB") return L.verb;
    if (tag == "ADJ") return L.adj;
    if (tag == "ADV") return L.adv;
    if (tag == "DET") return L.det;
    if (tag == "ADP") return L.adp;
    return L.pron;
  }

  void add(Words& w, const std::string& tag) { w.emplace_back(pick(pool(tag)), tag); }

  /// A plain clause of 4 to 11 words.
  Words clause() {
    Words w;
    switch (below(3)) {
      case 0:
        add(w, "DET");
        if (chance(0.5)) add(w, "ADJ");
        add(w, "NOUN");
        add(w, "VERB");
        add(w, "DET");
        add(w, "NOUN");
        if (chance(0.5)) {
          add(w, "ADP");
          add(w, "DET");
          add(w, "NOUN");
        }
        break;
      case 1:
        add(w, "PRON");
        add(w, "VERB");
        if (chance(0.5)) add(w, "ADV");
        add(w, "DET");
        add(w, "ADJ");
        add(w, "NOUN");
        break;
      default:
        add(w, "DET");
        add(w, "NOUN");
        add(w, "ADP");
        add(w, "DET");
        add(w, "NOUN");
        add(w, "VERB");
        if (chance(0.5)) add(w, "ADV");
        add(w, "ADJ");
        add(w, "NOUN");
        break;
    }
    return w;
  }

  /// Cue phrase marking a content type; General has none.
  Words cue(RevisionType t) {
    auto num = [&] { return std::to_string(between(10, 90)); };
    switch (t) {
      case RevisionType::Claim:
        switch (below(3)) {
          case 0: return {{"I", "PRON"}, {"believe", "VERB"}, {"that", "SCONJ"}};
          case 1: return {{"we", "PRON"}, {"should", "AUX"}, {"argue", "VERB"}, {"that", "SCONJ"}};
          default: return {{"in", "ADP"}, {"my", "PRON"}, {"opinion", "NOUN"}, {",", "PUNCT"}};
        }
      case RevisionType::Reasoning:
        switch (below(3)) {
          case 0: return {{"because", "SCONJ"}};
          case 1: return {{"therefore", "ADV"}, {",", "PUNCT"}};
          default: return {{"this", "PRON"}, {"means", "VERB"}, {"that", "SCONJ"}};
        }
      case RevisionType::Evidence:
        switch (below(3)) {
          case 0: return {{"according", "VERB"}, {"to", "ADP"}, {"the", "DET"}, {"survey", "NOUN"}, {",", "PUNCT"}};
          case 1: return {{num(), "NUM"}, {"percent", "NOUN"}, {"of", "ADP"}};
          default: return {{"for", "ADP"}, {"example", "NOUN"}, {",", "PUNCT"}};
        }
      default:
        return {};
    }
  }

  /// A full sentence, optionally opened by the cue of `t`.
  Words sentence(RevisionType t) {
    Words w = cue(t);
    Words c = clause();
    w.insert(w.end(), c.begin(), c.end());
    w.emplace_back(".", "PUNCT");
    return w;
  }

  /// Content modification toward type `t`: a cue is inserted and, for
  /// General, an extra phrase is appended.
  Words modify_content(const Words& base, RevisionType t) {
    Words w;
    Words c = cue(t);
    if (c.empty()) {
      w = Words(base.begin(), base.end() - 1);
      add(w, "ADP");
      add(w, "DET");
      add(w, "ADJ");
      add(w, "NOUN");
      w.emplace_back(".", "PUNCT");
    } else {
      w = c;
      w.insert(w.end(), base.begin(), base.end());
    }
    return w;
  }

  /// Light surface edit: a misspelling in draft 1 becomes correct in
  /// draft 2. Returns {draft1, draft2}.
  std::pair<Words, Words> light_surface(const Words& base) {
    Words d1 = base;
    std::vector<std::size_t> candidates;
    for (std::size_t k = 0; k < d1.size(); ++k)
      if (d1[k].first.size() >= 4 && d1[k].second != "PUNCT") candidates.push_back(k);
    if (candidates.empty()) {
      d1.back().first = "!";
      return {d1, base};
    }
    const std::size_t idx = candidates[below(candidates.size())];
    auto& word = d1[idx].first;
    const std::size_t at = 1 + below(word.size() - 2);
    std::swap(word[at], word[at + 1]);
    if (word == base[idx].first) word.insert(at, 1, word[at]);  // doubled letter
    return {d1, base};
  }

  /// Heavy rewording: most words replaced by different words of the same
  /// tag; token count and tag sequence are preserved.
  Words heavy_surface(const Words& base) {
    Words w = base;
    for (auto& [word, tag] : w) {
      if (tag == "PUNCT" || tag == "SCONJ" || tag == "AUX" || tag == "NUM") continue;
      if (tag != "NOUN" && tag != "VERB" && tag != "ADJ" && tag != "ADV" && tag != "DET" &&
          tag != "ADP" && tag != "PRON")
        continue;
      const auto& p = pool(tag);
      if (p.size() < 2) continue;
      std::string next = word;
      while (next == word) next = pick(p);
      word = next;
    }
    return w;
  }

 private:
  std::mt19937_64 rng_;
};

inline Sentence to_sentence(const Words& w) {
  Sentence s;
  for (const auto& [word, tag] : w) {
    if (!s.text.empty() && !(tag == "PUNCT")) s.text += ' ';
    s.text += word;
    s.tokens.push_back(word);
    s.pos_tags.push_back(tag);
  }
  return s;
}

}  // namespace synth

/// Generates a corpus and its gold annotations. Deterministic in
/// `options.seed`.
inline SynthCorpus generate_synthetic(const SynthOptions& options) {
  options.validate();
  synth::Gen g(options.seed);
  double total = 0.0;
  for (double w : options.type_weights) total += w;
  auto draw_type = [&] {
    double u = g.uniform() * total;
    for (std::size_t k = 0; k < 6; ++k) {
      if (u < options.type_weights[k]) return kAllRevisionTypes[k];
      u -= options.type_weights[k];
    }
    return RevisionType::Nochange;
  };

  SynthCorpus out;
  char buf[32];
  for (std::size_t e = 0; e < options.essays; ++e) {
    DraftPair dp;
    std::snprintf(buf, sizeof buf, "E%03zu", e + 1);
    dp.essay_id = buf;
    std::snprintf(buf, sizeof buf, "S%03zu", e / options.essays_per_student + 1);
    dp.student_id = buf;
    const std::size_t np = g.between(options.min_paragraphs, options.max_paragraphs);
    for (std::size_t pi = 0; pi < np; ++pi) {
      ParagraphPair p;
      p.pair_id = dp.essay_id + "-P" + std::to_string(pi + 1);
      std::vector<Revision> revs;
      const std::size_t events = g.between(options.min_events, options.max_events);
      for (std::size_t k = 0; k < events; ++k) {
        const RevisionType t = draw_type();
        Revision r;
        r.rev_type = t;
        if (t == RevisionType::Nochange) {
          // unchanged sentences sometimes carry cues too
          const RevisionType look = g.chance(0.3) ? kAllRevisionTypes[g.below(4)]
                                                  : RevisionType::General;
          const auto s = synth::to_sentence(g.sentence(look));
          p.d1_sentences.push_back(s);
          p.d2_sentences.push_back(s);
          r.op = RevisionOp::Nochange;
        } else if (t == RevisionType::Surface) {
          const auto base = g.sentence(RevisionType::General);
          auto [a, b] = g.chance(options.heavy_surface) ? std::pair{base, g.heavy_surface(base)}
                                                        : g.light_surface(base);
          p.d1_sentences.push_back(synth::to_sentence(a));
          p.d2_sentences.push_back(synth::to_sentence(b));
          r.op = RevisionOp::Modify;
        } else {
          const double u = g.uniform();
          if (u < options.p_modify) {
            const auto base = g.sentence(RevisionType::General);
            p.d1_sentences.push_back(synth::to_sentence(base));
            p.d2_sentences.push_back(synth::to_sentence(g.modify_content(base, t)));
            r.op = RevisionOp::Modify;
          } else if (u < options.p_modify + options.p_add) {
            p.d2_sentences.push_back(synth::to_sentence(g.sentence(t)));
            r.op = RevisionOp::Add;
          } else {
            p.d1_sentences.push_back(synth::to_sentence(g.sentence(t)));
            r.op = RevisionOp::Delete;
          }
        }
        if (r.op != RevisionOp::Add) r.d1_index = p.d1_sentences.size();
        if (r.op != RevisionOp::Delete) r.d2_index = p.d2_sentences.size();
        if (r.op == RevisionOp::Modify &&
            p.d1_sentences.back().text == p.d2_sentences.back().text)
          throw DataError("synth: modification produced identical sentences");
        revs.push_back(r);
      }
      out.annotations[p.pair_id] = std::move(revs);
      dp.paragraph_pairs.push_back(std::move(p));
    }
    out.corpus.push_back(std::move(dp));
  }
  return out;
}

}  // namespace revjoint
