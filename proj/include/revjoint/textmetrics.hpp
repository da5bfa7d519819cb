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
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "revjoint/error.hpp"

namespace revjoint {

// ---------------------------------------------------------------------------
// UTF-8 helpers

/// Decodes UTF-8 into code points. Invalid bytes decode to U+FFFD.
inline std::u32string utf8_decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int extra = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      extra = 1;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      extra = 2;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      extra = 3;
    } else {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k <= extra; ++k) {
      if (i + k >= s.size()) {
        ok = false;
        break;
      }
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(extra) + 1;
  }
  return out;
}

inline std::string utf8_encode(std::u32string_view cps) {
  std::string out;
  for (char32_t cp : cps) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

/// True for code points in the Unicode punctuation categories (Pc, Pd, Ps,
/// Pe, Pi, Pf, Po) within the Latin, General Punctuation, CJK and fullwidth
/// blocks. Symbols such as '$' or '+' are not punctuation.
inline bool is_punct(char32_t c) {
  if (c < 0x80) {
    switch (c) {
      case '!': case '"': case '#': case '%': case '&': case '\'':
      case '(': case ')': case '*': case ',': case '-': case '.':
      case '/': case ':': case ';': case '?': case '@': case '[':
      case '\\': case ']': case '_': case '{': case '}':
        return true;
      default:
        return false;
    }
  }
  switch (c) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
      return true;
    default:
      break;
  }
  if (c >= 0x2010 && c <= 0x2027) return true;
  if (c >= 0x2030 && c <= 0x205E) return c != 0x2044 && c != 0x2052;
  if (c >= 0x3001 && c <= 0x3003) return true;
  if (c >= 0x3008 && c <= 0x3011) return true;
  if (c >= 0x3014 && c <= 0x301F) return true;
  if (c >= 0xFF01 && c <= 0xFF0F) return c != 0xFF04 && c != 0xFF0B;
  if (c >= 0xFF1A && c <= 0xFF20) return c != 0xFF1C && c != 0xFF1D && c != 0xFF1E;
  return false;
}

/// A token is punctuation when it is nonempty and every code point is.
inline bool is_punct_token(std::string_view token) {
  const auto cps = utf8_decode(token);
  if (cps.empty()) return false;
  return std::all_of(cps.begin(), cps.end(), [](char32_t c) { return is_punct(c); });
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

inline bool is_space(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' ||
         c == 0xA0 || c == 0x3000 || (c >= 0x2000 && c <= 0x200A);
}

/// Whitespace split that peels leading and trailing punctuation off each
/// chunk into single-character tokens. "control," -> {"control", ","}.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  const auto cps = utf8_decode(text);
  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && is_space(cps[i])) ++i;
    std::size_t j = i;
    while (j < cps.size() && !is_space(cps[j])) ++j;
    if (j == i) break;
    std::size_t lo = i;
    std::size_t hi = j;
    while (lo < hi && is_punct(cps[lo])) {
      tokens.push_back(utf8_encode(std::u32string_view(&cps[lo], 1)));
      ++lo;
    }
    std::vector<std::string> tail;
    while (hi > lo && is_punct(cps[hi - 1])) {
      tail.push_back(utf8_encode(std::u32string_view(&cps[hi - 1], 1)));
      --hi;
    }
    if (hi > lo) tokens.push_back(utf8_encode(std::u32string_view(&cps[lo], hi - lo)));
    tokens.insert(tokens.end(), tail.rbegin(), tail.rend());
    i = j;
  }
  return tokens;
}

// ---------------------------------------------------------------------------
// Edit distance

template <typename Seq>
concept EditSequenceLike = !std::is_convertible_v<const Seq&, std::string_view> && requires(const Seq& s) {
  std::size(s);
  std::begin(s);
};

/// Unit-cost Levenshtein distance over any sized sequences with
/// equality-comparable elements. Two-row DP, O(|a|·|b|) time.
template <EditSequenceLike SeqA, EditSequenceLike SeqB>
std::size_t levenshtein(const SeqA& a, const SeqB& b) {
  const std::size_t n = std::size(b);
  if (std::size(a) == 0) return n;
  if (n == 0) return std::size(a);
  std::vector<std::size_t> prev(n + 1), cur(n + 1);
  for (std::size_t j = 0; j <= n; ++j) prev[j] = j;
  std::size_t i = 0;
  for (const auto& x : a) {
    cur[0] = ++i;
    std::size_t j = 0;
    for (const auto& y : b) {
      const std::size_t sub = prev[j] + (x == y ? 0 : 1);
      cur[j + 1] = std::min({prev[j + 1] + 1, cur[j] + 1, sub});
      ++j;
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

/// Character-level distance over code points.
inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  return levenshtein(utf8_decode(a), utf8_decode(b));
}

/// levenshtein(a, b) / max(|a|, |b|), 0 when both are empty.
template <EditSequenceLike SeqA, EditSequenceLike SeqB>
double normalized_levenshtein(const SeqA& a, const SeqB& b) {
  const std::size_t longest = std::max<std::size_t>(std::size(a), std::size(b));
  if (longest == 0) return 0.0;
  return static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

inline double normalized_levenshtein(std::string_view a, std::string_view b) {
  return normalized_levenshtein(utf8_decode(a), utf8_decode(b));
}

// ---------------------------------------------------------------------------
// Sentence statistics

struct SentenceStats {
  std::size_t token_count = 0;
  std::size_t char_count = 0;   // code points over all tokens
  std::size_t punct_count = 0;  // tokens made only of punctuation

  friend bool operator==(const SentenceStats&, const SentenceStats&) = default;
};

inline SentenceStats sentence_stats(std::span<const std::string> tokens) {
  SentenceStats st;
  st.token_count = tokens.size();
  for (const auto& t : tokens) {
    st.char_count += utf8_decode(t).size();
    if (is_punct_token(t)) ++st.punct_count;
  }
  return st;
}

// ---------------------------------------------------------------------------
// POS tagging

/// Source of part-of-speech tags. Output length equals input length.
class PosTagger {
 public:
  virtual ~PosTagger() = default;
  virtual std::vector<std::string> tag(std::span<const std::string> tokens) const = 0;
};

/// Tags every token "X". Keeps the pipeline free of NLP dependencies.
class DegenerateTagger final : public PosTagger {
 public:
  std::vector<std::string> tag(std::span<const std::string> tokens) const override {
    return std::vector<std::string>(tokens.size(), "X");
  }
};

/// Most-frequent-tag lexicon tagger. Lookups are case-insensitive; unknown
/// tokens get "PUNCT" when they are punctuation and "X" otherwise.
class LexiconTagger final : public PosTagger {
 public:
  LexiconTagger() = default;

  void add(std::string_view token, std::string_view tag, std::size_t count = 1) {
    const std::string key = ascii_lower(token);
    auto& tags = counts_[key];
    tags[std::string(tag)] += count;
    // ties resolve to the lexicographically first tag (std::map order)
    std::size_t top = 0;
    std::string arg;
    for (const auto& [t, c] : tags) {
      if (c > top) {
        top = c;
        arg = t;
      }
    }
    best_[key] = arg;
  }

  static LexiconTagger from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open POS lexicon: " + path);
    LexiconTagger lex;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size() ||
          line.find('\t', tab + 1) != std::string::npos) {
        throw ParseError(path, lineno, "expected token<TAB>tag");
      }
      lex.add(std::string_view(line).substr(0, tab), std::string_view(line).substr(tab + 1));
    }
    return lex;
  }

  std::vector<std::string> tag(std::span<const std::string> tokens) const override {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
      auto it = best_.find(ascii_lower(t));
      if (it != best_.end()) {
        out.push_back(it->second);
      } else {
        out.push_back(is_punct_token(t) ? "PUNCT" : "X");
      }
    }
    return out;
  }

 private:
  std::map<std::string, std::map<std::string, std::size_t>> counts_;
  std::unordered_map<std::string, std::string> best_;
};

}  // namespace revjoint
