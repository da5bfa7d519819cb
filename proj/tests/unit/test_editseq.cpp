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

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <string>
#include <vector>

#include "revjoint/editseq.hpp"
#include "test_support.hpp"

namespace revjoint {
namespace {

using enum EditOp;

TEST(EditSequence, FigureParagraphEncodes) {
  const auto fx = testing::fig_fixture();
  const auto seq = encode(fx.paragraph(), fx.revisions());
  EXPECT_EQ(to_string(seq), "M-M-Nochange K-M-Reasoning M-K-Reasoning M-M-Surface");
  EXPECT_EQ(decode(seq), fx.revisions());
}

TEST(EditSequence, PositionsAreRunningCursors) {
  const auto seq = EditSequence::from_ops(2, 3, {KM, MM, MK, KM});
  const std::vector<std::pair<std::size_t, std::size_t>> want = {{1, 1}, {1, 2}, {2, 3}, {3, 3}};
  for (std::size_t k = 0; k < seq.size(); ++k) {
    EXPECT_EQ(seq[k].d1_pos, want[k].first);
    EXPECT_EQ(seq[k].d2_pos, want[k].second);
  }
}

TEST(EditSequence, ClosureViolationsThrow) {
  EXPECT_THROW(EditSequence::from_ops(1, 1, {MM, MM}), DataError);
  EXPECT_THROW(EditSequence::from_ops(2, 1, {MM}), DataError);
  EXPECT_THROW(EditSequence::from_ops(0, 1, {MK, KM}), DataError);
  EXPECT_THROW(EditSequence::from_ops(1, 1, {MM}, {}), DataError);
  EXPECT_NO_THROW(EditSequence::from_ops(0, 0, {}));
}

TEST(EditSequence, ParseRoundTrip) {
  const std::string text = "K-M-Claim M-M-Evidence M-K-General M-M-Nochange";
  const auto seq = parse_edit_sequence(text, 3, 3);
  EXPECT_EQ(to_string(seq), text);
  EXPECT_THROW(parse_edit_sequence("M-M-Bogus", 1, 1), DataError);
  EXPECT_THROW(parse_edit_sequence("X-Y-Claim", 1, 1), DataError);
  EXPECT_THROW(parse_edit_sequence("M-M-Claim", 2, 1), DataError);
}

TEST(EditSequence, RandomDecodeEncodeRoundTrip) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = rng() % 6, n = rng() % 6;
    const auto p = testing::random_paragraph(rng, m, n);
    auto ops = testing::random_ops(rng, m, n);
    std::vector<RevisionType> types;
    for (EditOp op : ops) {
      // modified pairs carry a content type; random sentences may still collide
      types.push_back(op == MM ? RevisionType::Surface : RevisionType::Evidence);
    }
    auto seq = canonicalize(EditSequence::from_ops(m, n, ops, types));
    // identical random sentences would need Nochange
    std::vector<RevisionType> fixed = seq.types();
    for (std::size_t k = 0; k < seq.size(); ++k)
      if (seq[k].op == MM &&
          sentences_identical(p.d1_sentences[seq[k].d1_pos - 1], p.d2_sentences[seq[k].d2_pos - 1]))
        fixed[k] = RevisionType::Nochange;
    seq = EditSequence::from_ops(m, n, seq.ops(), fixed);
    EXPECT_EQ(encode(p, decode(seq)), seq);
  }
}

TEST(Canonicalize, MovesAddsBeforeDeletesWithinGap) {
  const auto seq = EditSequence::from_ops(2, 2, {MK, KM, MM}, {RevisionType::Claim,
                                                              RevisionType::Evidence,
                                                              RevisionType::Surface});
  EXPECT_EQ(to_string(canonicalize(seq)), "K-M-Evidence M-K-Claim M-M-Surface");
  EXPECT_EQ(alignment_key(seq), "+-=");
}

TEST(Canonicalize, KeyIdentifiesAlignment) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = rng() % 5, n = rng() % 5;
    const auto a = EditSequence::from_ops(m, n, testing::random_ops(rng, m, n));
    const auto b = EditSequence::from_ops(m, n, testing::random_ops(rng, m, n));
    EXPECT_EQ(alignment_key(a) == alignment_key(b), aligned_pairs(a) == aligned_pairs(b));
    EXPECT_EQ(aligned_pairs(canonicalize(a)), aligned_pairs(a));
  }
}

TEST(Canonicalize, DistinctKeysMatchBinomial) {
  for (std::size_t m = 0; m <= 4; ++m)
    for (std::size_t n = 0; n <= 4; ++n) {
      std::set<std::string> keys;
      std::mt19937_64 rng(m * 10 + n);
      for (int trial = 0; trial < 4000; ++trial)
        keys.insert(alignment_key(EditSequence::from_ops(m, n, testing::random_ops(rng, m, n))));
      EXPECT_EQ(keys.size(), testing::binomial_oracle(m, n)) << m << "x" << n;
      EXPECT_EQ(count_sequences(m, n), testing::binomial_oracle(m, n));
    }
  EXPECT_THROW(count_sequences(40, 21), DataError);
}

TEST(LabelAlphabet, OrderAndCoarsening) {
  const LabelAlphabet six(ClassScheme::Six);
  EXPECT_EQ(six.size(), 18u);
  EXPECT_EQ(six.name(0), "M-M-Claim");
  EXPECT_EQ(six.index_of(Label{KM, RevisionType::Claim}), 6u);
  const LabelAlphabet three(ClassScheme::Three);
  EXPECT_EQ(three.size(), 9u);
  EXPECT_EQ(three.index_of(Label{MK, RevisionType::Evidence}),
            three.index_of(Label{MK, RevisionType::General}));
  EXPECT_EQ(three.parse("K-M-Content"), three.index_of(Label{KM, RevisionType::Claim}));
  EXPECT_FALSE(three.parse("K-M-Claim").has_value());
}

TEST(Encode, RejectsInconsistentRevisions) {
  const auto fx = testing::fig_fixture();
  auto revs = fx.revisions();
  revs[0].op = RevisionOp::Modify;  // identical sentences
  revs[0].rev_type = RevisionType::Surface;
  EXPECT_THROW(encode(fx.paragraph(), revs), DataError);
  revs = fx.revisions();
  revs[3].op = RevisionOp::Nochange;  // differing sentences
  revs[3].rev_type = RevisionType::Nochange;
  EXPECT_THROW(encode(fx.paragraph(), revs), DataError);
}

}  // namespace
}  // namespace revjoint
