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

#include <array>
#include <cmath>
#include <sstream>

#include "revjoint/synth.hpp"
#include "test_support.hpp"

namespace revjoint {
namespace {

TEST(Synth, TypeFrequenciesFollowWeights) {
  SynthOptions so;
  so.essays = 700;
  so.seed = 17;
  const auto sc = generate_synthetic(so);
  std::array<double, 6> counts{};
  double total = 0.0;
  for (const auto& [id, revs] : sc.annotations)
    for (const auto& r : revs) {
      counts[static_cast<std::size_t>(r.rev_type)] += 1.0;
      total += 1.0;
    }
  ASSERT_GE(total, 10000.0);
  double wsum = 0.0;
  for (double w : so.type_weights) wsum += w;
  for (std::size_t k = 0; k < 6; ++k)
    EXPECT_NEAR(counts[k] / total, so.type_weights[k] / wsum, 0.02) << type_name(kAllRevisionTypes[k]);
}

TEST(Synth, AnnotationsAreValidAndEncodable) {
  SynthOptions so;
  so.essays = 30;
  so.seed = 3;
  const auto sc = generate_synthetic(so);
  for (const auto& dp : sc.corpus)
    for (const auto& p : dp.paragraph_pairs) {
      const auto& revs = sc.annotations.at(p.pair_id);
      ASSERT_NO_THROW(validate_revisions(p, revs)) << p.pair_id;
      const auto seq = encode(p, revs);
      EXPECT_TRUE(testing::closure_holds(seq.ops(), p.m(), p.n()));
    }
}

TEST(Synth, SurvivesCorpusRoundTrip) {
  SynthOptions so;
  so.essays = 5;
  const auto sc = generate_synthetic(so);
  std::ostringstream out, ann;
  write_corpus(out, sc.corpus);
  write_annotations(ann, sc.annotations);
  std::istringstream cin(out.str()), ain(ann.str());
  const auto back = parse_corpus(cin, "mem");
  EXPECT_EQ(back, sc.corpus);
  EXPECT_EQ(parse_annotations(ain, "mem", back), sc.annotations);
}

TEST(Synth, SeedControlsOutput) {
  SynthOptions so;
  so.essays = 4;
  const auto a = generate_synthetic(so), b = generate_synthetic(so);
  EXPECT_EQ(a.corpus, b.corpus);
  so.seed = 2;
  EXPECT_NE(generate_synthetic(so).corpus, a.corpus);
}

TEST(Synth, StudentsGroupEssays) {
  SynthOptions so;
  so.essays = 7;
  so.essays_per_student = 3;
  const auto sc = generate_synthetic(so);
  EXPECT_EQ(sc.corpus[0].student_id, sc.corpus[2].student_id);
  EXPECT_NE(sc.corpus[2].student_id, sc.corpus[3].student_id);
  EXPECT_EQ(sc.corpus[6].student_id, "S003");
}

TEST(Synth, OptionValidation) {
  SynthOptions so;
  so.min_paragraphs = 5;
  so.max_paragraphs = 2;
  EXPECT_THROW(generate_synthetic(so), DataError);
  so = SynthOptions{};
  so.type_weights = {0, 0, 0, 0, 0, 0};
  EXPECT_THROW(generate_synthetic(so), DataError);
  so = SynthOptions{};
  so.p_modify = 0.8;
  so.p_add = 0.3;
  EXPECT_THROW(generate_synthetic(so), DataError);
}

TEST(Synth, OnlyNochangeMeansIdenticalDrafts) {
  SynthOptions so;
  so.essays = 3;
  so.type_weights = {0, 0, 0, 0, 0, 1};
  const auto sc = generate_synthetic(so);
  for (const auto& dp : sc.corpus)
    for (const auto& p : dp.paragraph_pairs) EXPECT_EQ(p.d1_sentences, p.d2_sentences);
}

}  // namespace
}  // namespace revjoint
