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

#include <sstream>
#include <string>

#include "revjoint/features.hpp"
#include "test_support.hpp"

namespace revjoint {
namespace {

FeatureConfig only(bool unigram, bool location, bool textual, bool language) {
  FeatureConfig c;
  c.unigram = unigram;
  c.location = location;
  c.textual = textual;
  c.language = language;
  return c;
}

TEST(Extract, LocationFeatures) {
  const auto fx = testing::fig_fixture();
  const auto fv = extract(fx.paragraph(), 4, 2, only(false, true, false, false));
  EXPECT_EQ(fv.at("bias"), 1.0);
  EXPECT_EQ(fv.at("loc:d1_pos"), 4.0);
  EXPECT_EQ(fv.at("loc:d1_done"), 1.0);
  EXPECT_EQ(fv.at("loc:d2_bucket=2"), 1.0);
  EXPECT_FALSE(fv.contains("loc:d2_done"));
  EXPECT_FALSE(fv.contains("loc:d2_begin"));
  EXPECT_EQ(extract(fx.paragraph(), 1, 1, only(false, true, false, false)).at("loc:d1_begin"), 1.0);
}

TEST(Extract, TextualFeaturesAgainstHandCounts) {
  ParagraphPair p;
  p.pair_id = "t";
  p.d1_sentences = {make_sentence("The river also helps the local birds.")};
  p.d2_sentences = {make_sentence("The river also help the local birds.")};
  FeatureConfig c = only(false, false, true, false);
  const auto fv = extract(p, 1, 1, c);
  EXPECT_EQ(fv.at("txt:cur:edit"), 1.0);
  EXPECT_EQ(fv.at("txt:cur:edit_bin=0"), 1.0);
  EXPECT_FALSE(fv.contains("txt:cur:identical"));
  EXPECT_FALSE(fv.contains("txt:cur:len_diff"));  // zero values are not stored
  c.edit_granularity = EditGranularity::Token;
  const auto tv = extract(p, 1, 1, c);
  EXPECT_EQ(tv.at("txt:cur:edit"), 1.0);
  EXPECT_NEAR(tv.at("txt:cur:edit_norm"), 1.0 / 8.0, 1e-15);
}

TEST(Extract, IdenticalAndLookahead) {
  const auto fx = testing::fig_fixture();
  const auto fv = extract(fx.paragraph(), 1, 1, only(false, false, true, false));
  EXPECT_EQ(fv.at("txt:cur:identical"), 1.0);
  EXPECT_TRUE(fv.contains("txt:d2next:edit"));
  EXPECT_TRUE(fv.contains("txt:d1next:edit"));
  const auto end = extract(fx.paragraph(), 4, 3, only(false, false, true, false));
  EXPECT_FALSE(end.contains("txt:cur:edit"));
  EXPECT_EQ(end.at("txt:d2_len"), 8.0);
}

TEST(Extract, UnigramsAreLowercased) {
  const auto fx = testing::fig_fixture();
  const auto fv = extract(fx.paragraph(), 1, 1, only(true, false, false, false));
  EXPECT_EQ(fv.at("uni:d1:many"), 1.0);
  EXPECT_FALSE(fv.contains("uni:d1:Many"));
}

TEST(Extract, OutOfRangeThrows) {
  const auto fx = testing::fig_fixture();
  EXPECT_THROW(extract(fx.paragraph(), 5, 1, FeatureConfig{}), DataError);
  EXPECT_THROW(extract(fx.paragraph(), 0, 1, FeatureConfig{}), DataError);
  EXPECT_THROW(only(false, false, false, false).validate(), DataError);
}

TEST(FeatureSpace, MinCountAndProjection) {
  const FeatureVector a = {{"x", 1.0}, {"y", 2.0}}, b = {{"x", 3.0}, {"z", 1.0}};
  const auto fs = FeatureSpace::build({a, b}, 2);
  ASSERT_EQ(fs.size(), 1u);
  EXPECT_EQ(fs.project(b), (SparseVector{{0u, 3.0}}));
  EXPECT_FALSE(fs.find("y").has_value());
}

TEST(FeatureSpace, WriteReadRoundTrip) {
  const FeatureSpace fs({"b", "a", "c", "a"});
  EXPECT_EQ(fs.size(), 3u);
  std::ostringstream out;
  fs.write(out);
  std::istringstream in(out.str());
  EXPECT_EQ(FeatureSpace::read(in, "mem"), fs);
  std::istringstream bad("a\t0\nc\t2\n");
  EXPECT_THROW(FeatureSpace::read(bad, "mem"), ParseError);
  std::istringstream unsorted("b\t0\na\t1\n");
  EXPECT_THROW(FeatureSpace::read(unsorted, "mem"), ParseError);
}

TEST(ParagraphFeatures, RowsFollowStepCursors) {
  const auto fx = testing::fig_fixture();
  const FeatureConfig cfg = only(false, true, false, false);
  const auto fs = FeatureSpace::build({extract(fx.paragraph(), 2, 3, cfg)}, 1);
  const ParagraphFeatures pf(fx.paragraph(), cfg, fs);
  const auto seq = encode(fx.paragraph(), fx.revisions());
  const auto rows = pf.for_sequence(seq);
  ASSERT_EQ(rows.size(), seq.size());
  EXPECT_EQ(rows[2], fs.project(extract(fx.paragraph(), 2, 3, cfg)));
  EXPECT_THROW(pf.at(5, 1), DataError);
}

}  // namespace
}  // namespace revjoint
