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

#include "revjoint/corpus.hpp"
#include "test_support.hpp"

namespace revjoint {
namespace {

Corpus parse(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in, "mem");
}

Annotations parse_ann(const std::string& text, const Corpus& c) {
  std::istringstream in(text);
  return parse_annotations(in, "mem", c);
}

std::size_t parse_error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

const char* kTwoByTwo =
    "#essay\tE1\tS1\n"
    "#para\tE1-P1\n"
    "D1\t1\tThe river is wide.\n"
    "D1\t2\tBirds live there.\n"
    "D2\t1\tThe river is wide.\n"
    "D2\t2\tMany birds live there.\n";

TEST(Corpus, PipelineErrorFixtureShape) {
  const auto fx = testing::pipeline_error_fixture();
  ASSERT_EQ(fx.corpus.size(), 1u);
  EXPECT_EQ(fx.paragraph().m(), 4u);
  EXPECT_EQ(fx.paragraph().n(), 4u);
  const std::vector<Revision> gold = {
      {1, 1, RevisionOp::Modify, RevisionType::Surface},
      {2, 2, RevisionOp::Modify, RevisionType::Surface},
      {3, 3, RevisionOp::Modify, RevisionType::Surface},
      {4, 4, RevisionOp::Nochange, RevisionType::Nochange}};
  EXPECT_EQ(fx.revisions(), gold);
}

TEST(Corpus, ThreeColumnLinesAreTokenizedAndTagged) {
  const auto c = parse(kTwoByTwo);
  const auto& s = c[0].paragraph_pairs[0].d2_sentences[1];
  EXPECT_EQ(s.tokens, (std::vector<std::string>{"Many", "birds", "live", "there", "."}));
  EXPECT_EQ(s.pos_tags, std::vector<std::string>(5, "X"));
  EXPECT_EQ(c[0].student_id, "S1");
}

TEST(Corpus, WriteThenParseIsIdentity) {
  const auto c = parse(kTwoByTwo);
  std::ostringstream out;
  write_corpus(out, c);
  EXPECT_EQ(parse(out.str()), c);
}

TEST(Corpus, ErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_error_line("#para\tP\n"), 1u);
  EXPECT_EQ(parse_error_line("#essay\tE\tS\n#para\tP\nD1\t2\tskip.\n"), 3u);
  EXPECT_EQ(parse_error_line("#essay\tE\tS\n#essay\tE\tS\n"), 2u);
  EXPECT_EQ(parse_error_line("#essay\tE\tS\n#para\tP\nD1\t1\ta b\ta b\tX\n"), 3u);
  EXPECT_EQ(parse_error_line("#essay\tE\tS\n#para\tP\nD3\t1\tx\n"), 3u);
  EXPECT_GT(parse_error_line("#essay\tE\tS\n#para\tP\n"), 0u);  // empty paragraph
  EXPECT_THROW(load_corpus("/nonexistent/corpus.tsv"), DataError);
}

TEST(Annotations, ParseAndWriteRoundTrip) {
  const auto c = parse(kTwoByTwo);
  const std::string text =
      "E1-P1\t1\t1\tNochange\tNochange\n"
      "E1-P1\t2\t2\tModify\tEvidence\n";
  const auto a = parse_ann(text, c);
  std::ostringstream out;
  write_annotations(out, a);
  EXPECT_EQ(out.str(), text);
}

TEST(Annotations, CoarseSchemesWriteDisplayNames) {
  const auto c = parse(kTwoByTwo);
  const auto a = parse_ann("E1-P1\t1\t1\tNochange\tNochange\nE1-P1\t2\t2\tModify\tEvidence\n", c);
  std::ostringstream three, four;
  write_annotations(three, a, ClassScheme::Three);
  write_annotations(four, a, ClassScheme::Four);
  EXPECT_NE(three.str().find("Content"), std::string::npos);
  EXPECT_NE(four.str().find("Support"), std::string::npos);
  EXPECT_EQ(four.str().find("Evidence"), std::string::npos);
}

TEST(Annotations, CoverageViolationsAreRejected) {
  const auto c = parse(kTwoByTwo);
  // D2 sentence 2 uncovered
  EXPECT_THROW(parse_ann("E1-P1\t1\t1\tNochange\tNochange\nE1-P1\t2\t-\tDelete\tClaim\n", c),
               DataError);
  // covered twice
  EXPECT_THROW(parse_ann("E1-P1\t1\t1\tNochange\tNochange\nE1-P1\t1\t2\tModify\tClaim\n"
                         "E1-P1\t2\t-\tDelete\tClaim\n",
                         c),
               DataError);
  // crossing
  EXPECT_THROW(parse_ann("E1-P1\t1\t2\tModify\tClaim\nE1-P1\t2\t1\tModify\tClaim\n", c),
               DataError);
  // Nochange op with a content type
  EXPECT_THROW(parse_ann("E1-P1\t1\t1\tNochange\tClaim\nE1-P1\t2\t2\tModify\tClaim\n", c),
               DataError);
  // unknown pair
  EXPECT_THROW(parse_ann("E9-P1\t1\t1\tNochange\tNochange\n", c), ParseError);
  // out of range
  EXPECT_THROW(parse_ann("E1-P1\t3\t1\tModify\tClaim\n", c), ParseError);
}

TEST(Schemes, Coarsening) {
  EXPECT_EQ(coarsen(RevisionType::Claim, ClassScheme::Three), RevisionType::General);
  EXPECT_EQ(coarsen(RevisionType::Reasoning, ClassScheme::Four), RevisionType::General);
  EXPECT_EQ(coarsen(RevisionType::Claim, ClassScheme::Four), RevisionType::Claim);
  EXPECT_EQ(type_name(RevisionType::General, ClassScheme::Four), "Support");
  EXPECT_EQ(coarsen(RevisionType::Surface, ClassScheme::Three), RevisionType::Surface);
  EXPECT_EQ(type_name(RevisionType::General, ClassScheme::Three), "Content");
  EXPECT_EQ(scheme_classes(ClassScheme::Six).size(), 6u);
  EXPECT_EQ(scheme_classes(ClassScheme::Four).size(), 4u);
  EXPECT_EQ(scheme_classes(ClassScheme::Three).size(), 3u);
  EXPECT_EQ(parse_type("Content"), RevisionType::General);
  EXPECT_FALSE(parse_type("Purpose").has_value());
}

TEST(Revision, DisplayForm) {
  const Revision r{std::nullopt, 2, RevisionOp::Add, RevisionType::Reasoning};
  EXPECT_EQ(to_string(r), "(Null,2,Add,Reasoning)");
}

}  // namespace
}  // namespace revjoint
