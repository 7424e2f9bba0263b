/* Copyright 2026 The FPA Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "fpa/error.hpp"
#include "fpa/scoring.hpp"

namespace fpa::scoring {
namespace {

std::vector<Answer> answers(int correct, int total) {
  std::vector<Answer> out;
  for (int i = 0; i < total; ++i) out.push_back({i < correct ? 1 : 0, 1});
  return out;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

TEST(Tifa, Examples) {
  EXPECT_EQ(tifa_score(answers(4, 4)), 1.0);
  EXPECT_EQ(tifa_score(answers(0, 4)), 0.0);
  EXPECT_EQ(tifa_score(answers(3, 4)), 0.75);
  EXPECT_EQ(code_of([] { tifa_score({}); }), ErrorCode::kUnscorable);
}

TEST(Tifa, MatchesBruteForceCount) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Answer> a(1 + rng() % 20);
    int hits = 0;
    for (auto& x : a) {
      x = {static_cast<int>(rng() % 4), static_cast<int>(rng() % 4)};
      hits += x.chosen_index == x.correct_index;
    }
    const double s = tifa_score(a);
    EXPECT_EQ(s, static_cast<double>(hits) / static_cast<double>(a.size()));
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(Vqa, Examples) {
  EXPECT_EQ(vqa_score(std::vector<double>{1.0, 1.0}), 1.0);
  EXPECT_EQ(vqa_score(std::vector<double>{0.0}), 0.0);
  EXPECT_NEAR(vqa_score(std::vector<double>{0.2, 0.4, 0.9}), 0.5, 1e-15);
  EXPECT_EQ(code_of([] { vqa_score({}); }), ErrorCode::kUnscorable);
  EXPECT_EQ(code_of([] { vqa_score(std::vector<double>{0.5, 1.2}); }), ErrorCode::kInvalidArgument);
  try {
    vqa_score(std::vector<double>{-0.1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("invalid probability"), std::string::npos);
  }
}

TEST(Vqa, PermutationInvariantAndBounded) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(1 + rng() % 12);
    for (auto& x : p) x = u(rng);
    const double base = vqa_score(p);
    std::shuffle(p.begin(), p.end(), rng);
    EXPECT_NEAR(vqa_score(p), base, 1e-15);
    EXPECT_GE(base, 0.0);
    EXPECT_LE(base, 1.0);
  }
}

TEST(Combined, Examples) {
  EXPECT_EQ(combined_score(0.5, 0.5), 1.0);
  EXPECT_EQ(combined_score(1.0, 1.0), 2.0);
  EXPECT_EQ(format_fixed(combined_score(0.863, 0.829), 3), "1.692");
  EXPECT_EQ(code_of([] { combined_score(1.1, 0.0); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(combined_score(0.3, 0.6), combined_score(0.6, 0.3));
}

TEST(ReportAverage, TableValues) {
  EXPECT_EQ(format_fixed(report_average(0.863, 0.829), 3), "0.846");
  EXPECT_EQ(format_fixed(report_average(0.937, 0.930), 3), "0.934");
  EXPECT_EQ(format_fixed(report_average(0.845, 0.850), 3), "0.848");
}

TEST(ReportAverage, IsHalfOfCombinedBeforeRounding) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng), b = u(rng);
    EXPECT_EQ(report_average(a, b), round_half_up(combined_score(a, b) / 2.0, 3));
  }
}

TEST(QuestionText, Template) {
  EXPECT_EQ(vqa_question_text({"a red bicycle", ""}), "Does this figure show a red bicycle?");
  EXPECT_EQ(vqa_question_text({"cat", ""}), "Does this figure show cat?");
  EXPECT_EQ(code_of([] { vqa_question_text({"", ""}); }), ErrorCode::kInvalidArgument);
}

TEST(Rounding, HalfUpAwayFromZero) {
  EXPECT_EQ(format_fixed(0.8475, 3), "0.848");
  EXPECT_EQ(format_fixed(0.9335, 3), "0.934");
  EXPECT_EQ(format_fixed(0.8445, 3), "0.845");
  EXPECT_EQ(format_fixed(0.0004999, 3), "0.000");
  EXPECT_EQ(format_fixed(-0.0005, 3), "-0.001");
  EXPECT_EQ(format_fixed(-0.00004, 4), "0.0000");
  EXPECT_EQ(format_signed(0.0424, 4), "+0.0424");
  EXPECT_EQ(format_signed(-0.05, 4), "-0.0500");
  EXPECT_EQ(format_fixed(0.9995, 3), "1.000");
}

TEST(YesProbability, NormalisedOverYesNo) {
  EXPECT_NEAR(normalized_yes_probability(std::log(0.6), std::log(0.2)), 0.75, 1e-12);
  EXPECT_NEAR(normalized_yes_probability(-1000.0, -1000.0), 0.5, 1e-12);
}

TEST(Bundle, ForcedArithmetic) {
  std::vector<QuestionOutcome> qs = {
      {"a", 0, true}, {"b", 0, true}, {"c", 0, true}, {"d", 1, false}};
  std::vector<ChunkOutcome> cs = {{"x", 1.0}, {"y", 0.5}};
  const auto b = make_score_bundle(qs, cs);
  EXPECT_EQ(*b.tifa, 0.75);
  EXPECT_EQ(*b.vqa, 0.75);
  EXPECT_EQ(*b.combined, 1.5);
}

TEST(Bundle, EmptyEvidenceStaysUnscored) {
  const auto b = make_score_bundle({}, {{"x", 0.5}});
  EXPECT_FALSE(b.tifa.has_value());
  EXPECT_TRUE(b.vqa.has_value());
  EXPECT_FALSE(b.scored());
}

}  // namespace
}  // namespace fpa::scoring
