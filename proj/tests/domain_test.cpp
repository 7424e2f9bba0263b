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

#include <gtest/gtest.h>

#include "fpa/error.hpp"
#include "fpa/hashing.hpp"
#include "fpa/json_io.hpp"
#include "fpa/optimizer.hpp"
#include "test_support.hpp"

namespace fpa {
namespace {

using testing::bundle;
using testing::hand_record;

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v) {
    if (s.find(needle) != std::string::npos) return true;
  }
  return false;
}

TEST(ValidateRecord, WellFormedIsClean) {
  const auto r = hand_record({bundle(4, 4, {1.0}), bundle(2, 4, {0.5})}, bundle(2, 4, {1.0}), 1);
  EXPECT_TRUE(validate_record(r).empty());
}

TEST(ValidateRecord, CombinedMismatchNamesCombined) {
  ScoreBundle bad = bundle(2, 4, {0.5});  // tifa 0.5, vqa 0.5
  bad.combined = 0.2;
  const auto r = hand_record({bad}, bundle(2, 4, {0.5}), 0);
  const auto v = validate_record(r);
  ASSERT_EQ(v.size(), 1u) << v.front() << " | " << v.back();
  EXPECT_NE(v[0].find("combined"), std::string::npos);
}

TEST(ValidateRecord, NonArgmaxSelectionNamesSelectedIndex) {
  // Brute force over a 3-candidate trace: scores 0.1, 0.9, 0.5.
  auto mk = [](double combined) {
    ScoreBundle b;
    b.per_question = {{"q0", 0, false}};
    b.per_chunk = {{"c0", combined}};
    b.tifa = 0.0;
    b.vqa = combined;
    b.combined = combined;
    return b;
  };
  auto r = hand_record({mk(0.9), mk(0.5)}, mk(0.1), 0);
  r.pool_incumbent = false;
  std::size_t brute = 0;
  for (std::size_t i = 0; i < r.traces[0].candidates.size(); ++i) {
    if (*r.traces[0].candidates[i].score.combined > *r.traces[0].candidates[brute].score.combined) {
      brute = i;
    }
  }
  ASSERT_EQ(brute, 1u);
  const auto v = validate_record(r);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("selected_index"), std::string::npos);
}

TEST(ValidateRecord, TieMustGoToLowestIndex) {
  auto r = hand_record({bundle(4, 4, {1.0}), bundle(4, 4, {1.0})}, bundle(1, 4, {1.0}), 2);
  EXPECT_TRUE(mentions(validate_record(r), "selected_index"));
}

TEST(ValidateRecord, FinalTextMustMatchSelection) {
  auto r = hand_record({bundle(4, 4, {1.0})}, bundle(1, 4, {1.0}), 1);
  r.final_text = "something else";
  EXPECT_TRUE(mentions(validate_record(r), "final_text"));
}

TEST(ValidateRecord, ScoredFlagsWithoutEvidenceAreViolations) {
  auto r = hand_record({}, bundle(1, 4, {1.0}), 0);
  r.original_score.per_question.clear();
  EXPECT_TRUE(mentions(validate_record(r), "tifa"));
}

TEST(ValidateRecord, NonContiguousIndices) {
  auto r = hand_record({bundle(1, 4, {1.0})}, bundle(1, 4, {1.0}), 0);
  r.traces[0].candidates[1].candidate.index = 5;
  EXPECT_TRUE(mentions(validate_record(r), "index"));
}

TEST(Json, RecordRoundTrip) {
  Optimizer opt(testing::synthetic_backends({.seed = 2, .noise_scale = 0.2}));
  OptimizeConfig cfg;
  cfg.engine_seed = 5;
  for (const char* text : {"a red bicycle next to a tree", "sunset", "two dogs in the snow"}) {
    const auto rec = opt.optimize_iterative({std::string("id-") + text, text, "coco", "t"}, cfg);
    const nlohmann::json j = rec;
    EXPECT_EQ(j.at("schema"), "fpa/1");
    const auto back = nlohmann::json::parse(j.dump()).get<OptimizationRecord>();
    EXPECT_EQ(back, rec);
  }
}

TEST(Json, UnscoredSerialisesAsNull) {
  ScoreBundle b;
  const nlohmann::json j = b;
  EXPECT_TRUE(j.at("tifa").is_null());
  EXPECT_TRUE(j.at("combined").is_null());
  EXPECT_EQ(j.get<ScoreBundle>(), b);
}

TEST(Json, RejectsUnknownSchema) {
  nlohmann::json j = hand_record({}, bundle(1, 4, {1.0}), 0);
  j["schema"] = "fpa/99";
  EXPECT_THROW(j.get<OptimizationRecord>(), std::exception);
}

TEST(Json, HumanRatingScale) {
  auto j = nlohmann::json::parse(
      R"({"prompt_id":"p","annotator_id":"a","alignment":4,"structure":0,"case":"optimized"})");
  const auto r = j.get<HumanRating>();
  EXPECT_EQ(r.prompt_case, PromptCase::kOptimized);
  j["alignment"] = 5;
  EXPECT_THROW(j.get<HumanRating>(), Error);
}

TEST(ExamplePairs, GainFromRecord) {
  const auto r = hand_record({bundle(4, 4, {1.0})}, bundle(2, 4, {1.0}), 1);
  const auto p = example_pair_from(r);
  EXPECT_EQ(p.original, "a red bicycle");
  EXPECT_EQ(p.optimized, "variant 1");
  EXPECT_DOUBLE_EQ(p.combined_gain, 0.5);
}

TEST(Stats, Arithmetic) {
  BackendCallStats a, b;
  a[BackendKind::kImageGen] = 9;
  b[BackendKind::kImageGen] = 4;
  b[BackendKind::kOnePassLlm] = 1;
  a += b;
  EXPECT_EQ(a.image_gen_calls, 13u);
  EXPECT_EQ((a - b).image_gen_calls, 9u);
  EXPECT_EQ(a.total(), 14u);
  EXPECT_EQ(a.scoring_calls(), 13u);
}

TEST(Enums, StringRoundTrip) {
  for (auto k : kAllBackendKinds) EXPECT_EQ(backend_kind_from_string(to_string(k)), k);
  for (auto p : {Provenance::kOriginal, Provenance::kParaphrase, Provenance::kFinetunedOnePass,
                 Provenance::kIclOnePass}) {
    EXPECT_EQ(provenance_from_string(to_string(p)), p);
  }
  EXPECT_THROW(backend_kind_from_string("nope"), Error);
}

TEST(Hashing, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Hashing, SplitMixBelowIsInRangeAndDeterministic) {
  SplitMix a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.below(7);
    EXPECT_LT(x, 7u);
    EXPECT_EQ(x, b.below(7));
  }
  EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
  EXPECT_EQ(derive_seed(1, "x"), derive_seed(1, "x"));
}

TEST(Trim, Whitespace) {
  EXPECT_EQ(trim("  a b \n"), "a b");
  EXPECT_EQ(trim(" \t "), "");
}

}  // namespace
}  // namespace fpa
