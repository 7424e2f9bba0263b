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

#include <thread>

#include <gtest/gtest.h>

#include "fpa/cache.hpp"
#include "fpa/log.hpp"
#include "fpa/optimizer.hpp"
#include "test_support.hpp"

namespace fpa {
namespace {

using nlohmann::json;
using testing::TempDir;

TEST(CacheKey, CanonicalOverKeyOrder) {
  const auto a = json::parse(R"({"b":1,"a":{"y":[1,2],"x":"s"}})");
  const auto b = json::parse(R"({"a":{"x":"s","y":[1,2]},"b":1})");
  EXPECT_EQ(canonical_json(a), canonical_json(b));
  EXPECT_EQ(CacheKey::of(BackendKind::kVqaAnswer, "m", a), CacheKey::of(BackendKind::kVqaAnswer, "m", b));
  EXPECT_NE(CacheKey::of(BackendKind::kVqaAnswer, "m", a), CacheKey::of(BackendKind::kYesProb, "m", a));
  EXPECT_NE(CacheKey::of(BackendKind::kVqaAnswer, "m", a), CacheKey::of(BackendKind::kVqaAnswer, "n", a));
  EXPECT_EQ(CacheKey::of(BackendKind::kImageGen, "m", a).hex.size(), 64u);
}

TEST(ResponseCache, PutGetAndMiss) {
  TempDir dir;
  ResponseCache cache(dir.path());
  const auto key = CacheKey::of(BackendKind::kParaphraser, "m", {{"p", 1}});
  EXPECT_FALSE(cache.get(key).has_value());
  cache.put(key, json{{"v", {1, 2, 3}}}, {{"p", 1}});
  ASSERT_TRUE(cache.get(key).has_value());
  EXPECT_EQ(*cache.get(key), (json{{"v", {1, 2, 3}}}));
  EXPECT_TRUE(std::filesystem::exists(cache.path_for(key)));
}

TEST(ResponseCache, CorruptEntryIsEvictedWithWarning) {
  TempDir dir;
  ResponseCache cache(dir.path());
  const auto key = CacheKey::of(BackendKind::kYesProb, "m", {{"p", 2}});
  cache.put(key, 0.5);
  testing::write_text(cache.path_for(key), "{\"key\": \"trunc");
  std::vector<std::string> warnings;
  set_log_sink([&](LogLevel level, std::string_view msg) {
    if (level == LogLevel::kWarning) warnings.emplace_back(msg);
  });
  EXPECT_FALSE(cache.get(key).has_value());
  set_log_sink(nullptr);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("corrupt cache entry"), std::string::npos);
  EXPECT_FALSE(std::filesystem::exists(cache.path_for(key)));
}

TEST(ResponseCache, ConcurrentWritersLeaveReadableEntries) {
  TempDir dir;
  ResponseCache cache(dir.path());
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 50; ++i) {
        const auto key = CacheKey::of(BackendKind::kImageGen, "m", {{"i", i % 10}});
        cache.put(key, json{{"i", i % 10}, {"writer", t}});
        const auto got = cache.get(key);
        if (got) EXPECT_EQ(got->at("i"), i % 10);
      }
    });
  }
  for (auto& th : threads) th.join();
  for (int i = 0; i < 10; ++i) {
    EXPECT_TRUE(cache.get(CacheKey::of(BackendKind::kImageGen, "m", {{"i", i}})).has_value());
  }
}

TEST(ResponseCache, WarmRunMakesNoBackendCalls) {
  TempDir dir;
  auto cache = std::make_shared<ResponseCache>(dir.path());
  Optimizer opt(testing::synthetic_backends({.seed = 5, .noise_scale = 0.2}), cache);
  OptimizeConfig cfg;
  cfg.m = 3;
  cfg.k = 2;
  const PromptRecord p{"p", "a lighthouse on a cliff at dusk", "coco", "t"};
  const auto cold = opt.optimize_iterative(p, cfg);
  EXPECT_GT(cold.stats.total(), 0u);
  const auto warm = opt.optimize_iterative(p, cfg);
  EXPECT_EQ(warm.stats.total(), 0u);
  auto a = cold, b = warm;
  a.stats = b.stats = {};
  EXPECT_EQ(a, b);
}

TEST(ResponseCache, ShapeMismatchFallsThroughToBackend) {
  TempDir dir;
  auto cache = std::make_shared<ResponseCache>(dir.path());
  auto world = std::make_shared<SyntheticWorld>(SyntheticWorldConfig{});
  StatsRecorder stats;
  BackendSet raw = testing::synthetic_backends();
  const auto set = with_response_cache(with_call_counting(raw, stats), cache);
  const auto first = set.paraphraser->paraphrase("a cat", 2, 1);
  const auto key = CacheKey::of(BackendKind::kParaphraser, world->model_id(),
                                {{"op", "paraphrase"}, {"prompt", "a cat"}, {"m", 2}, {"seed", 1}});
  ASSERT_TRUE(cache->get(key).has_value());
  cache->put(key, json{"only one"});
  set_log_sink([](LogLevel, std::string_view) {});
  EXPECT_EQ(set.paraphraser->paraphrase("a cat", 2, 1), first);
  set_log_sink(nullptr);
  EXPECT_EQ(stats.snapshot().paraphraser_calls, 2u);
}

}  // namespace
}  // namespace fpa
