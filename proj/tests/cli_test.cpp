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

#include <sys/wait.h>

#include <cstdlib>
#include <regex>

#include <gtest/gtest.h>
#include <json.hpp>

#include "test_support.hpp"

#ifndef FPA_CLI_PATH
#error "FPA_CLI_PATH must name the built command-line binary"
#endif

namespace {

using nlohmann::json;
using fpa::testing::read_text;
using fpa::testing::TempDir;
using fpa::testing::write_text;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run fpa_run(const TempDir& dir, const std::string& args) {
  const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string("'") + FPA_CLI_PATH + "' " + args + " > '" + out.string() +
                          "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_text(out);
  r.err = read_text(err);
  return r;
}

std::string strip_timestamps(std::string s) {
  static const std::regex ts("\"created_at\":\"[^\"]*\"");
  return std::regex_replace(s, ts, "\"created_at\":\"\"");
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    write_text(dir_ / "p.txt",
               "a red bicycle next to a tree\nan old man reading a newspaper on a bench\n"
               "three cats sleeping on a blue sofa\na castle on a hill under a stormy sky\n"
               "a woman holding an umbrella in the rain\n");
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  TempDir dir_;
};

TEST_F(Cli, OptimizeWritesRecordsAndManifest) {
  const auto r = fpa_run(dir_, "optimize --prompts " + path("p.txt") + " --out " + path("r.jsonl") +
                                   " --synthetic --m 4 --k 2 --seed 7");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto text = read_text(path("r.jsonl"));
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
  const auto manifest = json::parse(read_text(path("r.jsonl.manifest.json")));
  EXPECT_EQ(manifest.at("command"), "optimize");
  EXPECT_EQ(manifest.at("exit_status"), 0);
  EXPECT_EQ(manifest.at("engine_seed"), 7);
}

TEST_F(Cli, OptimizeIsDeterministicModuloTimestamps) {
  const std::string common = "optimize --prompts " + path("p.txt") + " --synthetic --m 3 --k 2 --seed 7 --noise-scale 0.2";
  ASSERT_EQ(fpa_run(dir_, common + " --out " + path("a.jsonl")).code, 0);
  ASSERT_EQ(fpa_run(dir_, common + " --out " + path("b.jsonl") + " --parallelism 3").code, 0);
  EXPECT_EQ(strip_timestamps(read_text(path("a.jsonl"))), strip_timestamps(read_text(path("b.jsonl"))));
}

TEST_F(Cli, MissingPromptsIsFatalAndNamesPath) {
  const auto r = fpa_run(dir_, "optimize --prompts " + path("nope.txt") + " --out " + path("r.jsonl") +
                                   " --synthetic");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("nope.txt"), std::string::npos) << r.err;
}

TEST_F(Cli, NoBackendsIsFatal) {
  const auto r = fpa_run(dir_, "optimize --prompts " + path("p.txt") + " --out " + path("r.jsonl"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("no backends configured"), std::string::npos) << r.err;
}

TEST_F(Cli, ResumeSkipsFinishedPrompts) {
  const std::string common = "optimize --prompts " + path("p.txt") + " --out " + path("r.jsonl") + " --synthetic --m 2 --k 1";
  ASSERT_EQ(fpa_run(dir_, common).code, 0);
  const auto first = read_text(path("r.jsonl"));
  ASSERT_EQ(fpa_run(dir_, common).code, 0);
  EXPECT_EQ(read_text(path("r.jsonl")), first);
}

TEST_F(Cli, ReportOnEmptyRecordsSucceeds) {
  write_text(path("empty.jsonl"), "");
  const auto r = fpa_run(dir_, "report --records " + path("empty.jsonl"));
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(Cli, ReportTableAndCost) {
  ASSERT_EQ(fpa_run(dir_, "optimize --prompts " + path("p.txt") + " --out " + path("r.jsonl") + " --synthetic").code, 0);
  const auto r = fpa_run(dir_, "report --records " + path("r.jsonl") + " --cost");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Original Prompts"), std::string::npos);
  EXPECT_NE(r.out.find("After 2 Iterations"), std::string::npos);
  const auto j = fpa_run(dir_, "report --records " + path("r.jsonl") + " --json");
  EXPECT_EQ(json::parse(j.out).at("table").size(), 2u);
}

TEST_F(Cli, ExportAboveAllGainsWritesNoRows) {
  ASSERT_EQ(fpa_run(dir_, "optimize --prompts " + path("p.txt") + " --out " + path("r.jsonl") + " --synthetic --m 2 --k 1").code, 0);
  const auto r = fpa_run(dir_, "export --records " + path("r.jsonl") + " --format sft --min-gain 10 --out " + path("sft.jsonl"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(path("sft.jsonl")));
  EXPECT_EQ(read_text(path("sft.jsonl")), "");
  const auto all = fpa_run(dir_, "export --records " + path("r.jsonl") + " --format icl-pool --out " + path("pool.jsonl"));
  EXPECT_EQ(all.code, 0);
  const auto pool = read_text(path("pool.jsonl"));
  EXPECT_EQ(std::count(pool.begin(), pool.end(), '\n'), 5);
}

TEST_F(Cli, OnePassIclFromExportedPool) {
  ASSERT_EQ(fpa_run(dir_, "optimize --prompts " + path("p.txt") + " --out " + path("r.jsonl") + " --synthetic --m 2 --k 1").code, 0);
  ASSERT_EQ(fpa_run(dir_, "export --records " + path("r.jsonl") + " --format icl-pool --out " + path("pool.jsonl")).code, 0);
  const auto r = fpa_run(dir_, "one-pass --prompts " + path("p.txt") + " --out " + path("o.jsonl") +
                                   " --mode icl --n 3 --examples " + path("pool.jsonl") +
                                   " --synthetic --messages-out " + path("m.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto line = read_text(path("o.jsonl"));
  const auto first = json::parse(line.substr(0, line.find('\n')));
  EXPECT_TRUE(first.contains("id"));
  EXPECT_TRUE(first.contains("original"));
  EXPECT_TRUE(first.contains("optimized"));
  const auto too_many = fpa_run(dir_, "one-pass --prompts " + path("p.txt") + " --out " + path("o2.jsonl") +
                                          " --mode icl --n 50 --examples " + path("pool.jsonl") + " --synthetic");
  EXPECT_EQ(too_many.code, 1);
}

TEST_F(Cli, CorrelateConstantRatingsIsUndefined) {
  ASSERT_EQ(fpa_run(dir_, "optimize --prompts " + path("p.txt") + " --out " + path("r.jsonl") + " --synthetic --m 2 --k 1").code, 0);
  std::string ratings;
  for (int i = 0; i < 5; ++i) {
    for (const char* c : {"original", "optimized"}) {
      ratings += json{{"prompt_id", std::to_string(i)}, {"annotator_id", "a"}, {"alignment", 2},
                      {"structure", 2}, {"case", c}}.dump() + "\n";
    }
  }
  write_text(path("ratings.jsonl"), ratings);
  const auto r = fpa_run(dir_, "correlate --ratings " + path("ratings.jsonl") + " --records " + path("r.jsonl"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("undefined correlation"), std::string::npos) << r.err;
}

TEST_F(Cli, UsageErrors) {
  EXPECT_NE(fpa_run(dir_, "").code, 0);
  EXPECT_NE(fpa_run(dir_, "optimize --out x").code, 0);
  EXPECT_EQ(fpa_run(dir_, "--version").code, 0);
}

}  // namespace
