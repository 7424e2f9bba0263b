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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <regex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fpa/analytics.hpp"
#include "fpa/cache.hpp"
#include "fpa/error.hpp"
#include "fpa/hashing.hpp"
#include "fpa/optimizer.hpp"
#include "fpa/scoring.hpp"
#include "fpa/synthetic.hpp"
#include "test_support.hpp"

#ifndef FPA_CLI_PATH
#error "FPA_CLI_PATH must name the built command-line binary"
#endif
#ifndef FPA_GOLDEN_PATH
#error "FPA_GOLDEN_PATH must name the ICL golden file"
#endif

namespace fpa {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Seeded prompt built from small word lists.
std::string seeded_prompt(std::uint64_t seed) {
  static const std::vector<std::string> adj = {"red", "old", "tiny", "golden", "wooden",
                                               "misty", "blue", "ancient", "shiny", "quiet"};
  static const std::vector<std::string> noun = {"bicycle", "castle", "cat", "lighthouse", "boat",
                                                "tree", "robot", "violin", "bridge", "fox"};
  static const std::vector<std::string> prep = {"next to", "under", "behind", "on", "near"};
  SplitMix r(seed ^ 0x5eedULL);
  return "a " + adj[r.below(adj.size())] + " " + noun[r.below(noun.size())] + " " +
         prep[r.below(prep.size())] + " a " + adj[r.below(adj.size())] + " " +
         noun[r.below(noun.size())];
}

// ---------------------------------------------------------------------------

struct PublishedRow {
  const char* dataset;
  const char* mode;
  double tifa;
  double vqa;
  const char* average;
};

Outcome table_averages() {
  const auto t0 = Clock::now();
  const std::vector<PublishedRow> rows = {
      {"Coco Captions", "Original Prompts", 0.863, 0.829, "0.846"},
      {"Coco Captions", "After 2 Iterations", 0.967, 0.954, "0.961"},
      {"Coco Captions", "Mistral 7B", 0.845, 0.850, "0.848"},
      {"Coco Captions", "Fine-tuned Mistral 7B", 0.839, 0.811, "0.825"},
      {"Coco Captions", "Mistral Large (no examples)", 0.882, 0.873, "0.878"},
      {"Coco Captions", "Mistral Large (100 examples)", 0.872, 0.867, "0.869"},
      {"PartiPrompts", "Original Prompts", 0.813, 0.760, "0.787"},
      {"PartiPrompts", "After 2 Iterations", 0.937, 0.930, "0.934"},
      {"PartiPrompts", "Mistral 7B", 0.799, 0.761, "0.780"},
      {"PartiPrompts", "Fine-tuned Mistral 7B", 0.820, 0.784, "0.802"},
      {"PartiPrompts", "Mistral Large (no examples)", 0.844, 0.812, "0.828"},
      {"PartiPrompts", "Mistral Large (100 examples)", 0.856, 0.833, "0.845"},
  };
  std::vector<ScoreSample> samples;
  for (const auto& r : rows) samples.push_back({r.dataset, r.mode, r.tifa, r.vqa});
  const auto table = aggregate(samples);
  int matched = 0;
  std::string misses;
  for (const auto& r : rows) {
    std::string got;
    for (const auto& row : table) {
      if (row.dataset == r.dataset && row.mode == r.mode) {
        got = scoring::format_fixed(row.mean_average, 3);
      }
    }
    const std::string direct = scoring::format_fixed(scoring::report_average(r.tifa, r.vqa), 3);
    if (got == r.average && direct == r.average) {
      ++matched;
    } else {
      misses += std::string(" [") + r.dataset + " / " + r.mode + ": computed " + got +
                ", published " + r.average + "]";
    }
  }
  const double secs = seconds_since(t0);
  return {matched == 12 && secs < 1.0,
          std::to_string(matched) + "/12 average cells match" + misses + fmt(" (%.3f s)", secs)};
}

Outcome table_deltas() {
  const auto t0 = Clock::now();
  struct Case {
    double before, after;
    const char* want;
  };
  const std::vector<Case> cases = {{0.8168, 0.8592, "+0.0424"},
                                   {0.7890, 0.8416, "+0.0526"},
                                   {3.2500, 3.3597, "+0.1097"},
                                   {2.8947, 2.8447, "-0.0500"}};
  int ok = 0;
  std::string got;
  for (const auto& c : cases) {
    const auto s = scoring::format_signed(delta(c.before, c.after), 4);
    got += " " + s;
    ok += s == c.want;
  }
  const double secs = seconds_since(t0);
  return {ok == 4 && secs < 1.0, std::to_string(ok) + "/4 deltas:" + got + fmt(" (%.3f s)", secs)};
}

// Definitional formula in extended precision.
double pearson_textbook(const std::vector<double>& x, const std::vector<double>& y) {
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

Outcome pearson_oracle() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0, worst_affine = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 49;
    std::vector<double> x(n), y(n), a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = g(rng);
      y[i] = 0.3 * x[i] + g(rng);
      a[i] = 3 * x[i] + 2;
      b[i] = -x[i];
    }
    worst = std::max(worst, std::abs(pearson(x, y) - pearson_textbook(x, y)));
    worst_affine = std::max(worst_affine, std::abs(pearson(x, a) - 1.0));
    worst_affine = std::max(worst_affine, std::abs(pearson(x, b) + 1.0));
  }
  return {worst <= 1e-12 && worst_affine <= 1e-12,
          "max |r - oracle| = " + fmt("%.3g", worst) + ", max affine error = " +
              fmt("%.3g", worst_affine) + " over 1000 pairs"};
}

Outcome monotonicity() {
  const auto t0 = Clock::now();
  int prompts_ok = 0, iters_ok = 0, iters = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Optimizer opt(testing::synthetic_backends({.seed = seed, .noise_scale = 0.2}));
    OptimizeConfig cfg;
    cfg.m = 4;
    cfg.k = 2;
    cfg.pool_incumbent = true;
    cfg.engine_seed = seed;
    const auto r = opt.optimize_iterative({std::to_string(seed), seeded_prompt(seed), "", ""}, cfg);
    prompts_ok += *r.final_score.combined >= *r.original_score.combined;
    double prev = *r.original_score.combined;
    for (const auto& t : r.traces) {
      const double best = *t.candidates[t.selected_index].score.combined;
      iters_ok += best >= prev;
      ++iters;
      prev = best;
    }
  }
  const double secs = seconds_since(t0);
  return {prompts_ok == 200 && iters_ok == iters && secs < 10.0,
          std::to_string(prompts_ok) + "/200 prompts, " + std::to_string(iters_ok) + "/" +
              std::to_string(iters) + " iterations non-decreasing" + fmt(" (%.2f s)", secs)};
}

Outcome best_of_m() {
  const auto t0 = Clock::now();
  const int n = 500;
  std::vector<double> diff;
  double sum4 = 0, sum1 = 0;
  for (std::uint64_t seed = 0; seed < static_cast<std::uint64_t>(n); ++seed) {
    Optimizer opt(testing::synthetic_backends({.seed = seed, .noise_scale = 0.2}));
    const PromptRecord p{std::to_string(seed), seeded_prompt(seed), "", ""};
    OptimizeConfig cfg;
    cfg.engine_seed = seed;
    cfg.m = 4;
    const double s4 = *opt.optimize_iterative(p, cfg).final_score.combined;
    cfg.m = 1;
    const double s1 = *opt.optimize_iterative(p, cfg).final_score.combined;
    sum4 += s4;
    sum1 += s1;
    diff.push_back(s4 - s1);
  }
  double mean = 0;
  for (double d : diff) mean += d;
  mean /= n;
  double var = 0;
  for (double d : diff) var += (d - mean) * (d - mean);
  var /= (n - 1);
  const double t = var > 0 ? mean / std::sqrt(var / n) : (mean > 0 ? INFINITY : 0.0);
  // Upper 1% point of Student's t with 499 degrees of freedom.
  const double critical = 2.334;
  const double secs = seconds_since(t0);
  return {mean > 0 && t > critical && secs < 60.0,
          "mean m=4 " + fmt("%.4f", sum4 / n) + " vs m=1 " + fmt("%.4f", sum1 / n) +
              ", paired t = " + fmt("%.2f", t) + " (critical " + fmt("%.3f", critical) + ")" +
              fmt(" (%.1f s)", secs)};
}

Outcome complexity() {
  Optimizer opt(testing::synthetic_backends({.seed = 6}));
  OptimizeConfig cfg;
  cfg.k = 2;
  cfg.m = 4;
  std::vector<OptimizationRecord> recs;
  StatsRecorder one_pass;
  for (int i = 0; i < 10; ++i) {
    const PromptRecord p{std::to_string(i), seeded_prompt(i), "", ""};
    recs.push_back(opt.optimize_iterative(p, cfg));
    opt.optimize_one_pass(p, OnePassMode::kFinetuned, {}, 1, one_pass);
  }
  BackendCallStats it;
  for (const auto& r : recs) it += r.stats;
  const auto op = one_pass.snapshot();
  ModeCost iterative{"iterative", false, 10, it, 2, 4};
  ModeCost single{"one-pass", true, 10, op, std::nullopt, std::nullopt};
  const auto report = cost_report(std::vector<ModeCost>{iterative, single});
  const bool ok = it.image_gen_calls == 90 && it.chunk_extract_calls == 10 &&
                  it.question_gen_calls == 10 && op.one_pass_llm_calls == 10 &&
                  op.image_gen_calls == 0 && op.scoring_calls() == 0 && report.consistent();
  return {ok, "iterative image/chunk/question = " + std::to_string(it.image_gen_calls) + "/" +
                  std::to_string(it.chunk_extract_calls) + "/" +
                  std::to_string(it.question_gen_calls) + ", one-pass llm = " +
                  std::to_string(op.one_pass_llm_calls) + ", one-pass scoring = " +
                  std::to_string(op.scoring_calls())};
}

Outcome icl_golden() {
  const std::vector<ExamplePair> ex = {
      {"a dog in a park", "a golden retriever playing fetch in a sunlit park, vivid colors", "", 0},
      {"a bowl of fruit",
       "a ceramic bowl of ripe apples and pears on a wooden table, soft window light", "", 0}};
  std::string rendered;
  for (const auto& m : assemble_icl_messages("a lighthouse at night", ex)) {
    rendered += json{{"role", m.role}, {"content", m.content}}.dump() + "\n";
  }
  const std::string golden = testing::read_text(FPA_GOLDEN_PATH);
  if (golden.empty()) return {false, "golden file missing or empty"};
  if (rendered == golden) return {true, std::to_string(rendered.size()) + " bytes identical"};
  std::size_t i = 0;
  while (i < rendered.size() && i < golden.size() && rendered[i] == golden[i]) ++i;
  return {false, "first difference at byte " + std::to_string(i)};
}

// --- command-line helpers ---------------------------------------------------

pid_t spawn_cli(std::vector<std::string> args) {
  const pid_t pid = fork();
  if (pid == 0) {
    std::vector<char*> argv;
    std::string bin = FPA_CLI_PATH;
    argv.push_back(bin.data());
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    const int null_fd = open("/dev/null", O_WRONLY);
    dup2(null_fd, STDOUT_FILENO);
    dup2(null_fd, STDERR_FILENO);
    execv(bin.c_str(), argv.data());
    _exit(127);
  }
  return pid;
}

int run_cli(const std::vector<std::string>& args) {
  int status = 0;
  waitpid(spawn_cli(args), &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t count_lines(const std::filesystem::path& p) {
  const auto t = testing::read_text(p);
  return static_cast<std::size_t>(std::count(t.begin(), t.end(), '\n'));
}

std::string without_timestamps(const std::string& s) {
  static const std::regex ts("\"created_at\":\"[^\"]*\"");
  return std::regex_replace(s, ts, "\"created_at\":\"\"");
}

Outcome determinism_and_resume() {
  testing::TempDir dir("fpa-accept");
  std::string prompts;
  const int n = 20;
  for (int i = 0; i < n; ++i) prompts += seeded_prompt(1000 + i) + "\n";
  testing::write_text(dir / "p.txt", prompts);
  auto args = [&](const std::string& out) {
    return std::vector<std::string>{"optimize", "--prompts", (dir / "p.txt").string(), "--out",
                                    (dir / out).string(), "--synthetic", "--seed", "7",
                                    "--noise-scale", "0.2", "--m", "4", "--k", "2"};
  };
  if (run_cli(args("a.jsonl")) != 0 || run_cli(args("b.jsonl")) != 0) {
    return {false, "optimize did not exit 0"};
  }
  const auto a = without_timestamps(testing::read_text(dir / "a.jsonl"));
  const bool deterministic = a == without_timestamps(testing::read_text(dir / "b.jsonl"));

  // Slow run killed once at least half of the records are on disk.
  auto slow = args("c.jsonl");
  slow.insert(slow.end(), {"--latency-ms", "4"});
  const pid_t pid = spawn_cli(slow);
  std::size_t at_kill = 0;
  const auto deadline = Clock::now() + std::chrono::seconds(120);
  while (Clock::now() < deadline) {
    at_kill = count_lines(dir / "c.jsonl");
    if (at_kill >= n / 2) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  kill(pid, SIGKILL);
  int status = 0;
  waitpid(pid, &status, 0);
  const bool killed_midway = WIFSIGNALED(status) && at_kill >= n / 2 && at_kill < n;

  const int resumed = run_cli(args("c.jsonl"));
  std::set<std::string> ids;
  std::size_t lines = 0;
  const auto text = testing::read_text(dir / "c.jsonl");
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    ++lines;
    ids.insert(json::parse(text.substr(start, end - start)).at("prompt").at("id").get<std::string>());
    start = end + 1;
  }
  const bool complete = resumed == 0 && lines == static_cast<std::size_t>(n) &&
                        ids.size() == static_cast<std::size_t>(n);
  const bool same_content = without_timestamps(text) == a;
  return {deterministic && killed_midway && complete && same_content,
          std::string("repeat identical: ") + (deterministic ? "yes" : "no") + ", killed after " +
              std::to_string(at_kill) + "/" + std::to_string(n) + " records, after resume " +
              std::to_string(lines) + " lines with " + std::to_string(ids.size()) +
              " unique ids, matches uninterrupted run: " + (same_content ? "yes" : "no")};
}

Outcome warm_cache() {
  testing::TempDir dir("fpa-cache");
  auto cache = std::make_shared<ResponseCache>(dir.path());
  StatsRecorder outer;
  const BackendSet raw =
      with_call_counting(testing::synthetic_backends({.seed = 3, .noise_scale = 0.2}), outer);
  Optimizer opt(raw, cache);
  OptimizeConfig cfg;
  cfg.engine_seed = 5;
  std::vector<OptimizationRecord> cold, warm;
  for (int i = 0; i < 10; ++i) cold.push_back(opt.optimize_iterative({std::to_string(i), seeded_prompt(i), "", ""}, cfg));
  const auto after_cold = outer.snapshot();
  for (int i = 0; i < 10; ++i) warm.push_back(opt.optimize_iterative({std::to_string(i), seeded_prompt(i), "", ""}, cfg));
  const auto after_warm = outer.snapshot();
  std::uint64_t warm_counted = 0;
  bool same = true;
  for (int i = 0; i < 10; ++i) {
    warm_counted += warm[i].stats.total();
    auto a = cold[i], b = warm[i];
    a.stats = b.stats = {};
    same = same && a == b;
  }
  return {after_cold.total() > 0 && after_warm == after_cold && warm_counted == 0 && same,
          "cold run " + std::to_string(after_cold.total()) + " calls, warm run " +
              std::to_string((after_warm - after_cold).total()) + " calls, records equal: " +
              (same ? "yes" : "no")};
}

Outcome score_math() {
  int ok = 0, total = 0;
  std::string failed;
  auto check = [&](bool cond, const char* name) {
    ++total;
    if (cond) ++ok;
    else failed += std::string(" ") + name;
  };
  auto answers = [](int correct) {
    std::vector<scoring::Answer> a;
    for (int i = 0; i < 4; ++i) a.push_back({i < correct ? 2 : 0, 2});
    return a;
  };
  auto error_text = [](auto&& fn) -> std::string {
    try {
      fn();
    } catch (const Error& e) {
      return e.what();
    }
    return "";
  };
  check(scoring::tifa_score(answers(4)) == 1.0, "tifa-all");
  check(scoring::tifa_score(answers(0)) == 0.0, "tifa-none");
  check(scoring::tifa_score(answers(3)) == 0.75, "tifa-3/4");
  check(error_text([] { scoring::tifa_score({}); }).find("unscorable") != std::string::npos, "tifa-empty");
  check(scoring::vqa_score(std::vector<double>{1.0, 1.0}) == 1.0, "vqa-certain");
  check(scoring::vqa_score(std::vector<double>{0.0}) == 0.0, "vqa-zero");
  check(std::abs(scoring::vqa_score(std::vector<double>{0.2, 0.4, 0.9}) - 0.5) < 1e-15, "vqa-mean");
  check(error_text([] { scoring::vqa_score({}); }).find("unscorable") != std::string::npos, "vqa-empty");
  check(error_text([] { scoring::vqa_score(std::vector<double>{1.5}); }).find("invalid probability") !=
            std::string::npos,
        "vqa-range");
  check(scoring::combined_score(0.5, 0.5) == 1.0, "combined-sum");
  check(scoring::combined_score(1.0, 1.0) == 2.0, "combined-max");
  check(scoring::format_fixed(scoring::combined_score(0.863, 0.829), 3) == "1.692", "combined-row");
  check(error_text([] { scoring::combined_score(-0.1, 0.5); }).find("invalid score") != std::string::npos,
        "combined-range");
  check(scoring::format_fixed(scoring::report_average(0.863, 0.829), 3) == "0.846", "avg-0.846");
  check(scoring::format_fixed(scoring::report_average(0.937, 0.930), 3) == "0.934", "avg-0.934");
  check(scoring::format_fixed(scoring::report_average(0.845, 0.850), 3) == "0.848", "avg-0.848");
  check(scoring::vqa_question_text({"a red bicycle", ""}) == "Does this figure show a red bicycle?",
        "template");
  check(scoring::vqa_question_text({"cat", ""}) == "Does this figure show cat?", "template-bare");
  check(!error_text([] { scoring::vqa_question_text({"", ""}); }).empty(), "template-empty");
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " examples" +
                           (failed.empty() ? "" : "; failed:" + failed)};
}

}  // namespace
}  // namespace fpa

int main() {
  using fpa::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"score table averages", fpa::table_averages},
      {"before/after deltas", fpa::table_deltas},
      {"pearson oracle", fpa::pearson_oracle},
      {"monotonicity", fpa::monotonicity},
      {"best-of-m gain", fpa::best_of_m},
      {"call accounting", fpa::complexity},
      {"icl golden file", fpa::icl_golden},
      {"determinism and resume", fpa::determinism_and_resume},
      {"warm cache", fpa::warm_cache},
      {"score math", fpa::score_math},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
