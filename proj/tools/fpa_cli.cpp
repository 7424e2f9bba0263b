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

// Command-line front end over the C API.

#include <csignal>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpa/fpa.h"

namespace {

using nlohmann::json;

extern "C" void on_interrupt(int) { fpa_request_cancel(); }

int run(int (*cmd)(const char*, char**), const json& options) {
  char* raw = nullptr;
  const int code = cmd(options.dump().c_str(), &raw);
  if (!raw) {
    std::fprintf(stderr, "fpa: %s\n", fpa_last_error());
    return code;
  }
  const json result = json::parse(raw);
  fpa_free(raw);
  const auto output = result.value("output", std::string());
  const auto error = result.value("error", std::string());
  if (!output.empty()) std::fputs(output.c_str(), stdout);
  if (!error.empty()) std::fprintf(stderr, "fpa: %s\n", error.c_str());
  return code;
}

struct WorldFlags {
  std::optional<std::uint64_t> seed;
  std::optional<double> noise_scale;
  std::optional<int> latent_details;
  std::optional<double> perturbation_rate;
  std::optional<int> latency_ms;

  void add_to(CLI::App* app) {
    app->add_option("--world-seed", seed, "Synthetic world seed");
    app->add_option("--noise-scale", noise_scale, "Synthetic image token drop rate");
    app->add_option("--latent-details", latent_details, "Synthetic latent detail tokens");
    app->add_option("--perturbation-rate", perturbation_rate, "Synthetic paraphrase edit rate");
    app->add_option("--latency-ms", latency_ms, "Synthetic per-call latency");
  }

  json to_json() const {
    json w = json::object();
    if (seed) w["seed"] = *seed;
    if (noise_scale) w["noise_scale"] = *noise_scale;
    if (latent_details) w["latent_details"] = *latent_details;
    if (perturbation_rate) w["perturbation_rate"] = *perturbation_rate;
    if (latency_ms) w["latency_ms"] = *latency_ms;
    return w;
  }
};

void put_if(json& j, const char* key, const std::string& v) {
  if (!v.empty()) j[key] = v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prompt alignment optimizer"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fpa_version()));

  // optimize
  struct {
    std::string prompts, out, backend_config, cache_dir, format, dataset, image_seed_policy = "fixed",
                                                                          mode_label;
    int m = 4, k = 2, q = 4, parallelism = 1, candidate_parallelism = 1;
    std::uint64_t seed = 0;
    bool synthetic = false, no_pool = false;
    WorldFlags world;
  } opt;
  auto* optimize = app.add_subcommand("optimize", "Iteratively optimize every prompt in a file");
  optimize->add_option("--prompts", opt.prompts, "Prompt file (.txt or .jsonl)")->required();
  optimize->add_option("--out", opt.out, "Records JSONL output")->required();
  optimize->add_option("--m", opt.m, "Paraphrases per iteration")->capture_default_str();
  optimize->add_option("--k", opt.k, "Iterations")->capture_default_str();
  optimize->add_option("--q", opt.q, "Questions per prompt")->capture_default_str();
  optimize->add_option("--seed", opt.seed, "Engine seed")->capture_default_str();
  optimize->add_option("--backend-config", opt.backend_config, "Backend config JSON");
  optimize->add_option("--parallelism", opt.parallelism, "Prompt workers")->capture_default_str();
  optimize->add_option("--candidate-parallelism", opt.candidate_parallelism,
                       "Concurrent candidate scoring per prompt")
      ->capture_default_str();
  optimize->add_flag("--synthetic", opt.synthetic, "Use the offline synthetic backends");
  optimize->add_option("--cache-dir", opt.cache_dir, "Response cache directory");
  optimize->add_option("--format", opt.format, "plain_lines or jsonl (default: by extension)");
  optimize->add_option("--dataset", opt.dataset, "Dataset tag for prompts without one");
  optimize->add_flag("--no-pool-incumbent", opt.no_pool, "Select among paraphrases only");
  optimize->add_option("--image-seed-policy", opt.image_seed_policy, "fixed or per_candidate")
      ->capture_default_str();
  optimize->add_option("--mode-label", opt.mode_label, "Report label for the optimized side");
  opt.world.add_to(optimize);

  // one-pass
  struct {
    std::string prompts, out, mode = "icl", examples, backend_config, cache_dir, messages_out,
                                    dataset, format;
    int n = 0;
    std::uint64_t seed = 0;
    bool synthetic = false;
    WorldFlags world;
  } one;
  auto* one_pass = app.add_subcommand("one-pass", "Optimize each prompt with a single LLM call");
  one_pass->add_option("--prompts", one.prompts, "Prompt file")->required();
  one_pass->add_option("--out", one.out, "Output JSONL")->required();
  one_pass->add_option("--mode", one.mode, "finetuned or icl")->capture_default_str();
  one_pass->add_option("--examples", one.examples, "Example pool JSONL");
  one_pass->add_option("--n", one.n, "Examples per prompt")->capture_default_str();
  one_pass->add_option("--seed", one.seed, "Sampling seed")->capture_default_str();
  one_pass->add_option("--backend-config", one.backend_config, "Backend config JSON");
  one_pass->add_flag("--synthetic", one.synthetic, "Use the offline echo model");
  one_pass->add_option("--cache-dir", one.cache_dir, "Response cache directory");
  one_pass->add_option("--messages-out", one.messages_out, "Write the assembled messages here");
  one_pass->add_option("--dataset", one.dataset, "Dataset tag for prompts without one");
  one_pass->add_option("--format", one.format, "plain_lines or jsonl");
  one.world.add_to(one_pass);

  // export
  struct {
    std::vector<std::string> records;
    std::string format = "sft", out;
    double min_gain = 0.0;
    bool dedup = false;
  } exp;
  auto* export_cmd = app.add_subcommand("export", "Export training pairs or an example pool");
  export_cmd->add_option("--records", exp.records, "Records JSONL")->required();
  export_cmd->add_option("--format", exp.format, "sft or icl-pool")->capture_default_str();
  export_cmd->add_option("--min-gain", exp.min_gain, "Minimum combined gain")->capture_default_str();
  export_cmd->add_option("--out", exp.out, "Output JSONL")->required();
  export_cmd->add_flag("--dedup", exp.dedup, "Drop repeated original prompts");

  // report
  struct {
    std::vector<std::string> records;
    std::string group_by = "dataset,mode";
    bool as_json = false, cost = false;
  } rep;
  auto* report = app.add_subcommand("report", "Score table grouped by dataset and mode");
  report->add_option("--records", rep.records, "Records JSONL")->required();
  report->add_option("--group-by", rep.group_by, "Grouping keys")->capture_default_str();
  report->add_flag("--json", rep.as_json, "Emit JSON");
  report->add_flag("--cost", rep.cost, "Append the call-cost report");

  // correlate
  struct {
    std::string ratings, pooling = "pooled";
    std::vector<std::string> records;
    bool as_json = false;
  } cor;
  auto* correlate = app.add_subcommand("correlate", "Correlate human ratings with scores");
  correlate->add_option("--ratings", cor.ratings, "Ratings JSONL")->required();
  correlate->add_option("--records", cor.records, "Records JSONL")->required();
  correlate->add_option("--pooling", cor.pooling, "pooled or per-case")->capture_default_str();
  correlate->add_flag("--json", cor.as_json, "Emit JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::signal(SIGINT, on_interrupt);
  std::signal(SIGTERM, on_interrupt);

  if (*optimize) {
    json o = {{"prompts", opt.prompts}, {"out", opt.out},           {"m", opt.m},
              {"k", opt.k},             {"q", opt.q},               {"seed", opt.seed},
              {"parallelism", opt.parallelism},
              {"candidate_parallelism", opt.candidate_parallelism}, {"synthetic", opt.synthetic},
              {"pool_incumbent", !opt.no_pool}, {"image_seed_policy", opt.image_seed_policy},
              {"world", opt.world.to_json()}};
    put_if(o, "backend_config", opt.backend_config);
    put_if(o, "cache_dir", opt.cache_dir);
    put_if(o, "format", opt.format);
    put_if(o, "dataset", opt.dataset);
    put_if(o, "mode", opt.mode_label);
    return run(&fpa_cmd_optimize, o);
  }
  if (*one_pass) {
    json o = {{"prompts", one.prompts}, {"out", one.out},   {"mode", one.mode},
              {"n", one.n},             {"seed", one.seed}, {"synthetic", one.synthetic},
              {"world", one.world.to_json()}};
    put_if(o, "examples", one.examples);
    put_if(o, "backend_config", one.backend_config);
    put_if(o, "cache_dir", one.cache_dir);
    put_if(o, "messages_out", one.messages_out);
    put_if(o, "dataset", one.dataset);
    put_if(o, "format", one.format);
    return run(&fpa_cmd_one_pass, o);
  }
  if (*export_cmd) {
    return run(&fpa_cmd_export, {{"records", exp.records},
                                 {"format", exp.format},
                                 {"min_gain", exp.min_gain},
                                 {"out", exp.out},
                                 {"dedup", exp.dedup}});
  }
  if (*report) {
    return run(&fpa_cmd_report, {{"records", rep.records},
                                 {"group_by", rep.group_by},
                                 {"json", rep.as_json},
                                 {"cost", rep.cost}});
  }
  if (*correlate) {
    return run(&fpa_cmd_correlate, {{"ratings", cor.ratings},
                                    {"records", cor.records},
                                    {"pooling", cor.pooling},
                                    {"json", cor.as_json}});
  }
  return 1;
}
