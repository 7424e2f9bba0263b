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

#include "fpa/fpa.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include <json.hpp>

#include "fpa/analytics.hpp"
#include "fpa/commands.hpp"
#include "fpa/error.hpp"
#include "fpa/json_io.hpp"
#include "fpa/optimizer.hpp"
#include "fpa/scoring.hpp"

using nlohmann::json;

struct fpa_engine {
  fpa::Engine engine;
  std::unique_ptr<fpa::Optimizer> optimizer;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

json parse_arg(const char* text, const char* what) {
  if (!text || !*text) return json::object();
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw fpa::Error(fpa::ErrorCode::kParse, std::string(what) + ": " + e.what());
  }
}

template <typename Body>
fpa_status call(Body&& body) {
  g_last_error.clear();
  try {
    body();
    return FPA_OK;
  } catch (const fpa::Error& e) {
    g_last_error = e.what();
    return static_cast<fpa_status>(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FPA_ERR_INTERNAL;
  }
}

int run_command(fpa::CommandResult (*cmd)(const json&), const char* options_json,
                char** summary_json) {
  g_last_error.clear();
  fpa::CommandResult r;
  try {
    r = cmd(parse_arg(options_json, "options"));
  } catch (const std::exception& e) {
    r.exit_code = fpa::kExitFatal;
    r.error = e.what();
  }
  if (!r.error.empty()) g_last_error = r.error;
  if (summary_json) {
    *summary_json = dup_string(json{{"exit_code", r.exit_code},
                                    {"output", r.output},
                                    {"error", r.error},
                                    {"summary", r.summary}}
                                   .dump());
  }
  return r.exit_code;
}

}  // namespace

extern "C" {

const char* fpa_version(void) { return "1.0.0"; }

const char* fpa_last_error(void) { return g_last_error.c_str(); }

void fpa_free(char* p) { std::free(p); }

fpa_status fpa_engine_create(const char* options_json, fpa_engine** out) {
  return call([&] {
    if (!out) throw fpa::Error(fpa::ErrorCode::kInvalidArgument, "out is null");
    *out = nullptr;
    auto handle = std::make_unique<fpa_engine>();
    handle->engine = fpa::build_engine(parse_arg(options_json, "options"));
    handle->optimizer =
        std::make_unique<fpa::Optimizer>(handle->engine.backends, handle->engine.cache);
    *out = handle.release();
  });
}

void fpa_engine_destroy(fpa_engine* engine) { delete engine; }

fpa_status fpa_engine_optimize(fpa_engine* engine, const char* prompt_json,
                               const char* config_json, char** record_json) {
  return call([&] {
    if (!engine || !record_json) {
      throw fpa::Error(fpa::ErrorCode::kInvalidArgument, "null engine or output");
    }
    *record_json = nullptr;
    const auto prompt = parse_arg(prompt_json, "prompt").get<fpa::PromptRecord>();
    const json c = parse_arg(config_json, "config");
    fpa::OptimizeConfig cfg;
    cfg.m = c.value("m", cfg.m);
    cfg.k = c.value("k", cfg.k);
    cfg.q = c.value("q", cfg.q);
    cfg.engine_seed = c.value("seed", cfg.engine_seed);
    cfg.pool_incumbent = c.value("pool_incumbent", cfg.pool_incumbent);
    cfg.parallelism = c.value("candidate_parallelism", cfg.parallelism);
    cfg.image_seed_policy =
        fpa::image_seed_policy_from_string(c.value("image_seed_policy", std::string("fixed")));
    cfg.mode = c.value("mode", std::string());
    const auto record = engine->optimizer->optimize_iterative(prompt, cfg);
    *record_json = dup_string(json(record).dump());
  });
}

fpa_status fpa_engine_one_pass(fpa_engine* engine, const char* prompt_json, const char* mode,
                               const char* examples_json, uint64_t seed, char** result_json) {
  return call([&] {
    if (!engine || !result_json || !mode) {
      throw fpa::Error(fpa::ErrorCode::kInvalidArgument, "null engine, mode or output");
    }
    *result_json = nullptr;
    const auto prompt = parse_arg(prompt_json, "prompt").get<fpa::PromptRecord>();
    std::vector<fpa::ExamplePair> examples;
    if (examples_json && *examples_json) {
      examples = parse_arg(examples_json, "examples").get<std::vector<fpa::ExamplePair>>();
    }
    fpa::StatsRecorder stats;
    const auto res = engine->optimizer->optimize_one_pass(
        prompt, fpa::one_pass_mode_from_string(mode), examples, seed, stats);
    json msgs = json::array();
    for (const auto& m : res.messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    *result_json = dup_string(
        json{{"optimized", res.optimized_text}, {"messages", msgs}, {"stats", stats.snapshot()}}
            .dump());
  });
}

int fpa_cmd_optimize(const char* o, char** s) { return run_command(&fpa::cmd_optimize, o, s); }
int fpa_cmd_one_pass(const char* o, char** s) { return run_command(&fpa::cmd_one_pass, o, s); }
int fpa_cmd_export(const char* o, char** s) { return run_command(&fpa::cmd_export, o, s); }
int fpa_cmd_report(const char* o, char** s) { return run_command(&fpa::cmd_report, o, s); }
int fpa_cmd_correlate(const char* o, char** s) { return run_command(&fpa::cmd_correlate, o, s); }

void fpa_request_cancel(void) { fpa::request_cancel(); }
void fpa_reset_cancel(void) { fpa::reset_cancel(); }

fpa_status fpa_report_average(double tifa, double vqa, double* out) {
  return call([&] {
    if (!out) throw fpa::Error(fpa::ErrorCode::kInvalidArgument, "out is null");
    *out = fpa::scoring::report_average(tifa, vqa);
  });
}

fpa_status fpa_pearson(const double* x, const double* y, size_t n, double* out) {
  return call([&] {
    if (!x || !y || !out) throw fpa::Error(fpa::ErrorCode::kInvalidArgument, "null argument");
    *out = fpa::pearson({x, n}, {y, n});
  });
}

fpa_status fpa_validate_record_json(const char* record_json, char** problems_json) {
  return call([&] {
    if (!problems_json) throw fpa::Error(fpa::ErrorCode::kInvalidArgument, "out is null");
    *problems_json = nullptr;
    const auto record = parse_arg(record_json, "record").get<fpa::OptimizationRecord>();
    *problems_json = dup_string(json(fpa::validate_record(record)).dump());
  });
}

fpa_status fpa_assemble_icl_messages(const char* new_prompt, const char* examples_json,
                                     char** messages_json) {
  return call([&] {
    if (!new_prompt || !messages_json) {
      throw fpa::Error(fpa::ErrorCode::kInvalidArgument, "null argument");
    }
    *messages_json = nullptr;
    std::vector<fpa::ExamplePair> examples;
    if (examples_json && *examples_json) {
      examples = parse_arg(examples_json, "examples").get<std::vector<fpa::ExamplePair>>();
    }
    json msgs = json::array();
    for (const auto& m : fpa::assemble_icl_messages(new_prompt, examples)) {
      msgs.push_back({{"role", m.role}, {"content", m.content}});
    }
    *messages_json = dup_string(msgs.dump());
  });
}

}  // extern "C"
