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

#include "fpa/commands.hpp"

#include <atomic>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "fpa/analytics.hpp"
#include "fpa/datastore.hpp"
#include "fpa/error.hpp"
#include "fpa/hashing.hpp"
#include "fpa/http_backend.hpp"
#include "fpa/json_io.hpp"
#include "fpa/log.hpp"

namespace fpa {
namespace {

using nlohmann::json;

std::atomic<bool> g_cancel{false};

template <typename T>
T opt(const json& o, const char* key, T fallback) {
  if (!o.contains(key) || o.at(key).is_null()) return fallback;
  try {
    return o.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kInvalidArgument, std::string("option '") + key + "' has the wrong type");
  }
}

std::string need_path(const json& o, const char* key) {
  auto v = opt<std::string>(o, key, "");
  if (v.empty()) throw Error(ErrorCode::kInvalidArgument, std::string("missing --") + key);
  return v;
}

std::vector<std::string> path_list(const json& o, const char* key) {
  if (!o.contains(key)) return {};
  if (o.at(key).is_string()) return {o.at(key).get<std::string>()};
  return opt<std::vector<std::string>>(o, key, {});
}

json load_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

json backend_ids(const BackendSet& b) {
  json out = json::object();
  for (auto kind : kAllBackendKinds) {
    const auto id = b.model_id(kind);
    if (!id.empty()) out[std::string(to_string(kind))] = id;
  }
  return out;
}

// Runs `body`, mapping exceptions onto the fatal exit code.
template <typename Body>
CommandResult guarded(Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    CommandResult r;
    r.exit_code = kExitFatal;
    r.error = e.what();
    r.summary = {{"error", e.what()}, {"code", static_cast<int>(e.code())}};
    return r;
  } catch (const std::exception& e) {
    CommandResult r;
    r.exit_code = kExitFatal;
    r.error = e.what();
    r.summary = {{"error", e.what()}, {"code", static_cast<int>(ErrorCode::kInternal)}};
    return r;
  }
}

std::vector<OptimizationRecord> load_records_strict(const std::vector<std::string>& paths) {
  std::vector<OptimizationRecord> out;
  for (const auto& p : paths) {
    if (!std::filesystem::exists(p)) throw Error(ErrorCode::kNotFound, "records file not found: " + p);
    auto loaded = load_records(p);
    if (!loaded.errors.empty()) {
      const auto& e = loaded.errors.front();
      throw Error(ErrorCode::kParse, p + ":" + std::to_string(e.line) + ": " + e.message);
    }
    for (auto& r : loaded.records) out.push_back(std::move(r));
  }
  return out;
}

OptimizeConfig optimize_config_from(const json& o) {
  OptimizeConfig c;
  c.m = opt(o, "m", c.m);
  c.k = opt(o, "k", c.k);
  c.q = opt(o, "q", c.q);
  c.pool_incumbent = opt(o, "pool_incumbent", c.pool_incumbent);
  c.engine_seed = opt<std::uint64_t>(o, "seed", c.engine_seed);
  c.image_seed_policy =
      image_seed_policy_from_string(opt<std::string>(o, "image_seed_policy", "fixed"));
  c.mode = opt<std::string>(o, "mode", "");
  c.parallelism = opt(o, "candidate_parallelism", 1);
  c.validate();
  return c;
}

json config_json(const OptimizeConfig& c) {
  return {{"m", c.m},
          {"k", c.k},
          {"q", c.q},
          {"pool_incumbent", c.pool_incumbent},
          {"candidate_parallelism", c.parallelism},
          {"image_seed_policy", std::string(to_string(c.image_seed_policy))},
          {"mode", c.mode_label()}};
}

struct Outcome {
  std::optional<OptimizationRecord> record;
  std::string error;
  std::size_t partial_iterations = 0;
};

}  // namespace

void request_cancel() { g_cancel.store(true); }
void reset_cancel() { g_cancel.store(false); }
bool cancel_requested() { return g_cancel.load(); }

std::filesystem::path manifest_path_for(const std::filesystem::path& out) {
  return out.string() + ".manifest.json";
}

SyntheticWorldConfig synthetic_config_from_json(const json& j, SyntheticWorldConfig base) {
  if (!j.is_object()) return base;
  base.seed = opt<std::uint64_t>(j, "seed", base.seed);
  base.noise_scale = opt(j, "noise_scale", base.noise_scale);
  base.latent_details = opt(j, "latent_details", base.latent_details);
  base.perturbation_rate = opt(j, "perturbation_rate", base.perturbation_rate);
  base.latency_ms = opt(j, "latency_ms", base.latency_ms);
  if (base.noise_scale < 0.0 || base.noise_scale >= 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "noise_scale must lie in [0,1)");
  }
  if (base.latent_details < 0 || base.latency_ms < 0 || base.perturbation_rate < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic world knobs must be non-negative");
  }
  return base;
}

json to_json(const SyntheticWorldConfig& c) {
  return {{"seed", c.seed},
          {"noise_scale", c.noise_scale},
          {"latent_details", c.latent_details},
          {"perturbation_rate", c.perturbation_rate},
          {"latency_ms", c.latency_ms}};
}

Engine build_engine(const json& options) {
  json file = json::object();
  if (const auto path = opt<std::string>(options, "backend_config", ""); !path.empty()) {
    if (!std::filesystem::exists(path)) {
      throw Error(ErrorCode::kNotFound, "backend config not found: " + path);
    }
    file = load_json_file(path);
    if (!file.is_object()) throw Error(ErrorCode::kParse, path + ": expected a JSON object");
  }

  Engine engine;
  const std::string cache_dir =
      opt<std::string>(options, "cache_dir", opt<std::string>(file, "cache_dir", ""));
  if (!cache_dir.empty()) engine.cache = std::make_shared<ResponseCache>(cache_dir);

  const bool forced = opt(options, "synthetic", false);
  const bool has_backends = file.contains("backends") && !file.at("backends").empty();
  if (forced || !has_backends) {
    if (!forced && !file.contains("synthetic")) {
      throw Error(ErrorCode::kInvalidArgument,
                  "no backends configured: pass --backend-config or --synthetic");
    }
    auto cfg = synthetic_config_from_json(file.value("synthetic", json::object()));
    cfg = synthetic_config_from_json(options.value("world", json::object()), cfg);
    auto world = std::make_shared<SyntheticWorld>(cfg);
    engine.synthetic = true;
    engine.world = cfg;
    engine.backends = {world, world, world, world, world, world, world};
    return engine;
  }

  const json defaults = file.value("defaults", json::object());
  for (const auto& [name, entry] : file.at("backends").items()) {
    const BackendKind kind = backend_kind_from_string(name);
    auto backend =
        std::make_shared<HttpModelBackend>(backend_config_from_json(kind, entry, defaults));
    switch (kind) {
      case BackendKind::kParaphraser: engine.backends.paraphraser = backend; break;
      case BackendKind::kImageGen: engine.backends.image_gen = backend; break;
      case BackendKind::kQuestionGen: engine.backends.question_gen = backend; break;
      case BackendKind::kChunkExtract: engine.backends.chunk_extract = backend; break;
      case BackendKind::kVqaAnswer: engine.backends.vqa_answer = backend; break;
      case BackendKind::kYesProb: engine.backends.yes_prob = backend; break;
      case BackendKind::kOnePassLlm: engine.backends.one_pass_llm = backend; break;
    }
  }
  return engine;
}

CommandResult cmd_optimize(const json& options) {
  const std::string started = utc_now_iso8601();
  std::optional<std::filesystem::path> manifest;
  json manifest_body = {{"command", "optimize"}, {"started_at", started}};

  CommandResult result = guarded([&]() -> CommandResult {
    const std::filesystem::path out = need_path(options, "out");
    manifest = manifest_path_for(out);
    const std::filesystem::path prompts_path = need_path(options, "prompts");
    const OptimizeConfig cfg = optimize_config_from(options);
    const int workers = opt(options, "parallelism", 1);
    if (workers < 1) throw Error(ErrorCode::kInvalidArgument, "parallelism must be >= 1");
    manifest_body["config"] = config_json(cfg);
    manifest_body["config"]["parallelism"] = workers;
    manifest_body["engine_seed"] = cfg.engine_seed;
    manifest_body["prompts"] = prompts_path.string();
    manifest_body["out"] = out.string();

    const auto format = options.contains("format")
                            ? prompt_format_from_string(options.at("format").get<std::string>())
                            : guess_prompt_format(prompts_path);
    const auto prompts = load_prompts(prompts_path, format,
                                      opt<std::string>(options, "dataset", prompts_path.stem().string()));

    const Engine engine = build_engine(options);
    const Optimizer optimizer(engine.backends, engine.cache);
    manifest_body["backends"] = backend_ids(engine.backends);
    manifest_body["config_fingerprint"] = optimizer.config_fingerprint(cfg);
    if (engine.world) manifest_body["synthetic"] = to_json(*engine.world);

    // Resume: drop a torn tail line, then skip ids already on disk.
    truncate_partial_tail(out);
    const auto existing = load_records(out);
    for (const auto& e : existing.errors) {
      log_warning(out.string() + ":" + std::to_string(e.line) + ": unreadable record (" +
                  e.message + ")");
    }
    std::set<std::string> done_ids;
    for (const auto& r : existing.records) done_ids.insert(r.prompt.id);
    std::vector<const PromptRecord*> todo;
    for (const auto& p : prompts) {
      if (!done_ids.count(p.id)) todo.push_back(&p);
    }

    std::mutex mu;
    std::size_t next = 0;
    std::size_t flushed = 0;
    std::vector<std::optional<Outcome>> outcomes(todo.size());
    std::size_t written = 0;
    json failures = json::array();
    BackendCallStats totals;
    std::optional<Error> write_error;

    auto flush_ready = [&] {
      while (flushed < outcomes.size() && outcomes[flushed]) {
        auto& o = *outcomes[flushed];
        if (o.record) {
          if (!write_error) {
            try {
              save_record(out, *o.record);
              ++written;
              totals += o.record->stats;
            } catch (const Error& e) {
              write_error = e;
            }
          }
        } else {
          log_warning("prompt " + todo[flushed]->id + " aborted: " + o.error);
          failures.push_back({{"id", todo[flushed]->id},
                              {"error", o.error},
                              {"completed_iterations", o.partial_iterations}});
        }
        o.record.reset();
        ++flushed;
      }
    };

    auto worker = [&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard lock(mu);
          if (next >= todo.size() || cancel_requested() || write_error) return;
          i = next++;
        }
        Outcome o;
        try {
          o.record = optimizer.optimize_iterative(*todo[i], cfg);
        } catch (const OptimizationAborted& e) {
          o.error = e.what();
          o.partial_iterations = e.partial_traces().size();
        } catch (const std::exception& e) {
          o.error = e.what();
        }
        std::lock_guard lock(mu);
        outcomes[i] = std::move(o);
        flush_ready();
      }
    };

    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(workers), std::max<std::size_t>(todo.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (write_error) throw *write_error;

    const bool interrupted = flushed < todo.size();
    CommandResult r;
    r.exit_code = (failures.empty() && !interrupted) ? kExitOk : kExitPartial;
    r.summary = {{"prompts", prompts.size()},
                 {"skipped_existing", prompts.size() - todo.size()},
                 {"written", written},
                 {"failed", failures.size()},
                 {"interrupted", interrupted},
                 {"stats", totals}};
    manifest_body["failures"] = failures;
    r.output = "optimize: " + std::to_string(written) + " record(s) written, " +
               std::to_string(prompts.size() - todo.size()) + " already present, " +
               std::to_string(failures.size()) + " failed" +
               (interrupted ? ", interrupted" : "") + "\n";
    if (r.exit_code != kExitOk) {
      r.error = interrupted ? "run interrupted before all prompts were processed"
                            : std::to_string(failures.size()) + " prompt(s) aborted";
    }
    return r;
  });

  if (manifest) {
    manifest_body["finished_at"] = utc_now_iso8601();
    manifest_body["exit_status"] = result.exit_code;
    manifest_body["summary"] = result.summary;
    try {
      write_file_atomic(*manifest, manifest_body.dump(2) + "\n");
    } catch (const Error& e) {
      log_warning(std::string("cannot write manifest: ") + e.what());
    }
  }
  return result;
}

CommandResult cmd_one_pass(const json& options) {
  const std::string started = utc_now_iso8601();
  std::optional<std::filesystem::path> manifest;
  json manifest_body = {{"command", "one-pass"}, {"started_at", started}};

  CommandResult result = guarded([&]() -> CommandResult {
    const std::filesystem::path out = need_path(options, "out");
    manifest = manifest_path_for(out);
    const std::filesystem::path prompts_path = need_path(options, "prompts");
    const OnePassMode mode = one_pass_mode_from_string(opt<std::string>(options, "mode", "icl"));
    const int n = opt(options, "n", 0);
    const auto seed = opt<std::uint64_t>(options, "seed", 0);
    if (n < 0) throw Error(ErrorCode::kInvalidArgument, "--n must be >= 0");
    manifest_body["config"] = {{"mode", std::string(to_string(mode))}, {"n", n}};
    manifest_body["engine_seed"] = seed;

    const auto format = options.contains("format")
                            ? prompt_format_from_string(options.at("format").get<std::string>())
                            : guess_prompt_format(prompts_path);
    const auto prompts = load_prompts(prompts_path, format,
                                      opt<std::string>(options, "dataset", prompts_path.stem().string()));

    // One example sample per run, shared by every prompt.
    std::vector<ExamplePair> examples;
    if (mode == OnePassMode::kIcl && n > 0) {
      const auto pool_path = opt<std::string>(options, "examples", "");
      if (pool_path.empty()) throw Error(ErrorCode::kInvalidArgument, "--mode icl with --n > 0 needs --examples");
      const auto pool = load_example_pool(pool_path);
      examples = sample_examples(pool, static_cast<std::size_t>(n), derive_seed(seed, "icl-sample"));
    }

    const Engine engine = build_engine(options);
    const Optimizer optimizer(engine.backends, engine.cache);
    manifest_body["backends"] = {
        {"one_pass_llm", engine.backends.model_id(BackendKind::kOnePassLlm)}};
    if (engine.world) manifest_body["synthetic"] = to_json(*engine.world);

    StatsRecorder stats;
    std::string body;
    std::string messages_body;
    for (const auto& p : prompts) {
      const auto res = optimizer.optimize_one_pass(p, mode, examples, seed, stats);
      body += json{{"id", p.id}, {"original", p.text}, {"optimized", res.optimized_text}}.dump() + "\n";
      json msgs = json::array();
      for (const auto& m : res.messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
      messages_body += json{{"id", p.id}, {"messages", msgs}}.dump() + "\n";
    }
    write_file_atomic(out, body);
    if (const auto mo = opt<std::string>(options, "messages_out", ""); !mo.empty()) {
      write_file_atomic(mo, messages_body);
    }

    CommandResult r;
    r.summary = {{"prompts", prompts.size()},
                 {"examples", examples.size()},
                 {"messages_per_prompt", mode == OnePassMode::kIcl ? 2 * examples.size() + 2 : 1},
                 {"stats", stats.snapshot()}};
    r.output = "one-pass: " + std::to_string(prompts.size()) + " prompt(s) optimized\n";
    return r;
  });

  if (manifest) {
    manifest_body["finished_at"] = utc_now_iso8601();
    manifest_body["exit_status"] = result.exit_code;
    manifest_body["summary"] = result.summary;
    try {
      write_file_atomic(*manifest, manifest_body.dump(2) + "\n");
    } catch (const Error& e) {
      log_warning(std::string("cannot write manifest: ") + e.what());
    }
  }
  return result;
}

CommandResult cmd_export(const json& options) {
  return guarded([&]() -> CommandResult {
    if (!options.contains("records")) throw Error(ErrorCode::kInvalidArgument, "missing --records");
    const auto records = load_records_strict(path_list(options, "records"));
    const std::filesystem::path out = need_path(options, "out");
    ExportOptions eo;
    eo.min_gain = opt(options, "min_gain", 0.0);
    eo.dedup = opt(options, "dedup", false);
    const auto format = opt<std::string>(options, "format", "sft");
    std::size_t rows;
    if (format == "sft") {
      rows = export_sft(records, eo, out);
    } else if (format == "icl-pool") {
      rows = export_icl_pool(records, eo, out);
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown export format '" + format + "'");
    }
    CommandResult r;
    r.summary = {{"rows", rows}, {"records", records.size()}, {"format", format}};
    r.output = std::to_string(rows) + " row(s) exported to " + out.string() + "\n";
    return r;
  });
}

CommandResult cmd_report(const json& options) {
  return guarded([&]() -> CommandResult {
    const auto paths = path_list(options, "records");
    if (paths.empty()) throw Error(ErrorCode::kInvalidArgument, "missing --records");
    const auto group_by = opt<std::string>(options, "group_by", "dataset,mode");
    if (group_by != "dataset,mode") {
      throw Error(ErrorCode::kInvalidArgument, "only --group-by dataset,mode is supported");
    }
    const auto records = load_records_strict(paths);
    const auto samples = samples_from_records(records);
    const auto rows = aggregate(samples);
    const auto costs = cost_report(mode_costs_from_records(records));

    CommandResult r;
    r.summary = {{"table", table_to_json(rows)}, {"cost", cost_report_to_json(costs)}};
    if (opt(options, "json", false)) {
      r.output = r.summary.dump(2) + "\n";
    } else {
      r.output = format_table(rows);
      if (opt(options, "cost", false)) r.output += "\n" + format_cost_report(costs);
    }
    return r;
  });
}

CommandResult cmd_correlate(const json& options) {
  return guarded([&]() -> CommandResult {
    const std::filesystem::path ratings_path = need_path(options, "ratings");
    const auto records = load_records_strict(path_list(options, "records"));
    std::vector<HumanRating> ratings;
    {
      const auto text = read_file(ratings_path);
      std::size_t line_no = 0, start = 0;
      while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        ++line_no;
        const std::string line = text.substr(start, end - start);
        start = end + 1;
        if (trim(line).empty()) continue;
        try {
          ratings.push_back(json::parse(line).get<HumanRating>());
        } catch (const std::exception& e) {
          throw Error(ErrorCode::kParse,
                      ratings_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
      }
    }
    const bool pooled = opt<std::string>(options, "pooling", "pooled") != "per-case";
    const auto matrices = correlate_human(ratings, score_table_from_records(records), pooled);
    CommandResult r;
    r.summary = {{"correlations", correlations_to_json(matrices)}};
    r.output = opt(options, "json", false) ? r.summary.dump(2) + "\n" : format_correlations(matrices);
    return r;
  });
}

}  // namespace fpa
