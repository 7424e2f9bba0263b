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

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpa/backends.hpp"
#include "fpa/cache.hpp"
#include "fpa/optimizer.hpp"
#include "fpa/synthetic.hpp"

// Whole-pipeline commands shared by the C API and the command-line tool.
// Options arrive as JSON objects whose keys mirror the CLI flags with
// underscores ("--min-gain" -> "min_gain").
namespace fpa {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;

struct CommandResult {
  int exit_code = kExitOk;
  std::string output;  // text meant for stdout
  nlohmann::json summary = nlohmann::json::object();
  std::string error;  // diagnostic for stderr when exit_code != 0
};

// Process-wide cooperative cancellation; optimize stops claiming prompts and
// flushes what has completed.
void request_cancel();
void reset_cancel();
bool cancel_requested();

struct Engine {
  BackendSet backends;
  std::shared_ptr<ResponseCache> cache;
  bool synthetic = false;
  std::optional<SyntheticWorldConfig> world;
};

SyntheticWorldConfig synthetic_config_from_json(const nlohmann::json& j,
                                                 SyntheticWorldConfig base = {});
nlohmann::json to_json(const SyntheticWorldConfig& c);

// Backend config file shape:
//   {"cache_dir": ..., "synthetic": {...}, "defaults": {...},
//    "backends": {"paraphraser": {...}, "image_gen": {...}, ...}}
// `options` may override cache_dir and synthetic world knobs and may force
// synthetic mode with "synthetic": true.
Engine build_engine(const nlohmann::json& options);

CommandResult cmd_optimize(const nlohmann::json& options);
CommandResult cmd_one_pass(const nlohmann::json& options);
CommandResult cmd_export(const nlohmann::json& options);
CommandResult cmd_report(const nlohmann::json& options);
CommandResult cmd_correlate(const nlohmann::json& options);

std::filesystem::path manifest_path_for(const std::filesystem::path& out);

}  // namespace fpa
