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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fpa/domain.hpp"

namespace fpa {

enum class PromptFormat { kPlainLines, kJsonl };

std::string_view to_string(PromptFormat f);
PromptFormat prompt_format_from_string(std::string_view s);
// Picks jsonl for *.jsonl / *.json paths, plain lines otherwise.
PromptFormat guess_prompt_format(const std::filesystem::path& path);

// One record per non-blank line. Missing ids come from the 0-based line
// index, missing datasets from `default_dataset`, missing timestamps from the
// load time. Blank texts are skipped with a warning.
std::vector<PromptRecord> load_prompts(const std::filesystem::path& path, PromptFormat format,
                                       std::string_view default_dataset = "");
void save_prompts(const std::filesystem::path& path, std::span<const PromptRecord> prompts,
                  PromptFormat format);

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct LoadedRecords {
  std::vector<OptimizationRecord> records;
  std::vector<LineError> errors;
};

std::string serialize_record(const OptimizationRecord& record);

// Validates, then appends one line under an exclusive lock on the file.
void save_record(const std::filesystem::path& path, const OptimizationRecord& record);
// A missing file yields an empty result; bad lines are reported, not fatal.
LoadedRecords load_records(const std::filesystem::path& path);

// Removes a trailing line that lacks its newline (left by a killed writer).
// Returns true when bytes were dropped.
bool truncate_partial_tail(const std::filesystem::path& path);

struct ExportOptions {
  double min_gain = 0.0;
  bool dedup = false;  // exact-text dedup on the original prompt
};

std::vector<ExamplePair> select_pairs(std::span<const OptimizationRecord> records,
                                      const ExportOptions& opts);
// {"prompt","completion"} lines.
std::string render_sft(std::span<const ExamplePair> pairs);
// {"original","optimized","gain","id"} lines.
std::string render_icl_pool(std::span<const ExamplePair> pairs);

// Write the rendering to `out`; returns the row count and warns on zero rows.
std::size_t export_sft(std::span<const OptimizationRecord> records, const ExportOptions& opts,
                       const std::filesystem::path& out);
std::size_t export_icl_pool(std::span<const OptimizationRecord> records,
                            const ExportOptions& opts, const std::filesystem::path& out);

// Reads either export shape.
std::vector<ExamplePair> load_example_pool(const std::filesystem::path& path);

// Uniform sample of n without replacement, in draw order.
std::vector<ExamplePair> sample_examples(std::span<const ExamplePair> pool, std::size_t n,
                                         std::uint64_t seed);

std::string read_file(const std::filesystem::path& path);
// Write via a sibling temp file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace fpa
