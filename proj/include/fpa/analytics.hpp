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

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fpa/domain.hpp"

namespace fpa {

inline constexpr const char* kOriginalModeLabel = "Original Prompts";

// One scored prompt under a (dataset, mode) tag.
struct ScoreSample {
  std::string dataset;
  std::string mode;
  double tifa = 0.0;
  double vqa = 0.0;
};

// Each record contributes its original score under "Original Prompts" and
// its final score under the record's mode label. Unscored sides are skipped.
std::vector<ScoreSample> samples_from_records(std::span<const OptimizationRecord> records);

struct TableRow {
  std::string dataset;
  std::string mode;
  // Half-up to 3 decimals.
  double mean_tifa = 0.0;
  double mean_vqa = 0.0;
  double mean_average = 0.0;
  std::size_t n = 0;
  // Unrounded means.
  double raw_tifa = 0.0;
  double raw_vqa = 0.0;
  double raw_average = 0.0;
};

// Rows sorted by (dataset, mode).
std::vector<TableRow> aggregate(std::span<const ScoreSample> samples);

// after - before, half-up to 4 decimals.
double delta(double before, double after);

// Sample Pearson r. Throws kInvalidArgument on length mismatch or fewer than
// two points, kUndefined ("undefined correlation") on a constant series.
double pearson(std::span<const double> x, std::span<const double> y);

struct AutoScores {
  double tifa = 0.0;
  double vqa = 0.0;
};

using ScoreTable = std::map<std::pair<std::string, PromptCase>, AutoScores>;

// original -> original_score, optimized -> final_score, keyed by prompt id.
ScoreTable score_table_from_records(std::span<const OptimizationRecord> records);

struct CorrelationMatrix {
  std::string scope;  // "pooled", "original" or "optimized"
  std::size_t n = 0;  // (prompt, case) points after annotator averaging
  double alignment_tifa = 0.0;
  double alignment_vqa = 0.0;
  double structure_tifa = 0.0;
  double structure_vqa = 0.0;
};

// Ratings are averaged across annotators per (prompt, case) and paired with
// the automatic scores. pooled=false yields one matrix per case. Unmatched
// prompt ids throw kValidation listing them.
std::vector<CorrelationMatrix> correlate_human(std::span<const HumanRating> ratings,
                                               const ScoreTable& scores, bool pooled = true);

struct ModeCost {
  std::string mode;
  bool one_pass = false;
  std::size_t records = 0;
  BackendCallStats stats;
  // Iterative shape; required for the image-count check.
  std::optional<int> k;
  std::optional<int> m;
};

struct CostReport {
  std::vector<ModeCost> modes;
  std::vector<std::string> notes;
  std::vector<std::string> violations;  // broken accounting identities

  bool consistent() const { return violations.empty(); }
};

CostReport cost_report(std::span<const ModeCost> modes);
// Groups records by mode, inferring k and m from their traces.
std::vector<ModeCost> mode_costs_from_records(std::span<const OptimizationRecord> records);

std::string format_table(std::span<const TableRow> rows);
nlohmann::json table_to_json(std::span<const TableRow> rows);
std::string format_correlations(std::span<const CorrelationMatrix> matrices);
nlohmann::json correlations_to_json(std::span<const CorrelationMatrix> matrices);
std::string format_cost_report(const CostReport& report);
nlohmann::json cost_report_to_json(const CostReport& report);

}  // namespace fpa
