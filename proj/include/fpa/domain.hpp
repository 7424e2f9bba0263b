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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fpa {

// A user prompt together with the dataset it was drawn from.
struct PromptRecord {
  std::string id;
  std::string text;
  std::string dataset;
  std::string created_at;  // UTC ISO-8601

  bool operator==(const PromptRecord&) const = default;
};

enum class Provenance { kOriginal, kParaphrase, kFinetunedOnePass, kIclOnePass };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

struct Candidate {
  int index = 0;
  std::string text;
  Provenance provenance = Provenance::kParaphrase;
  int iteration = 0;

  bool operator==(const Candidate&) const = default;
};

// Opaque handle to a generated image. Synthetic generators encode the image
// content in the locator; HTTP generators point at a file or URL.
struct ImageRef {
  std::string content_id;
  std::string locator;
  std::string generator_id;
  std::uint64_t generation_seed = 0;

  bool operator==(const ImageRef&) const = default;
};

struct NounChunk {
  std::string text;
  std::string source_prompt_id;

  bool operator==(const NounChunk&) const = default;
};

enum class QuestionCategory { kObject, kAttribute, kRelationship, kOther };

std::string_view to_string(QuestionCategory c);
QuestionCategory question_category_from_string(std::string_view s);

struct McQuestion {
  std::string id;
  std::string question;
  std::vector<std::string> options;
  int correct_index = 0;
  QuestionCategory category = QuestionCategory::kOther;

  bool operator==(const McQuestion&) const = default;
};

// Structural checks on a question: index in range, >= 2 pairwise distinct
// options. Returns an empty string when well-formed.
std::string question_defect(const McQuestion& q);

struct QuestionOutcome {
  std::string question_id;
  int chosen_index = 0;
  bool correct = false;

  bool operator==(const QuestionOutcome&) const = default;
};

struct ChunkOutcome {
  std::string chunk_text;
  double yes_probability = 0.0;

  bool operator==(const ChunkOutcome&) const = default;
};

// tifa/vqa are empty ("unscored") when their evidence list is empty; combined
// is present only when both are.
struct ScoreBundle {
  std::optional<double> tifa;
  std::optional<double> vqa;
  std::optional<double> combined;
  std::vector<QuestionOutcome> per_question;
  std::vector<ChunkOutcome> per_chunk;

  bool scored() const { return combined.has_value(); }

  bool operator==(const ScoreBundle&) const = default;
};

// One entry in an iteration's selection pool. A candidate that failed to
// score carries an error and no image.
struct ScoredCandidate {
  Candidate candidate;
  std::optional<ImageRef> image;
  ScoreBundle score;
  std::string error;

  bool failed() const { return !error.empty(); }

  bool operator==(const ScoredCandidate&) const = default;
};

struct IterationTrace {
  int iteration = 0;
  std::string seed_text;
  std::vector<ScoredCandidate> candidates;
  int selected_index = 0;

  bool operator==(const IterationTrace&) const = default;
};

enum class BackendKind {
  kParaphraser,
  kImageGen,
  kQuestionGen,
  kChunkExtract,
  kVqaAnswer,
  kYesProb,
  kOnePassLlm,
};

inline constexpr std::size_t kBackendKindCount = 7;
inline constexpr std::array<BackendKind, kBackendKindCount> kAllBackendKinds = {
    BackendKind::kParaphraser, BackendKind::kImageGen,  BackendKind::kQuestionGen,
    BackendKind::kChunkExtract, BackendKind::kVqaAnswer, BackendKind::kYesProb,
    BackendKind::kOnePassLlm};

std::string_view to_string(BackendKind k);
BackendKind backend_kind_from_string(std::string_view s);

struct BackendCallStats {
  std::uint64_t paraphraser_calls = 0;
  std::uint64_t image_gen_calls = 0;
  std::uint64_t question_gen_calls = 0;
  std::uint64_t chunk_extract_calls = 0;
  std::uint64_t vqa_answer_calls = 0;
  std::uint64_t yes_prob_calls = 0;
  std::uint64_t one_pass_llm_calls = 0;

  std::uint64_t& operator[](BackendKind k);
  std::uint64_t operator[](BackendKind k) const;

  BackendCallStats& operator+=(const BackendCallStats& o);
  friend BackendCallStats operator-(BackendCallStats a, const BackendCallStats& b);

  std::uint64_t total() const;
  // Image generation plus every question/probability call.
  std::uint64_t scoring_calls() const;

  bool operator==(const BackendCallStats&) const = default;
};

struct OptimizationRecord {
  PromptRecord prompt;
  ScoreBundle original_score;
  std::vector<IterationTrace> traces;
  std::string final_text;
  ScoreBundle final_score;
  BackendCallStats stats;
  std::uint64_t engine_seed = 0;
  std::string config_fingerprint;
  // When set, every iteration pooled the incumbent and final >= original holds.
  bool pool_incumbent = true;
  // Report label for the optimized side, e.g. "After 2 Iterations".
  std::string mode;

  bool operator==(const OptimizationRecord&) const = default;
};

struct ExamplePair {
  std::string original;
  std::string optimized;
  std::string source_record_id;
  double combined_gain = 0.0;

  bool operator==(const ExamplePair&) const = default;
};

ExamplePair example_pair_from(const OptimizationRecord& record);

enum class PromptCase { kOriginal, kOptimized };

std::string_view to_string(PromptCase c);
PromptCase prompt_case_from_string(std::string_view s);

struct HumanRating {
  std::string prompt_id;
  std::string annotator_id;
  int alignment = 0;  // 0..4
  int structure = 0;  // 0..4
  PromptCase prompt_case = PromptCase::kOriginal;

  bool operator==(const HumanRating&) const = default;
};

std::vector<std::string> validate_record(const OptimizationRecord& record);

std::string trim(std::string_view s);
std::string utc_now_iso8601();

}  // namespace fpa
