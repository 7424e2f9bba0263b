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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fpa/backends.hpp"
#include "fpa/cache.hpp"
#include "fpa/domain.hpp"
#include "fpa/error.hpp"

namespace fpa {

enum class ImageSeedPolicy { kFixed, kPerCandidate };

std::string_view to_string(ImageSeedPolicy p);
ImageSeedPolicy image_seed_policy_from_string(std::string_view s);

struct OptimizeConfig {
  int m = 4;  // paraphrases per iteration
  int k = 2;  // iterations
  int q = 4;  // TIFA questions per prompt
  bool pool_incumbent = true;
  int parallelism = 1;
  std::uint64_t engine_seed = 0;
  ImageSeedPolicy image_seed_policy = ImageSeedPolicy::kFixed;
  // Report label for the optimized side; empty means "After {k} Iterations".
  std::string mode;

  void validate() const;
  std::string mode_label() const;
};

// Chunks and questions derived once from the original prompt.
struct ScoringAssets {
  std::vector<NounChunk> chunks;
  std::vector<McQuestion> questions;
};

// Thrown when a record cannot be completed; carries the traces finished so far.
class OptimizationAborted : public Error {
 public:
  OptimizationAborted(ErrorCode code, const std::string& message,
                      std::vector<IterationTrace> partial)
      : Error(code, message), partial_(std::move(partial)) {}

  const std::vector<IterationTrace>& partial_traces() const { return partial_; }

 private:
  std::vector<IterationTrace> partial_;
};

// Index of the highest combined score, lowest index on ties. Comparison is
// on unrounded values. Throws kInvalidArgument on an empty list.
std::size_t select_best(std::span<const double> combined);
// Same over a pool; failed or unscored entries are skipped. Throws
// kUnscorable when nothing in the pool scored.
std::size_t select_best(std::span<const ScoredCandidate> pool);

// The introductory instruction used for one-pass in-context optimisation.
extern const std::string_view kIclSystemPrompt;
inline constexpr std::string_view kUserPromptPrefix = "User Prompt: ";
inline constexpr std::string_view kImprovedPromptPrefix = "Improved Prompt: ";

// [system] ++ per example [user "User Prompt: o", assistant "Improved Prompt: p"]
// ++ [user "User Prompt: new"]; 2 * examples + 2 messages.
std::vector<ChatMessage> assemble_icl_messages(std::string_view new_prompt,
                                               std::span<const ExamplePair> examples);

// Removes one leading "Improved Prompt:" marker and surrounding whitespace.
std::string strip_improved_prefix(std::string_view reply);

enum class OnePassMode { kFinetuned, kIcl };

std::string_view to_string(OnePassMode m);
OnePassMode one_pass_mode_from_string(std::string_view s);

struct OnePassResult {
  std::string optimized_text;
  std::vector<ChatMessage> messages;
  Provenance provenance = Provenance::kIclOnePass;
};

class Optimizer {
 public:
  // `cache` may be null. Stats count only calls that reach `backends`.
  explicit Optimizer(BackendSet backends, std::shared_ptr<ResponseCache> cache = nullptr);

  ScoringAssets prepare_assets(const PromptRecord& original, int q, std::uint64_t seed,
                               StatsRecorder& stats) const;

  // One image from the candidate text, scored against the original's assets.
  // Backend failures are rethrown annotated with index and iteration.
  ScoredCandidate score_candidate(const PromptRecord& original, const Candidate& candidate,
                                  const ScoringAssets& assets, std::uint64_t image_seed,
                                  StatsRecorder& stats) const;

  OptimizationRecord optimize_iterative(const PromptRecord& prompt,
                                        const OptimizeConfig& cfg) const;

  // Exactly one completion call; never touches the scoring services.
  OnePassResult optimize_one_pass(const PromptRecord& prompt, OnePassMode mode,
                                  std::span<const ExamplePair> examples, std::uint64_t seed,
                                  StatsRecorder& stats) const;

  std::string config_fingerprint(const OptimizeConfig& cfg) const;
  const BackendSet& backends() const { return backends_; }

 private:
  BackendSet view(StatsRecorder& stats) const;

  BackendSet backends_;
  std::shared_ptr<ResponseCache> cache_;
};

}  // namespace fpa
