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

#include "fpa/optimizer.hpp"

#include <algorithm>
#include <future>

#include <json.hpp>

#include "fpa/hashing.hpp"
#include "fpa/scoring.hpp"

namespace fpa {
namespace {

constexpr std::uint64_t kTagQuestions = 0x51554553ULL;
constexpr std::uint64_t kTagParaphrase = 0x50415241ULL;
constexpr std::uint64_t kTagImage = 0x494d4147ULL;
constexpr std::uint64_t kTagOnePass = 0x4f4e4550ULL;

std::string describe(const Candidate& c) {
  return "candidate " + std::to_string(c.index) + " (iteration " + std::to_string(c.iteration) +
         ")";
}

}  // namespace

const std::string_view kIclSystemPrompt =
    "You are a prompt improver for a text-to-image generation model. You are improving prompts "
    "in a way that is specific to one such model, and you are expected to improve the prompts in "
    "a way that is specific to that model, such that the images are faithful to the original "
    "user prompt, and more aesthetically pleasing and complete than if they had been generated "
    "without any prompt improver.";

std::string_view to_string(ImageSeedPolicy p) {
  return p == ImageSeedPolicy::kFixed ? "fixed" : "per_candidate";
}

ImageSeedPolicy image_seed_policy_from_string(std::string_view s) {
  if (s == "fixed") return ImageSeedPolicy::kFixed;
  if (s == "per_candidate") return ImageSeedPolicy::kPerCandidate;
  throw Error(ErrorCode::kInvalidArgument, "unknown image seed policy '" + std::string(s) + "'");
}

std::string_view to_string(OnePassMode m) {
  return m == OnePassMode::kFinetuned ? "finetuned" : "icl";
}

OnePassMode one_pass_mode_from_string(std::string_view s) {
  if (s == "finetuned") return OnePassMode::kFinetuned;
  if (s == "icl") return OnePassMode::kIcl;
  throw Error(ErrorCode::kInvalidArgument, "unknown one-pass mode '" + std::string(s) + "'");
}

void OptimizeConfig::validate() const {
  if (m < 1 || k < 1 || q < 1) {
    throw Error(ErrorCode::kInvalidArgument, "m, k and q must all be >= 1");
  }
  if (parallelism < 1) throw Error(ErrorCode::kInvalidArgument, "parallelism must be >= 1");
}

std::string OptimizeConfig::mode_label() const {
  if (!mode.empty()) return mode;
  return "After " + std::to_string(k) + (k == 1 ? " Iteration" : " Iterations");
}

std::size_t select_best(std::span<const double> combined) {
  if (combined.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot select from an empty list");
  std::size_t best = 0;
  for (std::size_t i = 1; i < combined.size(); ++i) {
    if (combined[i] > combined[best]) best = i;
  }
  return best;
}

std::size_t select_best(std::span<const ScoredCandidate> pool) {
  if (pool.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot select from an empty pool");
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& c = pool[i];
    if (c.failed() || !c.score.combined) continue;
    if (!best || *c.score.combined > *pool[*best].score.combined) best = i;
  }
  if (!best) throw Error(ErrorCode::kUnscorable, "no candidate in the pool was scored");
  return *best;
}

std::vector<ChatMessage> assemble_icl_messages(std::string_view new_prompt,
                                               std::span<const ExamplePair> examples) {
  std::vector<ChatMessage> out;
  out.reserve(2 * examples.size() + 2);
  out.push_back({"system", std::string(kIclSystemPrompt)});
  for (const auto& ex : examples) {
    out.push_back({"user", std::string(kUserPromptPrefix) + ex.original});
    out.push_back({"assistant", std::string(kImprovedPromptPrefix) + ex.optimized});
  }
  out.push_back({"user", std::string(kUserPromptPrefix) + std::string(new_prompt)});
  return out;
}

std::string strip_improved_prefix(std::string_view reply) {
  std::string s = trim(reply);
  constexpr std::string_view marker = "Improved Prompt:";
  if (std::string_view(s).substr(0, marker.size()) == marker) s = trim(s.substr(marker.size()));
  return s;
}

Optimizer::Optimizer(BackendSet backends, std::shared_ptr<ResponseCache> cache)
    : backends_(std::move(backends)), cache_(std::move(cache)) {}

BackendSet Optimizer::view(StatsRecorder& stats) const {
  return with_response_cache(with_call_counting(backends_, stats), cache_);
}

std::string Optimizer::config_fingerprint(const OptimizeConfig& cfg) const {
  nlohmann::json j = {{"m", cfg.m},
                      {"k", cfg.k},
                      {"q", cfg.q},
                      {"pool_incumbent", cfg.pool_incumbent},
                      {"image_seed_policy", std::string(to_string(cfg.image_seed_policy))},
                      {"mode", cfg.mode_label()}};
  for (auto kind : kAllBackendKinds) {
    if (kind == BackendKind::kOnePassLlm) continue;
    j["backends"][std::string(to_string(kind))] = backends_.model_id(kind);
  }
  return sha256_hex(j.dump());
}

ScoringAssets Optimizer::prepare_assets(const PromptRecord& original, int q, std::uint64_t seed,
                                        StatsRecorder& stats) const {
  const BackendSet b = view(stats);
  ScoringAssets assets;
  assets.chunks = b.chunk_extract->extract_noun_chunks(original);
  assets.questions = b.question_gen->generate_questions(original, q, seed);
  if (assets.chunks.empty()) {
    throw Error(ErrorCode::kUnscorable, "no scorable content in prompt " + original.id);
  }
  if (assets.questions.empty()) {
    throw Error(ErrorCode::kUnscorable, "question generation returned nothing for " + original.id);
  }
  for (std::size_t i = 0; i < assets.questions.size(); ++i) {
    auto& q = assets.questions[i];
    if (q.id.empty()) q.id = "q" + std::to_string(i);
    if (auto defect = question_defect(q); !defect.empty()) {
      throw Error(ErrorCode::kBackend, "question " + q.id + " is malformed: " + defect);
    }
  }
  return assets;
}

ScoredCandidate Optimizer::score_candidate(const PromptRecord& original,
                                           const Candidate& candidate,
                                           const ScoringAssets& assets,
                                           std::uint64_t image_seed, StatsRecorder& stats) const {
  for (const auto& c : assets.chunks) {
    if (!c.source_prompt_id.empty() && c.source_prompt_id != original.id) {
      throw Error(ErrorCode::kInvalidArgument,
                  "noun chunk '" + c.text + "' was not derived from the original prompt");
    }
  }
  const BackendSet b = view(stats);
  ScoredCandidate out;
  out.candidate = candidate;
  try {
    out.image = b.image_gen->generate_image(candidate.text, image_seed);
    std::vector<QuestionOutcome> answers;
    answers.reserve(assets.questions.size());
    for (const auto& q : assets.questions) {
      const int chosen = b.vqa_answer->answer_question(*out.image, q);
      if (chosen < 0 || chosen >= static_cast<int>(q.options.size())) {
        throw Error(ErrorCode::kBackend, "unparseable answer for question " + q.id);
      }
      answers.push_back({q.id, chosen, chosen == q.correct_index});
    }
    std::vector<ChunkOutcome> chunks;
    chunks.reserve(assets.chunks.size());
    for (const auto& c : assets.chunks) {
      const double p = b.yes_prob->yes_probability(*out.image, c);
      if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorCode::kBackend, "invalid probability for chunk '" + c.text + "'");
      }
      chunks.push_back({c.text, p});
    }
    out.score = scoring::make_score_bundle(std::move(answers), std::move(chunks));
  } catch (const Error& e) {
    throw Error(e.code(), describe(candidate) + ": " + e.what());
  }
  return out;
}

OptimizationRecord Optimizer::optimize_iterative(const PromptRecord& prompt,
                                                 const OptimizeConfig& cfg) const {
  cfg.validate();
  backends_.require({BackendKind::kParaphraser, BackendKind::kImageGen, BackendKind::kQuestionGen,
                     BackendKind::kChunkExtract, BackendKind::kVqaAnswer, BackendKind::kYesProb});
  if (trim(prompt.text).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "prompt " + prompt.id + " has empty text");
  }

  StatsRecorder stats;
  const BackendSet b = view(stats);
  const std::uint64_t record_seed = derive_seed(cfg.engine_seed, {fnv1a64(prompt.id)});
  auto image_seed = [&](int iteration, int index) {
    if (cfg.image_seed_policy == ImageSeedPolicy::kFixed) {
      return derive_seed(record_seed, {kTagImage});
    }
    return derive_seed(record_seed, {kTagImage, static_cast<std::uint64_t>(iteration + 1),
                                     static_cast<std::uint64_t>(index)});
  };

  std::vector<IterationTrace> traces;
  auto abort = [&](const Error& e, const std::string& stage) -> OptimizationAborted {
    return OptimizationAborted(e.code(),
                               "prompt " + prompt.id + " aborted " + stage + " after " +
                                   std::to_string(traces.size()) + " complete iteration(s): " +
                                   e.what(),
                               traces);
  };

  ScoringAssets assets;
  ScoredCandidate incumbent;
  try {
    assets = prepare_assets(prompt, cfg.q, derive_seed(record_seed, {kTagQuestions}), stats);
    incumbent = score_candidate(prompt, {0, prompt.text, Provenance::kOriginal, 0}, assets,
                                image_seed(-1, 0), stats);
  } catch (const Error& e) {
    throw abort(e, "while scoring the original");
  }
  const ScoreBundle original_score = incumbent.score;

  for (int it = 0; it < cfg.k; ++it) {
    IterationTrace trace;
    trace.iteration = it;
    trace.seed_text = incumbent.candidate.text;

    std::vector<std::string> paraphrases;
    try {
      paraphrases = b.paraphraser->paraphrase(
          trace.seed_text, cfg.m,
          derive_seed(record_seed, {kTagParaphrase, static_cast<std::uint64_t>(it)}));
      if (static_cast<int>(paraphrases.size()) != cfg.m) {
        throw Error(ErrorCode::kBackend, "insufficient paraphrases: got " +
                                             std::to_string(paraphrases.size()) + " of " +
                                             std::to_string(cfg.m));
      }
    } catch (const Error& e) {
      throw abort(e, "in iteration " + std::to_string(it));
    }

    std::vector<ScoredCandidate> pool;
    if (cfg.pool_incumbent) {
      ScoredCandidate inc = incumbent;
      inc.candidate.index = 0;
      inc.candidate.iteration = it;
      pool.push_back(std::move(inc));
    }
    const std::size_t first_new = pool.size();
    for (const auto& text : paraphrases) {
      ScoredCandidate sc;
      sc.candidate = {static_cast<int>(pool.size()), text, Provenance::kParaphrase, it};
      pool.push_back(std::move(sc));
    }

    auto score_one = [&](std::size_t i) {
      auto& slot = pool[i];
      try {
        slot = score_candidate(prompt, slot.candidate, assets,
                               image_seed(it, slot.candidate.index), stats);
      } catch (const Error& e) {
        slot.error = e.what();
      }
    };
    const std::size_t width = static_cast<std::size_t>(cfg.parallelism);
    for (std::size_t start = first_new; start < pool.size(); start += width) {
      const std::size_t end = std::min(pool.size(), start + width);
      if (width == 1) {
        score_one(start);
        continue;
      }
      std::vector<std::future<void>> wave;
      for (std::size_t i = start; i < end; ++i) {
        wave.push_back(std::async(std::launch::async, score_one, i));
      }
      for (auto& f : wave) f.get();
    }

    try {
      trace.selected_index = static_cast<int>(select_best(pool));
    } catch (const Error& e) {
      trace.candidates = std::move(pool);
      traces.push_back(std::move(trace));
      throw abort(e, "in iteration " + std::to_string(it));
    }
    trace.candidates = std::move(pool);
    incumbent = trace.candidates[trace.selected_index];
    traces.push_back(std::move(trace));
  }

  OptimizationRecord record;
  record.prompt = prompt;
  record.original_score = original_score;
  record.final_text = incumbent.candidate.text;
  record.final_score = incumbent.score;
  record.traces = std::move(traces);
  record.stats = stats.snapshot();
  record.engine_seed = cfg.engine_seed;
  record.config_fingerprint = config_fingerprint(cfg);
  record.pool_incumbent = cfg.pool_incumbent;
  record.mode = cfg.mode_label();
  return record;
}

OnePassResult Optimizer::optimize_one_pass(const PromptRecord& prompt, OnePassMode mode,
                                           std::span<const ExamplePair> examples,
                                           std::uint64_t seed, StatsRecorder& stats) const {
  backends_.require({BackendKind::kOnePassLlm});
  if (trim(prompt.text).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "prompt " + prompt.id + " has empty text");
  }
  OnePassResult result;
  if (mode == OnePassMode::kIcl) {
    result.messages = assemble_icl_messages(prompt.text, examples);
    result.provenance = Provenance::kIclOnePass;
  } else {
    result.messages = {{"user", prompt.text}};
    result.provenance = Provenance::kFinetunedOnePass;
  }
  const BackendSet b = view(stats);
  const std::string reply = b.one_pass_llm->complete(
      result.messages, derive_seed(seed, {kTagOnePass, fnv1a64(prompt.id)}));
  result.optimized_text = strip_improved_prefix(reply);
  if (result.optimized_text.empty()) {
    throw Error(ErrorCode::kBackend, "empty completion for prompt " + prompt.id);
  }
  return result;
}

}  // namespace fpa
