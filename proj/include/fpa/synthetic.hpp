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
#include <string>
#include <string_view>
#include <vector>

#include "fpa/backends.hpp"

namespace fpa {

struct SyntheticWorldConfig {
  std::uint64_t seed = 0;
  // Probability that a content token is lost when rendering an image, [0,1).
  double noise_scale = 0.0;
  // Seed-derived detail tokens added to each prompt's reference set.
  int latent_details = 3;
  // Paraphrase edit intensity; 0 returns the input verbatim.
  double perturbation_rate = 0.5;
  // Simulated per-call latency.
  int latency_ms = 0;
};

// Offline stand-in for every service kind. Alignment is a computable token
// overlap: R(prompt) is the prompt's content tokens plus latent detail
// tokens, an image is the prompt's content tokens minus noise, questions and
// chunks are answered by token presence. Every method is a pure function of
// its arguments and the config.
class SyntheticWorld final : public Paraphraser,
                             public ImageGenerator,
                             public ChunkExtractor,
                             public QuestionGenerator,
                             public VqaAnswerer,
                             public YesProbabilityModel,
                             public ChatModel {
 public:
  explicit SyntheticWorld(SyntheticWorldConfig cfg);

  const SyntheticWorldConfig& config() const { return cfg_; }

  std::string model_id() const override;

  std::vector<std::string> paraphrase(std::string_view prompt, int m,
                                      std::uint64_t seed) override;
  ImageRef generate_image(std::string_view prompt, std::uint64_t seed) override;
  std::vector<NounChunk> extract_noun_chunks(const PromptRecord& prompt) override;
  std::vector<McQuestion> generate_questions(const PromptRecord& prompt, int q,
                                             std::uint64_t seed) override;
  int answer_question(const ImageRef& image, const McQuestion& question) override;
  double yes_probability(const ImageRef& image, const NounChunk& chunk) override;
  // Echo model: rewrites the last user message deterministically and honours
  // the "User Prompt:" / "Improved Prompt:" framing.
  std::string complete(const std::vector<ChatMessage>& messages, std::uint64_t seed) override;

  // Reference set R(prompt), sorted and unique.
  std::vector<std::string> reference_tokens(std::string_view prompt) const;
  std::vector<std::string> latent_detail_tokens(std::string_view prompt) const;

  // The deterministic rewrite applied by complete().
  std::string echo_transform(std::string_view text, std::uint64_t seed) const;

  // Lowercased alphanumeric tokens with function words removed; sorted, unique.
  static std::vector<std::string> content_tokens(std::string_view text);
  // Tokens carried by a synthetic image; throws kInvalidArgument for foreign refs.
  static std::vector<std::string> image_tokens(const ImageRef& image);
  // Maximal runs of words between function words/punctuation that contain a
  // content word; determiners are kept inside runs.
  static std::vector<std::string> noun_chunk_texts(std::string_view text);
  static const std::vector<std::string>& detail_vocabulary();

 private:
  void simulate_latency() const;

  SyntheticWorldConfig cfg_;
};

}  // namespace fpa
