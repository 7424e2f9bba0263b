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
#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "fpa/domain.hpp"

namespace fpa {

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

// Throws kInvalidArgument unless `messages` is non-empty with known roles.
void check_messages(const std::vector<ChatMessage>& messages);

// One interface per service kind. A backend object may implement several;
// every implementation must be safe to call from concurrent threads.

class Paraphraser {
 public:
  virtual ~Paraphraser() = default;
  virtual std::string model_id() const = 0;
  // Exactly m non-empty paraphrases of `prompt`.
  virtual std::vector<std::string> paraphrase(std::string_view prompt, int m,
                                              std::uint64_t seed) = 0;
};

class ImageGenerator {
 public:
  virtual ~ImageGenerator() = default;
  virtual std::string model_id() const = 0;
  virtual ImageRef generate_image(std::string_view prompt, std::uint64_t seed) = 0;
};

class ChunkExtractor {
 public:
  virtual ~ChunkExtractor() = default;
  virtual std::string model_id() const = 0;
  // At least one chunk; throws kUnscorable ("no scorable content") otherwise.
  virtual std::vector<NounChunk> extract_noun_chunks(const PromptRecord& prompt) = 0;
};

class QuestionGenerator {
 public:
  virtual ~QuestionGenerator() = default;
  virtual std::string model_id() const = 0;
  // Up to q well-formed questions.
  virtual std::vector<McQuestion> generate_questions(const PromptRecord& prompt, int q,
                                                     std::uint64_t seed) = 0;
};

class VqaAnswerer {
 public:
  virtual ~VqaAnswerer() = default;
  virtual std::string model_id() const = 0;
  virtual int answer_question(const ImageRef& image, const McQuestion& question) = 0;
};

class YesProbabilityModel {
 public:
  virtual ~YesProbabilityModel() = default;
  virtual std::string model_id() const = 0;
  virtual double yes_probability(const ImageRef& image, const NounChunk& chunk) = 0;
};

class ChatModel {
 public:
  virtual ~ChatModel() = default;
  virtual std::string model_id() const = 0;
  virtual std::string complete(const std::vector<ChatMessage>& messages, std::uint64_t seed) = 0;
};

// The full set of services an engine can drive. Members may be null when a
// mode does not need them (one-pass needs only `one_pass_llm`).
struct BackendSet {
  std::shared_ptr<Paraphraser> paraphraser;
  std::shared_ptr<ImageGenerator> image_gen;
  std::shared_ptr<QuestionGenerator> question_gen;
  std::shared_ptr<ChunkExtractor> chunk_extract;
  std::shared_ptr<VqaAnswerer> vqa_answer;
  std::shared_ptr<YesProbabilityModel> yes_prob;
  std::shared_ptr<ChatModel> one_pass_llm;

  // Throws kInvalidArgument naming the first missing kind in `needed`.
  void require(std::initializer_list<BackendKind> needed) const;
  std::string model_id(BackendKind kind) const;
};

// Thread-safe call counters.
class StatsRecorder {
 public:
  void add(BackendKind kind, std::uint64_t n = 1) {
    counters_[static_cast<std::size_t>(kind)].fetch_add(n, std::memory_order_relaxed);
  }
  BackendCallStats snapshot() const;

 private:
  std::array<std::atomic<std::uint64_t>, kBackendKindCount> counters_{};
};

// Wraps every member so each call that reaches the underlying service bumps
// `stats` once. The recorder must outlive the returned set.
BackendSet with_call_counting(const BackendSet& inner, StatsRecorder& stats);

}  // namespace fpa
