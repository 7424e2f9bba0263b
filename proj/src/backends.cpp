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

#include "fpa/backends.hpp"

#include "fpa/error.hpp"

namespace fpa {
namespace {

class CountingParaphraser final : public Paraphraser {
 public:
  CountingParaphraser(std::shared_ptr<Paraphraser> inner, StatsRecorder& stats)
      : inner_(std::move(inner)), stats_(stats) {}
  std::string model_id() const override { return inner_->model_id(); }
  std::vector<std::string> paraphrase(std::string_view prompt, int m,
                                      std::uint64_t seed) override {
    stats_.add(BackendKind::kParaphraser);
    return inner_->paraphrase(prompt, m, seed);
  }

 private:
  std::shared_ptr<Paraphraser> inner_;
  StatsRecorder& stats_;
};

class CountingImageGenerator final : public ImageGenerator {
 public:
  CountingImageGenerator(std::shared_ptr<ImageGenerator> inner, StatsRecorder& stats)
      : inner_(std::move(inner)), stats_(stats) {}
  std::string model_id() const override { return inner_->model_id(); }
  ImageRef generate_image(std::string_view prompt, std::uint64_t seed) override {
    stats_.add(BackendKind::kImageGen);
    return inner_->generate_image(prompt, seed);
  }

 private:
  std::shared_ptr<ImageGenerator> inner_;
  StatsRecorder& stats_;
};

class CountingChunkExtractor final : public ChunkExtractor {
 public:
  CountingChunkExtractor(std::shared_ptr<ChunkExtractor> inner, StatsRecorder& stats)
      : inner_(std::move(inner)), stats_(stats) {}
  std::string model_id() const override { return inner_->model_id(); }
  std::vector<NounChunk> extract_noun_chunks(const PromptRecord& prompt) override {
    stats_.add(BackendKind::kChunkExtract);
    return inner_->extract_noun_chunks(prompt);
  }

 private:
  std::shared_ptr<ChunkExtractor> inner_;
  StatsRecorder& stats_;
};

class CountingQuestionGenerator final : public QuestionGenerator {
 public:
  CountingQuestionGenerator(std::shared_ptr<QuestionGenerator> inner, StatsRecorder& stats)
      : inner_(std::move(inner)), stats_(stats) {}
  std::string model_id() const override { return inner_->model_id(); }
  std::vector<McQuestion> generate_questions(const PromptRecord& prompt, int q,
                                             std::uint64_t seed) override {
    stats_.add(BackendKind::kQuestionGen);
    return inner_->generate_questions(prompt, q, seed);
  }

 private:
  std::shared_ptr<QuestionGenerator> inner_;
  StatsRecorder& stats_;
};

class CountingVqaAnswerer final : public VqaAnswerer {
 public:
  CountingVqaAnswerer(std::shared_ptr<VqaAnswerer> inner, StatsRecorder& stats)
      : inner_(std::move(inner)), stats_(stats) {}
  std::string model_id() const override { return inner_->model_id(); }
  int answer_question(const ImageRef& image, const McQuestion& question) override {
    stats_.add(BackendKind::kVqaAnswer);
    return inner_->answer_question(image, question);
  }

 private:
  std::shared_ptr<VqaAnswerer> inner_;
  StatsRecorder& stats_;
};

class CountingYesProbability final : public YesProbabilityModel {
 public:
  CountingYesProbability(std::shared_ptr<YesProbabilityModel> inner, StatsRecorder& stats)
      : inner_(std::move(inner)), stats_(stats) {}
  std::string model_id() const override { return inner_->model_id(); }
  double yes_probability(const ImageRef& image, const NounChunk& chunk) override {
    stats_.add(BackendKind::kYesProb);
    return inner_->yes_probability(image, chunk);
  }

 private:
  std::shared_ptr<YesProbabilityModel> inner_;
  StatsRecorder& stats_;
};

class CountingChatModel final : public ChatModel {
 public:
  CountingChatModel(std::shared_ptr<ChatModel> inner, StatsRecorder& stats)
      : inner_(std::move(inner)), stats_(stats) {}
  std::string model_id() const override { return inner_->model_id(); }
  std::string complete(const std::vector<ChatMessage>& messages, std::uint64_t seed) override {
    stats_.add(BackendKind::kOnePassLlm);
    return inner_->complete(messages, seed);
  }

 private:
  std::shared_ptr<ChatModel> inner_;
  StatsRecorder& stats_;
};

template <typename Wrapper, typename T>
std::shared_ptr<T> wrap(const std::shared_ptr<T>& inner, StatsRecorder& stats) {
  if (!inner) return nullptr;
  return std::make_shared<Wrapper>(inner, stats);
}

}  // namespace

void check_messages(const std::vector<ChatMessage>& messages) {
  if (messages.empty()) throw Error(ErrorCode::kInvalidArgument, "message list is empty");
  for (const auto& m : messages) {
    if (m.role != "system" && m.role != "user" && m.role != "assistant") {
      throw Error(ErrorCode::kInvalidArgument, "unknown message role '" + m.role + "'");
    }
  }
}

void BackendSet::require(std::initializer_list<BackendKind> needed) const {
  for (auto k : needed) {
    const bool present = [&]() -> bool {
      switch (k) {
        case BackendKind::kParaphraser: return paraphraser != nullptr;
        case BackendKind::kImageGen: return image_gen != nullptr;
        case BackendKind::kQuestionGen: return question_gen != nullptr;
        case BackendKind::kChunkExtract: return chunk_extract != nullptr;
        case BackendKind::kVqaAnswer: return vqa_answer != nullptr;
        case BackendKind::kYesProb: return yes_prob != nullptr;
        case BackendKind::kOnePassLlm: return one_pass_llm != nullptr;
      }
      return false;
    }();
    if (!present) {
      throw Error(ErrorCode::kInvalidArgument,
                  "backend not configured: " + std::string(to_string(k)));
    }
  }
}

std::string BackendSet::model_id(BackendKind kind) const {
  switch (kind) {
    case BackendKind::kParaphraser: return paraphraser ? paraphraser->model_id() : "";
    case BackendKind::kImageGen: return image_gen ? image_gen->model_id() : "";
    case BackendKind::kQuestionGen: return question_gen ? question_gen->model_id() : "";
    case BackendKind::kChunkExtract: return chunk_extract ? chunk_extract->model_id() : "";
    case BackendKind::kVqaAnswer: return vqa_answer ? vqa_answer->model_id() : "";
    case BackendKind::kYesProb: return yes_prob ? yes_prob->model_id() : "";
    case BackendKind::kOnePassLlm: return one_pass_llm ? one_pass_llm->model_id() : "";
  }
  return "";
}

BackendCallStats StatsRecorder::snapshot() const {
  BackendCallStats s;
  for (auto k : kAllBackendKinds) {
    s[k] = counters_[static_cast<std::size_t>(k)].load(std::memory_order_relaxed);
  }
  return s;
}

BackendSet with_call_counting(const BackendSet& in, StatsRecorder& stats) {
  BackendSet out;
  out.paraphraser = wrap<CountingParaphraser>(in.paraphraser, stats);
  out.image_gen = wrap<CountingImageGenerator>(in.image_gen, stats);
  out.question_gen = wrap<CountingQuestionGenerator>(in.question_gen, stats);
  out.chunk_extract = wrap<CountingChunkExtractor>(in.chunk_extract, stats);
  out.vqa_answer = wrap<CountingVqaAnswerer>(in.vqa_answer, stats);
  out.yes_prob = wrap<CountingYesProbability>(in.yes_prob, stats);
  out.one_pass_llm = wrap<CountingChatModel>(in.one_pass_llm, stats);
  return out;
}

}  // namespace fpa
