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

#include "fpa/cache.hpp"

#include <unistd.h>

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "fpa/error.hpp"
#include "fpa/hashing.hpp"
#include "fpa/json_io.hpp"
#include "fpa/log.hpp"

namespace fpa {
namespace {

using nlohmann::json;

// Looks `payload` up; on a miss (or an undecodable hit) calls `compute` and
// stores the encoded result.
template <typename T, typename Compute, typename Decode>
T through_cache(const ResponseCache& cache, BackendKind kind, const std::string& model_id,
                const json& payload, Compute&& compute, Decode&& decode) {
  const auto key = CacheKey::of(kind, model_id, payload);
  if (auto hit = cache.get(key)) {
    try {
      return decode(*hit);
    } catch (const std::exception& e) {
      log_warning("cache entry " + key.hex + " has an unexpected shape; evicting (" + e.what() +
                  ")");
      std::error_code ec;
      std::filesystem::remove(cache.path_for(key), ec);
    }
  }
  T value = compute();
  cache.put(key, json(value), payload);
  return value;
}

class CachedParaphraser final : public Paraphraser {
 public:
  CachedParaphraser(std::shared_ptr<Paraphraser> inner, std::shared_ptr<ResponseCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}
  std::string model_id() const override { return inner_->model_id(); }
  std::vector<std::string> paraphrase(std::string_view prompt, int m,
                                      std::uint64_t seed) override {
    const json payload = {{"op", "paraphrase"}, {"prompt", prompt}, {"m", m}, {"seed", seed}};
    return through_cache<std::vector<std::string>>(
        *cache_, BackendKind::kParaphraser, model_id(), payload,
        [&] { return inner_->paraphrase(prompt, m, seed); },
        [&](const json& j) {
          auto v = j.get<std::vector<std::string>>();
          if (static_cast<int>(v.size()) != m) throw Error(ErrorCode::kParse, "size mismatch");
          return v;
        });
  }

 private:
  std::shared_ptr<Paraphraser> inner_;
  std::shared_ptr<ResponseCache> cache_;
};

class CachedImageGenerator final : public ImageGenerator {
 public:
  CachedImageGenerator(std::shared_ptr<ImageGenerator> inner, std::shared_ptr<ResponseCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}
  std::string model_id() const override { return inner_->model_id(); }
  ImageRef generate_image(std::string_view prompt, std::uint64_t seed) override {
    const json payload = {{"op", "generate_image"}, {"prompt", prompt}, {"seed", seed}};
    return through_cache<ImageRef>(
        *cache_, BackendKind::kImageGen, model_id(), payload,
        [&] { return inner_->generate_image(prompt, seed); },
        [](const json& j) { return j.get<ImageRef>(); });
  }

 private:
  std::shared_ptr<ImageGenerator> inner_;
  std::shared_ptr<ResponseCache> cache_;
};

class CachedChunkExtractor final : public ChunkExtractor {
 public:
  CachedChunkExtractor(std::shared_ptr<ChunkExtractor> inner, std::shared_ptr<ResponseCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}
  std::string model_id() const override { return inner_->model_id(); }
  std::vector<NounChunk> extract_noun_chunks(const PromptRecord& prompt) override {
    const json payload = {{"op", "extract_noun_chunks"}, {"prompt", prompt.text}};
    auto chunks = through_cache<std::vector<NounChunk>>(
        *cache_, BackendKind::kChunkExtract, model_id(), payload,
        [&] { return inner_->extract_noun_chunks(prompt); },
        [](const json& j) {
          auto v = j.get<std::vector<NounChunk>>();
          if (v.empty()) throw Error(ErrorCode::kParse, "empty chunk list");
          return v;
        });
    // Keyed on text only, so stamp the caller's id.
    for (auto& c : chunks) c.source_prompt_id = prompt.id;
    return chunks;
  }

 private:
  std::shared_ptr<ChunkExtractor> inner_;
  std::shared_ptr<ResponseCache> cache_;
};

class CachedQuestionGenerator final : public QuestionGenerator {
 public:
  CachedQuestionGenerator(std::shared_ptr<QuestionGenerator> inner,
                          std::shared_ptr<ResponseCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}
  std::string model_id() const override { return inner_->model_id(); }
  std::vector<McQuestion> generate_questions(const PromptRecord& prompt, int q,
                                             std::uint64_t seed) override {
    const json payload = {
        {"op", "generate_questions"}, {"prompt", prompt.text}, {"q", q}, {"seed", seed}};
    return through_cache<std::vector<McQuestion>>(
        *cache_, BackendKind::kQuestionGen, model_id(), payload,
        [&] { return inner_->generate_questions(prompt, q, seed); },
        [](const json& j) {
          auto v = j.get<std::vector<McQuestion>>();
          for (const auto& q : v) {
            if (!question_defect(q).empty()) throw Error(ErrorCode::kParse, "bad question");
          }
          return v;
        });
  }

 private:
  std::shared_ptr<QuestionGenerator> inner_;
  std::shared_ptr<ResponseCache> cache_;
};

class CachedVqaAnswerer final : public VqaAnswerer {
 public:
  CachedVqaAnswerer(std::shared_ptr<VqaAnswerer> inner, std::shared_ptr<ResponseCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}
  std::string model_id() const override { return inner_->model_id(); }
  int answer_question(const ImageRef& image, const McQuestion& question) override {
    const json payload = {
        {"op", "answer_question"}, {"image", image.content_id}, {"question", question}};
    return through_cache<int>(
        *cache_, BackendKind::kVqaAnswer, model_id(), payload,
        [&] { return inner_->answer_question(image, question); },
        [&](const json& j) {
          const int v = j.get<int>();
          if (v < 0 || v >= static_cast<int>(question.options.size())) {
            throw Error(ErrorCode::kParse, "answer out of range");
          }
          return v;
        });
  }

 private:
  std::shared_ptr<VqaAnswerer> inner_;
  std::shared_ptr<ResponseCache> cache_;
};

class CachedYesProbability final : public YesProbabilityModel {
 public:
  CachedYesProbability(std::shared_ptr<YesProbabilityModel> inner,
                       std::shared_ptr<ResponseCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}
  std::string model_id() const override { return inner_->model_id(); }
  double yes_probability(const ImageRef& image, const NounChunk& chunk) override {
    const json payload = {
        {"op", "yes_probability"}, {"image", image.content_id}, {"chunk", chunk.text}};
    return through_cache<double>(
        *cache_, BackendKind::kYesProb, model_id(), payload,
        [&] { return inner_->yes_probability(image, chunk); },
        [](const json& j) {
          const double v = j.get<double>();
          if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::kParse, "probability out of range");
          return v;
        });
  }

 private:
  std::shared_ptr<YesProbabilityModel> inner_;
  std::shared_ptr<ResponseCache> cache_;
};

class CachedChatModel final : public ChatModel {
 public:
  CachedChatModel(std::shared_ptr<ChatModel> inner, std::shared_ptr<ResponseCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}
  std::string model_id() const override { return inner_->model_id(); }
  std::string complete(const std::vector<ChatMessage>& messages, std::uint64_t seed) override {
    json wire = json::array();
    for (const auto& m : messages) wire.push_back({{"role", m.role}, {"content", m.content}});
    const json payload = {{"op", "complete"}, {"messages", wire}, {"seed", seed}};
    return through_cache<std::string>(
        *cache_, BackendKind::kOnePassLlm, model_id(), payload,
        [&] { return inner_->complete(messages, seed); },
        [](const json& j) { return j.get<std::string>(); });
  }

 private:
  std::shared_ptr<ChatModel> inner_;
  std::shared_ptr<ResponseCache> cache_;
};

template <typename Wrapper, typename T>
std::shared_ptr<T> wrap(const std::shared_ptr<T>& inner,
                        const std::shared_ptr<ResponseCache>& cache) {
  if (!inner) return nullptr;
  return std::make_shared<Wrapper>(inner, cache);
}

std::string temp_suffix() {
  static std::atomic<std::uint64_t> counter{0};
  std::ostringstream s;
  s << ".tmp." << ::getpid() << "." << std::this_thread::get_id() << "." << counter++;
  return s.str();
}

}  // namespace

std::string canonical_json(const json& value) {
  // nlohmann::json objects are ordered maps, so dump() already sorts keys.
  return value.dump(-1, ' ', false, json::error_handler_t::strict);
}

CacheKey CacheKey::of(BackendKind kind, std::string_view model_id, const json& payload) {
  const json material = {
      {"kind", std::string(to_string(kind))}, {"model_id", model_id}, {"request", payload}};
  return {sha256_hex(canonical_json(material))};
}

ResponseCache::ResponseCache(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create cache directory " + root_.string());
}

std::filesystem::path ResponseCache::path_for(const CacheKey& key) const {
  if (key.hex.size() < 3) throw Error(ErrorCode::kInvalidArgument, "malformed cache key");
  return root_ / key.hex.substr(0, 2) / (key.hex + ".json");
}

std::optional<json> ResponseCache::get(const CacheKey& key) const {
  const auto path = path_for(key);
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::ostringstream text;
  text << in.rdbuf();
  in.close();
  try {
    json entry = json::parse(text.str());
    if (entry.at("key").get<std::string>() != key.hex || !entry.contains("value")) {
      throw Error(ErrorCode::kParse, "key mismatch");
    }
    return std::move(entry.at("value"));
  } catch (const std::exception& e) {
    log_warning("corrupt cache entry " + path.string() + " evicted: " + e.what());
    std::error_code ec;
    std::filesystem::remove(path, ec);
    return std::nullopt;
  }
}

void ResponseCache::put(const CacheKey& key, const json& value, const json& request) const {
  const auto path = path_for(key);
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  json entry = {{"key", key.hex}, {"value", value}};
  if (!request.is_null()) entry["request"] = request;
  const auto tmp = path.string() + temp_suffix();
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << entry.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::kIo, "cannot write cache entry " + tmp);
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot publish cache entry " + path.string());
  }
}

BackendSet with_response_cache(const BackendSet& in, std::shared_ptr<ResponseCache> cache) {
  if (!cache) return in;
  BackendSet out;
  out.paraphraser = wrap<CachedParaphraser>(in.paraphraser, cache);
  out.image_gen = wrap<CachedImageGenerator>(in.image_gen, cache);
  out.question_gen = wrap<CachedQuestionGenerator>(in.question_gen, cache);
  out.chunk_extract = wrap<CachedChunkExtractor>(in.chunk_extract, cache);
  out.vqa_answer = wrap<CachedVqaAnswerer>(in.vqa_answer, cache);
  out.yes_prob = wrap<CachedYesProbability>(in.yes_prob, cache);
  out.one_pass_llm = wrap<CachedChatModel>(in.one_pass_llm, cache);
  return out;
}

}  // namespace fpa
