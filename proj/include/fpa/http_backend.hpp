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

#include <atomic>
#include <chrono>
#include <functional>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpa/backends.hpp"

namespace fpa {

struct BackendConfig {
  BackendKind kind = BackendKind::kParaphraser;
  std::string endpoint;  // e.g. https://api.openai.com/v1
  std::string model_id;
  int timeout_ms = 60'000;
  int max_retries = 3;
  int rate_limit_per_min = 60;
  int parallelism = 4;
  // Name of the environment variable holding the bearer token. The value is
  // read at request time and never logged.
  std::string auth;
  double temperature = 0.7;
  // Optional directory for downloaded/decoded images.
  std::string image_dir;

  bool operator==(const BackendConfig&) const = default;
};

// Throws kInvalidArgument when a field invariant is broken.
void validate(const BackendConfig& cfg);
std::string default_auth_variable(BackendKind kind);

void to_json(nlohmann::json& j, const BackendConfig& v);
// Reads one backend entry; `kind` comes from the enclosing key.
BackendConfig backend_config_from_json(BackendKind kind, const nlohmann::json& j,
                                       const nlohmann::json& defaults = nlohmann::json::object());

class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::chrono::milliseconds now() = 0;
  virtual void sleep_for(std::chrono::milliseconds d) = 0;
};

class SystemClock final : public Clock {
 public:
  std::chrono::milliseconds now() override;
  void sleep_for(std::chrono::milliseconds d) override;
};

// Time only moves when someone sleeps.
class VirtualClock final : public Clock {
 public:
  std::chrono::milliseconds now() override;
  void sleep_for(std::chrono::milliseconds d) override;

 private:
  std::mutex mu_;
  std::chrono::milliseconds now_{0};
};

// Sliding-window limiter: at most `per_minute` grants in any 60 s window.
class RateLimiter {
 public:
  RateLimiter(int per_minute, Clock& clock);
  void acquire();

 private:
  int per_minute_;
  Clock& clock_;
  std::mutex mu_;
  std::deque<std::chrono::milliseconds> grants_;
};

struct HttpResponse {
  int status = 0;  // 0 means the request never completed
  std::string body;
  std::string error;
};

using HttpHeaders = std::multimap<std::string, std::string>;

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& url, const std::string& json_body,
                            const HttpHeaders& headers, int timeout_ms) = 0;
  virtual HttpResponse get(const std::string& url, const HttpHeaders& headers,
                           int timeout_ms) = 0;
};

// cpp-httplib transport; supports http:// and https:// URLs.
class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post(const std::string& url, const std::string& json_body,
                    const HttpHeaders& headers, int timeout_ms) override;
  HttpResponse get(const std::string& url, const HttpHeaders& headers, int timeout_ms) override;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds base{500};
  std::chrono::milliseconds cap{30'000};

  // Full jitter: uniform in [0, min(cap, base * 2^retry)].
  std::chrono::milliseconds backoff(int retry, std::uint64_t random_bits) const;
};

bool is_retryable_status(int status);

// Rate limiting, bounded in-flight requests and retries around a transport.
class RequestExecutor {
 public:
  RequestExecutor(BackendConfig cfg, std::shared_ptr<HttpTransport> transport,
                  std::shared_ptr<Clock> clock);

  // POSTs to endpoint + path; returns the parsed JSON body of the first 2xx
  // response. Throws kTransport after the retry budget is spent.
  nlohmann::json post_json(const std::string& path, const nlohmann::json& body);
  std::string get_bytes(const std::string& url);

  std::uint64_t attempts() const { return attempts_.load(); }
  const BackendConfig& config() const { return cfg_; }

 private:
  HttpResponse send(const std::function<HttpResponse()>& request, const std::string& what);
  HttpHeaders headers() const;

  BackendConfig cfg_;
  std::shared_ptr<HttpTransport> transport_;
  std::shared_ptr<Clock> clock_;
  RateLimiter limiter_;
  RetryPolicy retry_;
  std::counting_semaphore<1024> in_flight_;
  std::atomic<std::uint64_t> attempts_{0};
  std::atomic<std::uint64_t> jitter_counter_{0};
};

struct ChatReply {
  std::string content;
  // First generated token's top alternatives, when logprobs were returned.
  std::optional<std::vector<std::pair<std::string, double>>> first_token_logprobs;
};

// Service backend speaking the chat-completions / images JSON protocol. One
// instance serves one configured kind but implements every interface.
class HttpModelBackend final : public Paraphraser,
                               public ImageGenerator,
                               public ChunkExtractor,
                               public QuestionGenerator,
                               public VqaAnswerer,
                               public YesProbabilityModel,
                               public ChatModel {
 public:
  HttpModelBackend(BackendConfig cfg, std::shared_ptr<HttpTransport> transport = nullptr,
                   std::shared_ptr<Clock> clock = nullptr);

  std::string model_id() const override { return executor_.config().model_id; }

  std::vector<std::string> paraphrase(std::string_view prompt, int m,
                                      std::uint64_t seed) override;
  ImageRef generate_image(std::string_view prompt, std::uint64_t seed) override;
  std::vector<NounChunk> extract_noun_chunks(const PromptRecord& prompt) override;
  std::vector<McQuestion> generate_questions(const PromptRecord& prompt, int q,
                                             std::uint64_t seed) override;
  int answer_question(const ImageRef& image, const McQuestion& question) override;
  double yes_probability(const ImageRef& image, const NounChunk& chunk) override;
  std::string complete(const std::vector<ChatMessage>& messages, std::uint64_t seed) override;

  ChatReply chat(const nlohmann::json& messages, std::uint64_t seed, bool logprobs,
                 double temperature);
  const RequestExecutor& executor() const { return executor_; }

 private:
  nlohmann::json image_content(const ImageRef& image);

  RequestExecutor executor_;
};

// Helpers for parsing model replies; exposed for tests.
std::vector<std::string> parse_line_list(std::string_view reply);
std::optional<int> parse_choice(std::string_view reply, const McQuestion& question);
std::optional<double> parse_probability(std::string_view reply);
std::vector<McQuestion> parse_questions(std::string_view reply);
std::optional<double> yes_probability_from_logprobs(
    const std::vector<std::pair<std::string, double>>& top);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

}  // namespace fpa
