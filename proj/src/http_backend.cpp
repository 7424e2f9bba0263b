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

#include "fpa/http_backend.hpp"

#include <httplib.h>
#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "fpa/error.hpp"
#include "fpa/hashing.hpp"
#include "fpa/scoring.hpp"

namespace fpa {
namespace {

using nlohmann::json;

constexpr auto kWindow = std::chrono::milliseconds(60'000);
constexpr int kParseAttempts = 2;

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint is not an absolute URL: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string join_url(const std::string& endpoint, const std::string& path) {
  std::string base = endpoint;
  while (!base.empty() && base.back() == '/') base.pop_back();
  return base + path;
}

std::string snippet(const std::string& body) {
  return body.size() > 200 ? body.substr(0, 200) + "..." : body;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string kind_tag(const BackendConfig& cfg) {
  return "[" + std::string(to_string(cfg.kind)) + "] ";
}

HttpResponse to_response(const httplib::Result& res) {
  HttpResponse out;
  if (!res) {
    out.error = httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  return out;
}

std::unique_ptr<httplib::Client> make_client(const std::string& origin, int timeout_ms) {
  auto cli = std::make_unique<httplib::Client>(origin);
  const auto secs = timeout_ms / 1000;
  const auto usecs = (timeout_ms % 1000) * 1000;
  cli->set_connection_timeout(secs, usecs);
  cli->set_read_timeout(secs, usecs);
  cli->set_write_timeout(secs, usecs);
  return cli;
}

httplib::Headers to_httplib(const HttpHeaders& h) { return {h.begin(), h.end()}; }

}  // namespace

void validate(const BackendConfig& cfg) {
  if (cfg.timeout_ms <= 0) throw Error(ErrorCode::kInvalidArgument, "timeout_ms must be > 0");
  if (cfg.max_retries < 0) throw Error(ErrorCode::kInvalidArgument, "max_retries must be >= 0");
  if (cfg.rate_limit_per_min <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "rate_limit_per_min must be > 0");
  }
  if (cfg.parallelism < 1 || cfg.parallelism > 1024) {
    throw Error(ErrorCode::kInvalidArgument, "parallelism must lie in [1,1024]");
  }
  if (cfg.endpoint.empty()) throw Error(ErrorCode::kInvalidArgument, "endpoint is empty");
}

std::string default_auth_variable(BackendKind kind) {
  std::string name = "FPA_API_KEY_";
  for (char c : to_string(kind)) {
    name.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return name;
}

void to_json(json& j, const BackendConfig& v) {
  j = json{{"kind", std::string(to_string(v.kind))},
           {"endpoint", v.endpoint},
           {"model_id", v.model_id},
           {"timeout_ms", v.timeout_ms},
           {"max_retries", v.max_retries},
           {"rate_limit_per_min", v.rate_limit_per_min},
           {"parallelism", v.parallelism},
           {"auth", v.auth},
           {"temperature", v.temperature}};
  if (!v.image_dir.empty()) j["image_dir"] = v.image_dir;
}

BackendConfig backend_config_from_json(BackendKind kind, const json& j, const json& defaults) {
  json merged = defaults.is_object() ? defaults : json::object();
  merged.update(j);
  BackendConfig c;
  c.kind = kind;
  c.endpoint = merged.value("endpoint", "");
  c.model_id = merged.value("model_id", merged.value("model", ""));
  c.timeout_ms = merged.value("timeout_ms", c.timeout_ms);
  c.max_retries = merged.value("max_retries", c.max_retries);
  c.rate_limit_per_min = merged.value("rate_limit_per_min", c.rate_limit_per_min);
  c.parallelism = merged.value("parallelism", c.parallelism);
  c.auth = merged.value("auth", default_auth_variable(kind));
  c.temperature = merged.value("temperature", c.temperature);
  c.image_dir = merged.value("image_dir", "");
  validate(c);
  return c;
}

std::chrono::milliseconds SystemClock::now() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now().time_since_epoch());
}

void SystemClock::sleep_for(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

std::chrono::milliseconds VirtualClock::now() {
  std::lock_guard lock(mu_);
  return now_;
}

void VirtualClock::sleep_for(std::chrono::milliseconds d) {
  std::lock_guard lock(mu_);
  if (d.count() > 0) now_ += d;
}

RateLimiter::RateLimiter(int per_minute, Clock& clock) : per_minute_(per_minute), clock_(clock) {
  if (per_minute_ <= 0) throw Error(ErrorCode::kInvalidArgument, "rate limit must be > 0");
}

void RateLimiter::acquire() {
  std::lock_guard lock(mu_);
  for (;;) {
    const auto now = clock_.now();
    while (!grants_.empty() && grants_.front() + kWindow <= now) grants_.pop_front();
    if (static_cast<int>(grants_.size()) < per_minute_) {
      grants_.push_back(now);
      return;
    }
    clock_.sleep_for(grants_.front() + kWindow - now);
  }
}

HttpResponse HttplibTransport::post(const std::string& url, const std::string& json_body,
                                    const HttpHeaders& headers, int timeout_ms) {
  const auto parts = split_url(url);
  auto cli = make_client(parts.origin, timeout_ms);
  return to_response(cli->Post(parts.path, to_httplib(headers), json_body, "application/json"));
}

HttpResponse HttplibTransport::get(const std::string& url, const HttpHeaders& headers,
                                   int timeout_ms) {
  const auto parts = split_url(url);
  auto cli = make_client(parts.origin, timeout_ms);
  return to_response(cli->Get(parts.path, to_httplib(headers)));
}

std::chrono::milliseconds RetryPolicy::backoff(int retry, std::uint64_t random_bits) const {
  const int shift = std::min(retry, 20);
  const auto upper = std::min<std::int64_t>(cap.count(), base.count() << shift);
  return std::chrono::milliseconds(random_bits % static_cast<std::uint64_t>(upper + 1));
}

bool is_retryable_status(int status) {
  return status == 0 || status == 408 || status == 409 || status == 429 || status >= 500;
}

RequestExecutor::RequestExecutor(BackendConfig cfg, std::shared_ptr<HttpTransport> transport,
                                 std::shared_ptr<Clock> clock)
    : cfg_(std::move(cfg)),
      transport_(transport ? std::move(transport) : std::make_shared<HttplibTransport>()),
      clock_(clock ? std::move(clock) : std::make_shared<SystemClock>()),
      limiter_((validate(cfg_), cfg_.rate_limit_per_min), *clock_),
      in_flight_(cfg_.parallelism) {
  retry_.max_retries = cfg_.max_retries;
}

HttpHeaders RequestExecutor::headers() const {
  HttpHeaders h;
  if (!cfg_.auth.empty()) {
    if (const char* secret = std::getenv(cfg_.auth.c_str()); secret && *secret) {
      h.emplace("Authorization", std::string("Bearer ") + secret);
    }
  }
  return h;
}

HttpResponse RequestExecutor::send(const std::function<HttpResponse()>& request,
                                   const std::string& what) {
  HttpResponse last;
  for (int attempt = 0; attempt <= retry_.max_retries; ++attempt) {
    limiter_.acquire();
    in_flight_.acquire();
    ++attempts_;
    try {
      last = request();
    } catch (...) {
      in_flight_.release();
      throw;
    }
    in_flight_.release();
    if (last.status >= 200 && last.status < 300) return last;
    if (!is_retryable_status(last.status)) {
      throw Error(ErrorCode::kBackend, kind_tag(cfg_) + what + " failed with HTTP " +
                                           std::to_string(last.status) + ": " +
                                           snippet(last.body));
    }
    if (attempt < retry_.max_retries) {
      const auto bits = splitmix64(jitter_counter_.fetch_add(1) ^ fnv1a64(cfg_.model_id));
      clock_->sleep_for(retry_.backoff(attempt, bits));
    }
  }
  const std::string cause = last.status == 0 ? last.error : "HTTP " + std::to_string(last.status);
  throw Error(ErrorCode::kTransport, kind_tag(cfg_) + what + " unreachable after " +
                                         std::to_string(retry_.max_retries + 1) +
                                         " attempts: " + cause);
}

json RequestExecutor::post_json(const std::string& path, const json& body) {
  const std::string url = join_url(cfg_.endpoint, path);
  const std::string payload = body.dump();
  const auto resp = send(
      [&] { return transport_->post(url, payload, headers(), cfg_.timeout_ms); }, "POST " + path);
  try {
    return json::parse(resp.body);
  } catch (const json::exception&) {
    throw Error(ErrorCode::kBackend,
                kind_tag(cfg_) + "response is not JSON: " + snippet(resp.body));
  }
}

std::string RequestExecutor::get_bytes(const std::string& url) {
  return send([&] { return transport_->get(url, headers(), cfg_.timeout_ms); }, "GET image")
      .body;
}

HttpModelBackend::HttpModelBackend(BackendConfig cfg, std::shared_ptr<HttpTransport> transport,
                                   std::shared_ptr<Clock> clock)
    : executor_(std::move(cfg), std::move(transport), std::move(clock)) {}

ChatReply HttpModelBackend::chat(const json& messages, std::uint64_t seed, bool logprobs,
                                 double temperature) {
  json body = {{"model", model_id()},
               {"messages", messages},
               {"seed", seed},
               {"logprobs", logprobs},
               {"temperature", temperature}};
  if (logprobs) body["top_logprobs"] = 5;
  const json resp = executor_.post_json("/chat/completions", body);
  const std::string tag = kind_tag(executor_.config());
  ChatReply reply;
  try {
    const json& choice = resp.at("choices").at(0);
    const json& content = choice.at("message").at("content");
    reply.content = content.is_string() ? content.get<std::string>() : "";
    if (choice.contains("logprobs") && choice.at("logprobs").is_object()) {
      const json& lp = choice.at("logprobs");
      if (lp.contains("content") && lp.at("content").is_array() && !lp.at("content").empty()) {
        const json& first = lp.at("content").at(0);
        std::vector<std::pair<std::string, double>> top;
        if (first.contains("top_logprobs")) {
          for (const auto& t : first.at("top_logprobs")) {
            top.emplace_back(t.at("token").get<std::string>(), t.at("logprob").get<double>());
          }
        } else {
          top.emplace_back(first.at("token").get<std::string>(),
                           first.at("logprob").get<double>());
        }
        reply.first_token_logprobs = std::move(top);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBackend, tag + "malformed chat completion: " + e.what());
  }
  return reply;
}

std::string HttpModelBackend::complete(const std::vector<ChatMessage>& messages,
                                       std::uint64_t seed) {
  check_messages(messages);
  json wire = json::array();
  for (const auto& m : messages) wire.push_back({{"role", m.role}, {"content", m.content}});
  auto reply = chat(wire, seed, false, executor_.config().temperature);
  if (trim(reply.content).empty()) {
    throw Error(ErrorCode::kBackend, kind_tag(executor_.config()) + "empty completion");
  }
  return reply.content;
}

std::vector<std::string> HttpModelBackend::paraphrase(std::string_view prompt, int m,
                                                      std::uint64_t seed) {
  if (m < 1) throw Error(ErrorCode::kInvalidArgument, "paraphrase count must be >= 1");
  if (trim(prompt).empty()) throw Error(ErrorCode::kInvalidArgument, "prompt is empty");
  const json messages = json::array(
      {{{"role", "system"},
        {"content", "You rewrite prompts for a text-to-image model. Write exactly " +
                        std::to_string(m) +
                        " paraphrases of the user's prompt. Each paraphrase must describe the "
                        "same scene in different words. Output one paraphrase per line with no "
                        "numbering, quotes or commentary."}},
       {{"role", "user"}, {"content", std::string(prompt)}}});
  const double base_t = executor_.config().temperature;
  std::size_t got = 0;
  for (double t : {base_t, std::min(base_t + 0.3, 2.0)}) {
    auto lines = parse_line_list(chat(messages, seed, false, t).content);
    got = lines.size();
    if (lines.size() >= static_cast<std::size_t>(m)) {
      lines.resize(m);
      return lines;
    }
  }
  throw Error(ErrorCode::kBackend, kind_tag(executor_.config()) +
                                       "insufficient paraphrases: got " + std::to_string(got) +
                                       " of " + std::to_string(m));
}

ImageRef HttpModelBackend::generate_image(std::string_view prompt, std::uint64_t seed) {
  if (trim(prompt).empty()) throw Error(ErrorCode::kInvalidArgument, "prompt is empty");
  const auto& cfg = executor_.config();
  const json resp = executor_.post_json(
      "/images", {{"model", model_id()}, {"prompt", std::string(prompt)}, {"seed", seed}});
  std::string url;
  std::string b64;
  if (resp.contains("b64_data")) b64 = resp.at("b64_data").get<std::string>();
  else if (resp.contains("url")) url = resp.at("url").get<std::string>();
  else if (resp.contains("data") && resp.at("data").is_array() && !resp.at("data").empty()) {
    const auto& d = resp.at("data").at(0);
    if (d.contains("b64_json")) b64 = d.at("b64_json").get<std::string>();
    else if (d.contains("url")) url = d.at("url").get<std::string>();
  }
  if (url.empty() && b64.empty()) {
    throw Error(ErrorCode::kBackend, kind_tag(cfg) + "image response carries no url or b64_data");
  }
  const std::string bytes = b64.empty() ? executor_.get_bytes(url) : base64_decode(b64);

  ImageRef ref;
  ref.content_id = sha256_hex(bytes);
  ref.generator_id = model_id();
  ref.generation_seed = seed;
  if (!cfg.image_dir.empty()) {
    std::filesystem::create_directories(cfg.image_dir);
    const auto path = std::filesystem::path(cfg.image_dir) / (ref.content_id + ".png");
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIo, "cannot write image " + path.string());
    ref.locator = path.string();
  } else if (!url.empty()) {
    ref.locator = url;
  } else {
    ref.locator = "data:image/png;base64," + b64;
  }
  return ref;
}

std::vector<NounChunk> HttpModelBackend::extract_noun_chunks(const PromptRecord& prompt) {
  if (trim(prompt.text).empty()) throw Error(ErrorCode::kInvalidArgument, "prompt is empty");
  const json messages = json::array(
      {{{"role", "system"},
        {"content",
         "List the noun chunks of the user's text-to-image prompt: short noun phrases naming "
         "the objects, entities or features that should appear in the image. Copy each one "
         "exactly as written, one per line, with nothing else."}},
       {{"role", "user"}, {"content", prompt.text}}});
  const auto lines = parse_line_list(chat(messages, 0, false, 0.0).content);
  if (lines.empty()) {
    throw Error(ErrorCode::kUnscorable,
                kind_tag(executor_.config()) + "no scorable content in prompt " + prompt.id);
  }
  std::vector<NounChunk> out;
  for (const auto& l : lines) out.push_back({l, prompt.id});
  return out;
}

std::vector<McQuestion> HttpModelBackend::generate_questions(const PromptRecord& prompt, int q,
                                                             std::uint64_t seed) {
  if (q < 1) throw Error(ErrorCode::kInvalidArgument, "question count must be >= 1");
  const json messages = json::array(
      {{{"role", "system"},
        {"content",
         "Write up to " + std::to_string(q) +
             " multiple-choice questions that check whether an image faithfully depicts the "
             "user's prompt. Cover the objects, their attributes and their relationships. Each "
             "question has exactly one correct answer taken from the prompt and at least one "
             "distractor. Reply with a JSON array only; each element is {\"question\": string, "
             "\"options\": [string], \"answer\": string, \"category\": "
             "\"object\"|\"attribute\"|\"relationship\"|\"other\"}."}},
       {{"role", "user"}, {"content", prompt.text}}});
  for (int attempt = 0; attempt < kParseAttempts; ++attempt) {
    auto questions = parse_questions(chat(messages, seed + attempt, false, 0.0).content);
    if (!questions.empty()) {
      if (static_cast<int>(questions.size()) > q) questions.resize(q);
      return questions;
    }
  }
  throw Error(ErrorCode::kBackend, kind_tag(executor_.config()) + "question generation failed");
}

json HttpModelBackend::image_content(const ImageRef& image) {
  std::string url = image.locator;
  const bool remote = url.rfind("http://", 0) == 0 || url.rfind("https://", 0) == 0 ||
                      url.rfind("data:", 0) == 0;
  if (!remote) {
    std::ifstream in(image.locator, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot read image " + image.locator);
    std::ostringstream bytes;
    bytes << in.rdbuf();
    url = "data:image/png;base64," + base64_encode(bytes.str());
  }
  return {{"type", "image_url"}, {"image_url", {{"url", url}}}};
}

int HttpModelBackend::answer_question(const ImageRef& image, const McQuestion& question) {
  if (auto defect = question_defect(question); !defect.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "malformed question: " + defect);
  }
  std::string text = question.question + "\nOptions:\n";
  for (std::size_t i = 0; i < question.options.size(); ++i) {
    text += std::string(1, static_cast<char>('A' + i)) + ". " + question.options[i] + "\n";
  }
  text += "Answer with the letter of the correct option only.";
  const json messages = json::array(
      {{{"role", "user"},
        {"content", json::array({{{"type", "text"}, {"text", text}}, image_content(image)})}}});
  for (int attempt = 0; attempt < kParseAttempts; ++attempt) {
    const auto reply = chat(messages, attempt, false, 0.0).content;
    if (auto idx = parse_choice(reply, question)) return *idx;
  }
  throw Error(ErrorCode::kBackend, kind_tag(executor_.config()) + "unparseable answer");
}

double HttpModelBackend::yes_probability(const ImageRef& image, const NounChunk& chunk) {
  const std::string question = scoring::vqa_question_text(chunk);
  const json ask = json::array(
      {{{"role", "user"},
        {"content", json::array({{{"type", "text"}, {"text", question + " Answer Yes or No."}},
                                 image_content(image)})}}});
  const auto reply = chat(ask, 0, true, 0.0);
  if (reply.first_token_logprobs) {
    if (auto p = yes_probability_from_logprobs(*reply.first_token_logprobs)) return *p;
  }
  // No usable likelihoods: ask for a calibrated number instead.
  const json ask_number = json::array(
      {{{"role", "user"},
        {"content",
         json::array({{{"type", "text"},
                       {"text", question +
                                    " Reply with only the probability, a decimal number between "
                                    "0 and 1, that the answer is Yes."}},
                      image_content(image)})}}});
  for (int attempt = 0; attempt < kParseAttempts; ++attempt) {
    if (auto p = parse_probability(chat(ask_number, attempt, false, 0.0).content)) return *p;
  }
  throw Error(ErrorCode::kBackend, kind_tag(executor_.config()) + "unparseable probability");
}

std::vector<std::string> parse_line_list(std::string_view reply) {
  std::vector<std::string> out;
  std::istringstream in{std::string(reply)};
  std::string line;
  while (std::getline(in, line)) {
    std::string s = trim(line);
    // Strip list markers: "1.", "2)", "-", "*", "•".
    std::size_t i = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) s = trim(s.substr(i + 1));
    if (!s.empty() && (s[0] == '-' || s[0] == '*')) s = trim(s.substr(1));
    if (s.rfind("\xe2\x80\xa2", 0) == 0) s = trim(s.substr(3));
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = trim(s.substr(1, s.size() - 2));
    if (s.empty() || std::find(out.begin(), out.end(), s) != out.end()) continue;
    out.push_back(std::move(s));
  }
  return out;
}

std::optional<int> parse_choice(std::string_view reply, const McQuestion& question) {
  const std::string s = trim(reply);
  if (s.empty()) return std::nullopt;
  const int n = static_cast<int>(question.options.size());
  const bool lone_letter = s.size() == 1 || !std::isalnum(static_cast<unsigned char>(s[1]));
  if (lone_letter && std::isalpha(static_cast<unsigned char>(s[0]))) {
    const int idx = std::toupper(static_cast<unsigned char>(s[0])) - 'A';
    if (idx >= 0 && idx < n) return idx;
    return std::nullopt;
  }
  const std::string ls = lower(s);
  for (int i = 0; i < n; ++i) {
    if (lower(question.options[i]) == ls) return i;
  }
  return std::nullopt;
}

std::optional<double> parse_probability(std::string_view reply) {
  const std::string s = trim(reply);
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) return std::nullopt;
  if (!trim(std::string_view(end)).empty() && trim(std::string_view(end)) != ".") {
    return std::nullopt;
  }
  if (!(v >= 0.0 && v <= 1.0)) return std::nullopt;
  return v;
}

std::vector<McQuestion> parse_questions(std::string_view reply) {
  const auto b = reply.find('[');
  const auto e = reply.rfind(']');
  if (b == std::string_view::npos || e == std::string_view::npos || e < b) return {};
  json arr;
  try {
    arr = json::parse(reply.substr(b, e - b + 1));
  } catch (const json::exception&) {
    return {};
  }
  std::vector<McQuestion> out;
  for (const auto& item : arr) {
    try {
      McQuestion q;
      q.question = item.at("question").get<std::string>();
      q.options = item.at("options").get<std::vector<std::string>>();
      if (item.contains("answer") && item.at("answer").is_string()) {
        const auto ans = item.at("answer").get<std::string>();
        const auto it = std::find(q.options.begin(), q.options.end(), ans);
        q.correct_index = it == q.options.end() ? -1 : static_cast<int>(it - q.options.begin());
      } else if (item.contains("correct_index")) {
        q.correct_index = item.at("correct_index").get<int>();
      } else {
        continue;
      }
      q.category = question_category_from_string(item.value("category", "other"));
      if (!question_defect(q).empty() || trim(q.question).empty()) continue;
      q.id = "q" + std::to_string(out.size());
      out.push_back(std::move(q));
    } catch (const std::exception&) {
      continue;
    }
  }
  return out;
}

std::optional<double> yes_probability_from_logprobs(
    const std::vector<std::pair<std::string, double>>& top) {
  std::optional<double> yes, no;
  for (const auto& [token, lp] : top) {
    const std::string t = lower(trim(token));
    if (t == "yes" && (!yes || lp > *yes)) yes = lp;
    if (t == "no" && (!no || lp > *no)) no = lp;
  }
  if (yes && no) return scoring::normalized_yes_probability(*yes, *no);
  if (yes) return std::clamp(std::exp(*yes), 0.0, 1.0);
  if (no) return std::clamp(1.0 - std::exp(*no), 0.0, 1.0);
  return std::nullopt;
}

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(n);
  return out;
}

std::string base64_decode(std::string_view text) {
  std::string clean;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) clean.push_back(c);
  }
  if (clean.size() % 4 != 0) throw Error(ErrorCode::kParse, "invalid base64 length");
  std::string out(3 * clean.size() / 4, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(clean.data()),
                                static_cast<int>(clean.size()));
  if (n < 0) throw Error(ErrorCode::kParse, "invalid base64 data");
  std::size_t pad = 0;
  if (!clean.empty() && clean.back() == '=') ++pad;
  if (clean.size() > 1 && clean[clean.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

}  // namespace fpa
