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

#include "fpa/synthetic.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "fpa/error.hpp"
#include "fpa/hashing.hpp"

namespace fpa {
namespace {

constexpr std::string_view kImageScheme = "synthetic://";
constexpr std::string_view kUserPrefix = "User Prompt:";
constexpr std::string_view kImprovedPrefix = "Improved Prompt:";

// Domain-separation tags for derive_seed.
constexpr std::uint64_t kTagParaphrase = 0x5041524150ULL;
constexpr std::uint64_t kTagImage = 0x494d414745ULL;
constexpr std::uint64_t kTagLatent = 0x4c4154454eULL;
constexpr std::uint64_t kTagQuestion = 0x5155455354ULL;
constexpr std::uint64_t kTagEcho = 0x4543484fULL;

const std::unordered_set<std::string>& determiners() {
  static const std::unordered_set<std::string> s = {
      "a", "an", "the", "some", "its", "his", "her", "their", "my", "our",
      "your", "this", "these", "those", "each", "every"};
  return s;
}

// Prepositions, conjunctions, auxiliaries and pronouns: never content, always
// end a noun chunk.
const std::unordered_set<std::string>& function_words() {
  static const std::unordered_set<std::string> s = {
      "on",      "in",     "at",     "of",      "to",      "into",    "onto",   "near",
      "next",    "under",  "over",   "above",   "below",   "behind",  "beside", "besides",
      "between", "by",     "for",    "from",    "with",    "without", "through", "across",
      "along",   "around", "against", "inside", "outside", "beneath", "toward", "towards",
      "and",     "or",     "but",    "nor",     "that",    "which",   "who",    "whose",
      "while",   "as",     "where",  "during",  "after",   "before",  "is",     "are",
      "was",     "were",   "be",     "been",    "being",   "has",     "have",   "had",
      "it",      "they",   "there",  "up",      "down",    "off",     "out",    "away",
      "very",    "so",     "than",   "then"};
  return s;
}

// Verbs that split chunks but still count as content.
const std::unordered_set<std::string>& chunk_breaking_verbs() {
  static const std::unordered_set<std::string> s = {
      "sitting",  "standing", "holding",  "riding",   "running", "walking", "flying",
      "eating",   "playing",  "looking",  "lying",    "laying",  "wearing", "carrying",
      "parked",   "covered",  "filled",   "made",     "swimming", "sleeping", "jumping",
      "driving",  "reading",  "watching", "waiting",  "hanging"};
  return s;
}

const std::vector<std::string>& distractor_nouns() {
  static const std::vector<std::string> v = {
      "piano",  "umbrella", "lighthouse", "giraffe", "teapot",  "violin",    "cactus",  "kite",
      "anchor", "lantern",  "tractor",    "penguin", "volcano", "saxophone", "hammock", "tortoise"};
  return v;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split_ws(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

bool contains_all(const std::vector<std::string>& sorted_haystack,
                  const std::vector<std::string>& needles) {
  return std::all_of(needles.begin(), needles.end(), [&](const std::string& n) {
    return std::binary_search(sorted_haystack.begin(), sorted_haystack.end(), n);
  });
}

std::string last_user_content(const std::vector<ChatMessage>& messages) {
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == "user") return it->content;
  }
  throw Error(ErrorCode::kInvalidArgument, "no user message to complete");
}

// Places `correct` at a seeded position among `distractors`.
McQuestion build_question(std::string id, std::string text, std::string correct,
                          std::vector<std::string> distractors, QuestionCategory cat,
                          SplitMix& rng) {
  McQuestion q;
  q.id = std::move(id);
  q.question = std::move(text);
  q.category = cat;
  const int n = static_cast<int>(distractors.size()) + 1;
  q.correct_index = static_cast<int>(rng.below(n));
  for (int i = 0, d = 0; i < n; ++i) {
    q.options.push_back(i == q.correct_index ? correct : distractors[d++]);
  }
  return q;
}

}  // namespace

SyntheticWorld::SyntheticWorld(SyntheticWorldConfig cfg) : cfg_(cfg) {
  if (!(cfg_.noise_scale >= 0.0 && cfg_.noise_scale < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic noise_scale must lie in [0,1)");
  }
  if (!(cfg_.perturbation_rate >= 0.0 && cfg_.perturbation_rate <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic perturbation_rate must lie in [0,1]");
  }
  const int vocab = static_cast<int>(detail_vocabulary().size());
  if (cfg_.latent_details < 0 || cfg_.latent_details > vocab - 3) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic latent_details out of range");
  }
}

const std::vector<std::string>& SyntheticWorld::detail_vocabulary() {
  static const std::vector<std::string> v = {
      "cinematic", "golden",  "misty",    "vibrant",   "glowing",  "ornate",
      "rustic",    "serene",  "dramatic", "frosted",   "lush",     "weathered",
      "luminous",  "pastel",  "velvety",  "crisp"};
  return v;
}

std::string SyntheticWorld::model_id() const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "synthetic-world/s%llu-n%g-l%d-p%g",
                static_cast<unsigned long long>(cfg_.seed), cfg_.noise_scale, cfg_.latent_details,
                cfg_.perturbation_rate);
  return buf;
}

void SyntheticWorld::simulate_latency() const {
  if (cfg_.latency_ms > 0) {
    std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.latency_ms));
  }
}

std::vector<std::string> SyntheticWorld::content_tokens(std::string_view text) {
  std::set<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty() && !determiners().count(cur) && !function_words().count(cur)) {
      out.insert(cur);
    }
    cur.clear();
  };
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      flush();
    }
  }
  flush();
  return {out.begin(), out.end()};
}

std::vector<std::string> SyntheticWorld::noun_chunk_texts(std::string_view text) {
  std::vector<std::string> chunks;
  std::vector<std::string> run;
  auto flush = [&] {
    const bool has_content = std::any_of(run.begin(), run.end(), [](const std::string& w) {
      return !determiners().count(lower(w));
    });
    if (has_content) {
      std::string c = join(run, " ");
      if (std::find(chunks.begin(), chunks.end(), c) == chunks.end()) chunks.push_back(c);
    }
    run.clear();
  };
  for (const auto& raw : split_ws(text)) {
    auto is_word_char = [](unsigned char c) { return std::isalnum(c) != 0; };
    std::size_t b = 0, e = raw.size();
    while (b < e && !is_word_char(raw[b])) ++b;
    while (e > b && !is_word_char(raw[e - 1])) --e;
    const std::string core = raw.substr(b, e - b);
    const bool trailing_break = raw.find_first_of(",.;:!?", e) != std::string::npos;
    const bool leading_break = b > 0 && raw.find_first_of(",.;:!?(") < b;
    if (leading_break) flush();
    const std::string lc = lower(core);
    if (core.empty() || function_words().count(lc) || chunk_breaking_verbs().count(lc)) {
      flush();
      continue;
    }
    run.push_back(core);
    if (trailing_break) flush();
  }
  flush();
  return chunks;
}

std::vector<std::string> SyntheticWorld::latent_detail_tokens(std::string_view prompt) const {
  const auto& vocab = detail_vocabulary();
  std::vector<std::string> pool = vocab;
  SplitMix rng(derive_seed(cfg_.seed, {kTagLatent, fnv1a64(prompt)}));
  // Partial Fisher-Yates.
  for (int i = 0; i < cfg_.latent_details; ++i) {
    const auto j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(cfg_.latent_details);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<std::string> SyntheticWorld::reference_tokens(std::string_view prompt) const {
  std::set<std::string> r;
  for (auto& t : content_tokens(prompt)) r.insert(std::move(t));
  for (auto& t : latent_detail_tokens(prompt)) r.insert(std::move(t));
  return {r.begin(), r.end()};
}

std::vector<std::string> SyntheticWorld::paraphrase(std::string_view prompt, int m,
                                                    std::uint64_t seed) {
  if (m < 1) throw Error(ErrorCode::kInvalidArgument, "paraphrase count must be >= 1");
  if (trim(prompt).empty()) throw Error(ErrorCode::kInvalidArgument, "prompt is empty");
  simulate_latency();
  const std::string base = trim(prompt);
  std::vector<std::string> out;
  out.reserve(m);
  if (cfg_.perturbation_rate == 0.0) {
    out.assign(m, base);
    return out;
  }
  const auto words = split_ws(base);
  const auto& vocab = detail_vocabulary();
  for (int i = 0; i < m; ++i) {
    SplitMix rng(derive_seed(cfg_.seed, {kTagParaphrase, seed, fnv1a64(base),
                                         static_cast<std::uint64_t>(i)}));
    std::vector<std::string> kept;
    for (const auto& w : words) {
      if (!rng.chance(cfg_.perturbation_rate * 0.1)) kept.push_back(w);
    }
    if (kept.empty()) kept = words;
    std::string text = join(kept, " ");
    for (int slot = 0; slot < 2; ++slot) {
      if (!rng.chance(cfg_.perturbation_rate)) continue;
      const std::string& detail = vocab[rng.below(vocab.size())];
      const auto present = content_tokens(text);
      if (!std::binary_search(present.begin(), present.end(), detail)) text += ", " + detail;
    }
    out.push_back(std::move(text));
  }
  return out;
}

ImageRef SyntheticWorld::generate_image(std::string_view prompt, std::uint64_t seed) {
  if (trim(prompt).empty()) throw Error(ErrorCode::kInvalidArgument, "prompt is empty");
  simulate_latency();
  std::vector<std::string> kept;
  const std::uint64_t prompt_hash = fnv1a64(prompt);
  for (auto& tok : content_tokens(prompt)) {
    SplitMix rng(derive_seed(cfg_.seed, {kTagImage, seed, prompt_hash, fnv1a64(tok)}));
    if (cfg_.noise_scale > 0.0 && rng.chance(cfg_.noise_scale)) continue;
    kept.push_back(std::move(tok));
  }
  ImageRef ref;
  ref.locator = std::string(kImageScheme) + join(kept, "+");
  ref.content_id = sha256_hex("synthetic-image:" + join(kept, " "));
  ref.generator_id = model_id();
  ref.generation_seed = seed;
  return ref;
}

std::vector<std::string> SyntheticWorld::image_tokens(const ImageRef& image) {
  std::string_view loc = image.locator;
  if (loc.substr(0, kImageScheme.size()) != kImageScheme) {
    throw Error(ErrorCode::kInvalidArgument, "not a synthetic image: " + image.locator);
  }
  loc.remove_prefix(kImageScheme.size());
  std::vector<std::string> out;
  while (!loc.empty()) {
    const auto p = loc.find('+');
    out.emplace_back(loc.substr(0, p));
    if (p == std::string_view::npos) break;
    loc.remove_prefix(p + 1);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NounChunk> SyntheticWorld::extract_noun_chunks(const PromptRecord& prompt) {
  if (trim(prompt.text).empty()) throw Error(ErrorCode::kInvalidArgument, "prompt is empty");
  simulate_latency();
  std::vector<NounChunk> out;
  for (auto& c : noun_chunk_texts(prompt.text)) out.push_back({std::move(c), prompt.id});
  if (out.empty()) throw Error(ErrorCode::kUnscorable, "no scorable content in prompt");
  return out;
}

std::vector<McQuestion> SyntheticWorld::generate_questions(const PromptRecord& prompt, int q,
                                                           std::uint64_t seed) {
  if (q < 1) throw Error(ErrorCode::kInvalidArgument, "question count must be >= 1");
  simulate_latency();
  struct Source {
    std::string text;
    bool latent;
  };
  const auto chunks = noun_chunk_texts(prompt.text);
  const auto latent = latent_detail_tokens(prompt.text);
  std::vector<Source> sources;
  for (std::size_t i = 0; i < std::max(chunks.size(), latent.size()); ++i) {
    if (i < chunks.size()) sources.push_back({chunks[i], false});
    if (i < latent.size()) sources.push_back({latent[i], true});
  }
  if (sources.empty()) {
    throw Error(ErrorCode::kBackend, "question generation failed: no question material");
  }

  const auto& vocab = detail_vocabulary();
  const auto& nouns = distractor_nouns();
  std::vector<McQuestion> out;
  for (int j = 0; j < q; ++j) {
    const Source& src = sources[j % sources.size()];
    const bool second_pass = (j / sources.size()) % 2 == 1;
    SplitMix rng(derive_seed(cfg_.seed, {kTagQuestion, seed, fnv1a64(prompt.text),
                                         static_cast<std::uint64_t>(j)}));
    std::vector<std::string> distractors;
    std::string text;
    QuestionCategory cat;
    if (src.latent) {
      text = second_pass ? "How would you describe the look of the image?"
                         : "Which visual quality does the image have?";
      cat = QuestionCategory::kAttribute;
      while (distractors.size() < 3) {
        const std::string& w = vocab[rng.below(vocab.size())];
        if (w != src.text && std::find(distractors.begin(), distractors.end(), w) ==
                                 distractors.end()) {
          distractors.push_back(w);
        }
      }
    } else {
      text = second_pass ? "Which element appears in the image?"
                         : "Which of the following is shown in the image?";
      cat = second_pass ? QuestionCategory::kOther : QuestionCategory::kObject;
      auto words = split_ws(src.text);
      while (distractors.size() < 3) {
        words.back() = nouns[rng.below(nouns.size())];
        std::string d = join(words, " ");
        if (d != src.text &&
            std::find(distractors.begin(), distractors.end(), d) == distractors.end()) {
          distractors.push_back(std::move(d));
        }
      }
    }
    out.push_back(build_question("q" + std::to_string(j), std::move(text), src.text,
                                 std::move(distractors), cat, rng));
  }
  return out;
}

int SyntheticWorld::answer_question(const ImageRef& image, const McQuestion& question) {
  if (auto defect = question_defect(question); !defect.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "malformed question: " + defect);
  }
  simulate_latency();
  const auto present = image_tokens(image);
  const auto key = content_tokens(question.options[question.correct_index]);
  if (!key.empty() && contains_all(present, key)) return question.correct_index;
  const int n = static_cast<int>(question.options.size());
  const std::uint64_t h = fnv1a64(image.content_id + "|" + question.id + "|" + question.question);
  return static_cast<int>((question.correct_index + 1 + h % (n - 1)) % n);
}

double SyntheticWorld::yes_probability(const ImageRef& image, const NounChunk& chunk) {
  simulate_latency();
  const auto present = image_tokens(image);
  const auto wanted = content_tokens(chunk.text);
  if (wanted.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& w : wanted) {
    if (std::binary_search(present.begin(), present.end(), w)) ++hits;
  }
  return std::clamp(static_cast<double>(hits) / static_cast<double>(wanted.size()), 0.0, 1.0);
}

std::string SyntheticWorld::echo_transform(std::string_view text, std::uint64_t seed) const {
  const std::string core = trim(text);
  if (core.empty()) return {};
  const auto& vocab = detail_vocabulary();
  const std::string& w =
      vocab[derive_seed(cfg_.seed, {kTagEcho, seed, fnv1a64(core)}) % vocab.size()];
  const auto present = content_tokens(core);
  if (std::binary_search(present.begin(), present.end(), w)) return core;
  return core + ", " + w;
}

std::string SyntheticWorld::complete(const std::vector<ChatMessage>& messages,
                                     std::uint64_t seed) {
  check_messages(messages);
  simulate_latency();
  const std::string last = last_user_content(messages);
  std::string_view content = last;
  const bool framed = content.substr(0, kUserPrefix.size()) == kUserPrefix;
  if (framed) content.remove_prefix(kUserPrefix.size());
  std::string rewritten = echo_transform(content, seed);
  if (rewritten.empty()) throw Error(ErrorCode::kBackend, "empty completion");
  return framed ? std::string(kImprovedPrefix) + " " + rewritten : rewritten;
}

}  // namespace fpa
