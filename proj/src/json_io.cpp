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

#include "fpa/json_io.hpp"

#include "fpa/error.hpp"

namespace fpa {
namespace {

using nlohmann::json;

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_double(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

std::string str_or(const json& j, const char* key, std::string fallback = {}) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<std::string>();
}

}  // namespace

void to_json(json& j, const PromptRecord& v) {
  j = json{{"id", v.id}, {"text", v.text}, {"dataset", v.dataset}, {"created_at", v.created_at}};
}

void from_json(const json& j, PromptRecord& v) {
  // Ids may be absent (assigned by the loader) or numeric.
  if (j.contains("id") && j.at("id").is_number_integer()) {
    v.id = std::to_string(j.at("id").get<std::int64_t>());
  } else {
    v.id = str_or(j, "id");
  }
  v.text = j.at("text").get<std::string>();
  v.dataset = str_or(j, "dataset");
  v.created_at = str_or(j, "created_at");
}

void to_json(json& j, const Candidate& v) {
  j = json{{"index", v.index},
           {"text", v.text},
           {"provenance", std::string(to_string(v.provenance))},
           {"iteration", v.iteration}};
}

void from_json(const json& j, Candidate& v) {
  v.index = j.at("index").get<int>();
  v.text = j.at("text").get<std::string>();
  v.provenance = provenance_from_string(j.at("provenance").get<std::string>());
  v.iteration = j.at("iteration").get<int>();
}

void to_json(json& j, const ImageRef& v) {
  j = json{{"content_id", v.content_id},
           {"locator", v.locator},
           {"generator_id", v.generator_id},
           {"generation_seed", v.generation_seed}};
}

void from_json(const json& j, ImageRef& v) {
  v.content_id = j.at("content_id").get<std::string>();
  v.locator = j.at("locator").get<std::string>();
  v.generator_id = j.at("generator_id").get<std::string>();
  v.generation_seed = j.at("generation_seed").get<std::uint64_t>();
}

void to_json(json& j, const NounChunk& v) {
  j = json{{"text", v.text}, {"source_prompt_id", v.source_prompt_id}};
}

void from_json(const json& j, NounChunk& v) {
  v.text = j.at("text").get<std::string>();
  v.source_prompt_id = str_or(j, "source_prompt_id");
}

void to_json(json& j, const McQuestion& v) {
  j = json{{"id", v.id},
           {"question", v.question},
           {"options", v.options},
           {"correct_index", v.correct_index},
           {"category", std::string(to_string(v.category))}};
}

void from_json(const json& j, McQuestion& v) {
  v.id = str_or(j, "id");
  v.question = j.at("question").get<std::string>();
  v.options = j.at("options").get<std::vector<std::string>>();
  v.correct_index = j.at("correct_index").get<int>();
  v.category = question_category_from_string(str_or(j, "category", "other"));
}

void to_json(json& j, const ScoreBundle& v) {
  json pq = json::array();
  for (const auto& q : v.per_question) {
    pq.push_back({{"question_id", q.question_id},
                  {"chosen_index", q.chosen_index},
                  {"correct", q.correct}});
  }
  json pc = json::array();
  for (const auto& c : v.per_chunk) {
    pc.push_back({{"chunk_text", c.chunk_text}, {"yes_probability", c.yes_probability}});
  }
  j = json{{"tifa", opt(v.tifa)},
           {"vqa", opt(v.vqa)},
           {"combined", opt(v.combined)},
           {"per_question", std::move(pq)},
           {"per_chunk", std::move(pc)}};
}

void from_json(const json& j, ScoreBundle& v) {
  v.tifa = opt_double(j, "tifa");
  v.vqa = opt_double(j, "vqa");
  v.combined = opt_double(j, "combined");
  v.per_question.clear();
  for (const auto& q : j.at("per_question")) {
    v.per_question.push_back({q.at("question_id").get<std::string>(),
                              q.at("chosen_index").get<int>(), q.at("correct").get<bool>()});
  }
  v.per_chunk.clear();
  for (const auto& c : j.at("per_chunk")) {
    v.per_chunk.push_back(
        {c.at("chunk_text").get<std::string>(), c.at("yes_probability").get<double>()});
  }
}

void to_json(json& j, const ScoredCandidate& v) {
  j = json{{"candidate", v.candidate},
           {"image", v.image ? json(*v.image) : json(nullptr)},
           {"score", v.score}};
  if (v.failed()) j["error"] = v.error;
}

void from_json(const json& j, ScoredCandidate& v) {
  v.candidate = j.at("candidate").get<Candidate>();
  if (j.contains("image") && !j.at("image").is_null()) {
    v.image = j.at("image").get<ImageRef>();
  } else {
    v.image.reset();
  }
  v.score = j.at("score").get<ScoreBundle>();
  v.error = str_or(j, "error");
}

void to_json(json& j, const IterationTrace& v) {
  j = json{{"iteration", v.iteration},
           {"seed_text", v.seed_text},
           {"candidates", v.candidates},
           {"selected_index", v.selected_index}};
}

void from_json(const json& j, IterationTrace& v) {
  v.iteration = j.at("iteration").get<int>();
  v.seed_text = j.at("seed_text").get<std::string>();
  v.candidates = j.at("candidates").get<std::vector<ScoredCandidate>>();
  v.selected_index = j.at("selected_index").get<int>();
}

void to_json(json& j, const BackendCallStats& v) {
  j = json::object();
  for (auto k : kAllBackendKinds) j[std::string(to_string(k)) + "_calls"] = v[k];
}

void from_json(const json& j, BackendCallStats& v) {
  v = {};
  for (auto k : kAllBackendKinds) {
    const std::string key = std::string(to_string(k)) + "_calls";
    if (j.contains(key)) v[k] = j.at(key).get<std::uint64_t>();
  }
}

void to_json(json& j, const OptimizationRecord& v) {
  j = json{{"schema", kRecordSchema},
           {"prompt", v.prompt},
           {"mode", v.mode},
           {"original_score", v.original_score},
           {"traces", v.traces},
           {"final_text", v.final_text},
           {"final_score", v.final_score},
           {"stats", v.stats},
           {"engine_seed", v.engine_seed},
           {"config_fingerprint", v.config_fingerprint},
           {"pool_incumbent", v.pool_incumbent}};
}

void from_json(const json& j, OptimizationRecord& v) {
  const std::string schema = str_or(j, "schema");
  if (schema != kRecordSchema) {
    throw Error(ErrorCode::kParse, "unsupported record schema '" + schema + "'");
  }
  v.prompt = j.at("prompt").get<PromptRecord>();
  v.mode = str_or(j, "mode");
  v.original_score = j.at("original_score").get<ScoreBundle>();
  v.traces = j.at("traces").get<std::vector<IterationTrace>>();
  v.final_text = j.at("final_text").get<std::string>();
  v.final_score = j.at("final_score").get<ScoreBundle>();
  v.stats = j.at("stats").get<BackendCallStats>();
  v.engine_seed = j.at("engine_seed").get<std::uint64_t>();
  v.config_fingerprint = str_or(j, "config_fingerprint");
  v.pool_incumbent = j.value("pool_incumbent", true);
}

void to_json(json& j, const ExamplePair& v) {
  j = json{{"original", v.original}, {"optimized", v.optimized}, {"gain", v.combined_gain}};
  if (!v.source_record_id.empty()) j["id"] = v.source_record_id;
}

// Accepts both the ICL pool shape and the SFT prompt/completion shape.
void from_json(const json& j, ExamplePair& v) {
  if (j.contains("original")) {
    v.original = j.at("original").get<std::string>();
    v.optimized = j.at("optimized").get<std::string>();
  } else {
    v.original = j.at("prompt").get<std::string>();
    v.optimized = j.at("completion").get<std::string>();
  }
  v.combined_gain = j.value("gain", 0.0);
  v.source_record_id = str_or(j, "id");
}

void to_json(json& j, const HumanRating& v) {
  j = json{{"prompt_id", v.prompt_id},
           {"annotator_id", v.annotator_id},
           {"alignment", v.alignment},
           {"structure", v.structure},
           {"case", std::string(to_string(v.prompt_case))}};
}

void from_json(const json& j, HumanRating& v) {
  v.prompt_id = j.at("prompt_id").get<std::string>();
  v.annotator_id = str_or(j, "annotator_id");
  v.alignment = j.at("alignment").get<int>();
  v.structure = j.at("structure").get<int>();
  v.prompt_case = prompt_case_from_string(j.at("case").get<std::string>());
  if (v.alignment < 0 || v.alignment > 4 || v.structure < 0 || v.structure > 4) {
    throw Error(ErrorCode::kParse, "rating for '" + v.prompt_id + "' outside the 0..4 scale");
  }
}

}  // namespace fpa
