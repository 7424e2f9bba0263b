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

#include "fpa/domain.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <set>
#include <sstream>

#include "fpa/error.hpp"
#include "fpa/scoring.hpp"

namespace fpa {
namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::pair<E, std::string_view> (&table)[N],
             const char* what) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  throw Error(ErrorCode::kParse, std::string("unknown ") + what + ": '" + std::string(s) + "'");
}

template <typename E, std::size_t N>
std::string_view name_of(E v, const std::pair<E, std::string_view> (&table)[N]) {
  for (const auto& [value, name] : table) {
    if (value == v) return name;
  }
  return "?";
}

constexpr std::pair<Provenance, std::string_view> kProvenanceNames[] = {
    {Provenance::kOriginal, "original"},
    {Provenance::kParaphrase, "paraphrase"},
    {Provenance::kFinetunedOnePass, "finetuned_one_pass"},
    {Provenance::kIclOnePass, "icl_one_pass"},
};

constexpr std::pair<QuestionCategory, std::string_view> kCategoryNames[] = {
    {QuestionCategory::kObject, "object"},
    {QuestionCategory::kAttribute, "attribute"},
    {QuestionCategory::kRelationship, "relationship"},
    {QuestionCategory::kOther, "other"},
};

constexpr std::pair<BackendKind, std::string_view> kKindNames[] = {
    {BackendKind::kParaphraser, "paraphraser"},
    {BackendKind::kImageGen, "image_gen"},
    {BackendKind::kQuestionGen, "question_gen"},
    {BackendKind::kChunkExtract, "chunk_extract"},
    {BackendKind::kVqaAnswer, "vqa_answer"},
    {BackendKind::kYesProb, "yes_prob"},
    {BackendKind::kOnePassLlm, "one_pass_llm"},
};

constexpr std::pair<PromptCase, std::string_view> kCaseNames[] = {
    {PromptCase::kOriginal, "original"},
    {PromptCase::kOptimized, "optimized"},
};

// Violations of the ScoreBundle invariants, each prefixed with `where`.
void check_bundle(const ScoreBundle& b, const std::string& where,
                  std::vector<std::string>& out) {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  for (const auto& c : b.per_chunk) {
    if (!in_unit(c.yes_probability)) {
      out.push_back(where + ".per_chunk: yes_probability outside [0,1] for '" + c.chunk_text +
                    "'");
      return;
    }
  }
  if (b.per_question.empty()) {
    if (b.tifa) out.push_back(where + ".tifa: set while per_question is empty (must be unscored)");
  } else {
    std::size_t correct = 0;
    for (const auto& q : b.per_question) correct += q.correct ? 1 : 0;
    const double expected =
        static_cast<double>(correct) / static_cast<double>(b.per_question.size());
    if (!b.tifa || *b.tifa != expected) {
      out.push_back(where + ".tifa: does not equal the fraction of correct answers");
    }
  }
  if (b.per_chunk.empty()) {
    if (b.vqa) out.push_back(where + ".vqa: set while per_chunk is empty (must be unscored)");
  } else {
    std::vector<double> probs;
    for (const auto& c : b.per_chunk) probs.push_back(c.yes_probability);
    if (!b.vqa || *b.vqa != scoring::vqa_score(probs)) {
      out.push_back(where + ".vqa: does not equal the mean yes_probability");
    }
  }
  if (b.tifa && b.vqa) {
    if (!b.combined || *b.combined != *b.tifa + *b.vqa) {
      out.push_back(where + ".combined: does not equal tifa + vqa");
    }
  } else if (b.combined) {
    out.push_back(where + ".combined: set while tifa or vqa is unscored");
  }
}

}  // namespace

std::string_view to_string(Provenance p) { return name_of(p, kProvenanceNames); }
Provenance provenance_from_string(std::string_view s) {
  return parse_enum(s, kProvenanceNames, "provenance");
}

std::string_view to_string(QuestionCategory c) { return name_of(c, kCategoryNames); }
QuestionCategory question_category_from_string(std::string_view s) {
  return parse_enum(s, kCategoryNames, "question category");
}

std::string_view to_string(BackendKind k) { return name_of(k, kKindNames); }
BackendKind backend_kind_from_string(std::string_view s) {
  return parse_enum(s, kKindNames, "backend kind");
}

std::string_view to_string(PromptCase c) { return name_of(c, kCaseNames); }
PromptCase prompt_case_from_string(std::string_view s) {
  return parse_enum(s, kCaseNames, "prompt case");
}

std::string question_defect(const McQuestion& q) {
  if (q.options.size() < 2) return "fewer than 2 options";
  if (q.correct_index < 0 || q.correct_index >= static_cast<int>(q.options.size())) {
    return "correct_index out of range";
  }
  std::set<std::string> seen(q.options.begin(), q.options.end());
  if (seen.size() != q.options.size()) return "options are not pairwise distinct";
  return {};
}

std::uint64_t& BackendCallStats::operator[](BackendKind k) {
  switch (k) {
    case BackendKind::kParaphraser: return paraphraser_calls;
    case BackendKind::kImageGen: return image_gen_calls;
    case BackendKind::kQuestionGen: return question_gen_calls;
    case BackendKind::kChunkExtract: return chunk_extract_calls;
    case BackendKind::kVqaAnswer: return vqa_answer_calls;
    case BackendKind::kYesProb: return yes_prob_calls;
    case BackendKind::kOnePassLlm: return one_pass_llm_calls;
  }
  throw Error(ErrorCode::kInternal, "bad backend kind");
}

std::uint64_t BackendCallStats::operator[](BackendKind k) const {
  return const_cast<BackendCallStats&>(*this)[k];
}

BackendCallStats& BackendCallStats::operator+=(const BackendCallStats& o) {
  for (auto k : kAllBackendKinds) (*this)[k] += o[k];
  return *this;
}

BackendCallStats operator-(BackendCallStats a, const BackendCallStats& b) {
  for (auto k : kAllBackendKinds) a[k] -= b[k];
  return a;
}

std::uint64_t BackendCallStats::total() const {
  std::uint64_t t = 0;
  for (auto k : kAllBackendKinds) t += (*this)[k];
  return t;
}

std::uint64_t BackendCallStats::scoring_calls() const {
  return image_gen_calls + question_gen_calls + chunk_extract_calls + vqa_answer_calls +
         yes_prob_calls;
}

ExamplePair example_pair_from(const OptimizationRecord& record) {
  ExamplePair p;
  p.original = record.prompt.text;
  p.optimized = record.final_text;
  p.source_record_id = record.prompt.id;
  if (record.final_score.combined && record.original_score.combined) {
    p.combined_gain = *record.final_score.combined - *record.original_score.combined;
  }
  return p;
}

std::vector<std::string> validate_record(const OptimizationRecord& r) {
  std::vector<std::string> out;
  if (trim(r.prompt.text).empty()) out.push_back("prompt.text: empty after trimming");
  if (r.prompt.id.empty()) out.push_back("prompt.id: empty");

  check_bundle(r.original_score, "original_score", out);
  check_bundle(r.final_score, "final_score", out);
  if (!r.original_score.scored()) out.push_back("original_score: unscored");

  if (r.traces.empty()) {
    out.push_back("traces: empty (at least one iteration required)");
    return out;
  }

  for (std::size_t t = 0; t < r.traces.size(); ++t) {
    const auto& tr = r.traces[t];
    const std::string where = "traces[" + std::to_string(t) + "]";
    if (tr.iteration != static_cast<int>(t)) {
      out.push_back(where + ".iteration: expected " + std::to_string(t));
    }
    if (tr.candidates.empty()) {
      out.push_back(where + ".candidates: empty");
      continue;
    }
    int originals = 0;
    for (std::size_t i = 0; i < tr.candidates.size(); ++i) {
      const auto& sc = tr.candidates[i];
      const std::string cw = where + ".candidates[" + std::to_string(i) + "]";
      if (sc.candidate.index != static_cast<int>(i)) {
        out.push_back(cw + ".index: indices must be contiguous from 0");
      }
      if (sc.candidate.iteration != tr.iteration) {
        out.push_back(cw + ".iteration: does not match the trace iteration");
      }
      if (sc.candidate.text.empty()) out.push_back(cw + ".text: empty");
      if (sc.candidate.provenance == Provenance::kOriginal) ++originals;
      if (!sc.failed()) check_bundle(sc.score, cw + ".score", out);
    }
    if (originals > 1) out.push_back(where + ".candidates: more than one original candidate");
    if (t == 0 && r.pool_incumbent && originals != 1) {
      out.push_back(where + ".candidates: pooled first iteration must hold the original");
    }

    const int sel = tr.selected_index;
    if (sel < 0 || sel >= static_cast<int>(tr.candidates.size())) {
      out.push_back(where + ".selected_index: out of range");
      continue;
    }
    const auto& chosen = tr.candidates[sel];
    if (chosen.failed() || !chosen.score.combined) {
      out.push_back(where + ".selected_index: points at an unscored candidate");
      continue;
    }
    for (std::size_t i = 0; i < tr.candidates.size(); ++i) {
      const auto& other = tr.candidates[i];
      if (other.failed() || !other.score.combined) continue;
      const double a = *other.score.combined;
      const double best = *chosen.score.combined;
      if (a > best || (a == best && static_cast<int>(i) < sel)) {
        out.push_back(where + ".selected_index: candidate " + std::to_string(i) +
                      " beats or ties the selection at a lower index");
        break;
      }
    }
  }

  const auto& last = r.traces.back();
  if (last.selected_index >= 0 && last.selected_index < static_cast<int>(last.candidates.size())) {
    const auto& chosen = last.candidates[last.selected_index];
    if (r.final_text != chosen.candidate.text) {
      out.push_back("final_text: differs from the last trace's selected candidate");
    }
    if (!(r.final_score == chosen.score)) {
      out.push_back("final_score: differs from the last trace's selected candidate score");
    }
  }
  if (r.pool_incumbent && r.final_score.combined && r.original_score.combined &&
      *r.final_score.combined < *r.original_score.combined) {
    out.push_back("final_score.combined: below original_score.combined despite pooling");
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n\f\v");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\f\v");
  return std::string(s.substr(b, e - b + 1));
}

std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace fpa
