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

#include "fpa/scoring.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "fpa/error.hpp"

namespace fpa::scoring {
namespace {

void require_unit_interval(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("invalid score: ") + what + " = " + std::to_string(v) +
                    " outside [0,1]");
  }
}

// Rounds the decimal string `digits` (no sign, with a '.') half-up at
// `decimals` fractional digits.
std::string round_decimal_string(const std::string& digits, int decimals) {
  const auto dot = digits.find('.');
  std::string int_part = digits.substr(0, dot);
  std::string frac = dot == std::string::npos ? "" : digits.substr(dot + 1);
  frac.resize(std::max<std::size_t>(frac.size(), decimals + 1), '0');
  const bool round_up = frac[decimals] >= '5';
  std::string kept = int_part + frac.substr(0, decimals);
  if (round_up) {
    int i = static_cast<int>(kept.size()) - 1;
    for (; i >= 0; --i) {
      if (kept[i] == '9') {
        kept[i] = '0';
      } else {
        ++kept[i];
        break;
      }
    }
    if (i < 0) kept.insert(kept.begin(), '1');
  }
  const std::size_t int_len = kept.size() - decimals;
  std::string out = kept.substr(0, int_len);
  if (decimals > 0) out += "." + kept.substr(int_len);
  return out;
}

}  // namespace

double tifa_score(std::span<const Answer> answers) {
  if (answers.empty()) {
    throw Error(ErrorCode::kUnscorable, "unscorable: no answered questions");
  }
  std::size_t correct = 0;
  for (const auto& a : answers) {
    if (a.chosen_index == a.correct_index) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(answers.size());
}

double vqa_score(std::span<const double> yes_probabilities) {
  if (yes_probabilities.empty()) {
    throw Error(ErrorCode::kUnscorable, "unscorable: no noun chunks");
  }
  double sum = 0.0;
  for (double p : yes_probabilities) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "invalid probability: " + std::to_string(p));
    }
    sum += p;
  }
  return sum / static_cast<double>(yes_probabilities.size());
}

double combined_score(double tifa, double vqa) {
  require_unit_interval(tifa, "tifa");
  require_unit_interval(vqa, "vqa");
  return tifa + vqa;
}

double report_average(double tifa, double vqa) {
  return round_half_up(combined_score(tifa, vqa) / 2.0, 3);
}

std::string vqa_question_text(const NounChunk& chunk) {
  if (chunk.text.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "noun chunk text is empty");
  }
  return "Does this figure show " + chunk.text + "?";
}

double normalized_yes_probability(double yes_logprob, double no_logprob) {
  // Softmax over two entries, shifted by the max for stability.
  const double m = std::max(yes_logprob, no_logprob);
  const double y = std::exp(yes_logprob - m);
  const double n = std::exp(no_logprob - m);
  return y / (y + n);
}

ScoreBundle make_score_bundle(std::vector<QuestionOutcome> per_question,
                              std::vector<ChunkOutcome> per_chunk) {
  ScoreBundle b;
  if (!per_question.empty()) {
    std::vector<Answer> answers;
    answers.reserve(per_question.size());
    for (const auto& q : per_question) answers.push_back({q.correct ? 1 : 0, 1});
    b.tifa = tifa_score(answers);
  }
  if (!per_chunk.empty()) {
    std::vector<double> probs;
    probs.reserve(per_chunk.size());
    for (const auto& c : per_chunk) probs.push_back(c.yes_probability);
    b.vqa = vqa_score(probs);
  }
  if (b.tifa && b.vqa) b.combined = combined_score(*b.tifa, *b.vqa);
  b.per_question = std::move(per_question);
  b.per_chunk = std::move(per_chunk);
  return b;
}

std::string format_fixed(double value, int decimals) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::kInvalidArgument, "cannot format a non-finite value");
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12f", std::fabs(value));
  std::string out = round_decimal_string(buf, decimals);
  const bool zero = out.find_first_not_of("0.") == std::string::npos;
  if (value < 0 && !zero) out.insert(out.begin(), '-');
  return out;
}

std::string format_signed(double value, int decimals) {
  std::string out = format_fixed(value, decimals);
  if (out.front() != '-') out.insert(out.begin(), '+');
  return out;
}

double round_half_up(double value, int decimals) {
  return std::stod(format_fixed(value, decimals));
}

}  // namespace fpa::scoring
