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

#include <span>
#include <string>
#include <vector>

#include "fpa/domain.hpp"

// Alignment metric arithmetic. Everything here is pure; failures throw
// fpa::Error with kUnscorable or kInvalidArgument.
namespace fpa::scoring {

struct Answer {
  int chosen_index = 0;
  int correct_index = 0;
};

// Fraction of multiple-choice answers that hit the expected option.
double tifa_score(std::span<const Answer> answers);

// Mean "Yes" probability over noun-chunk questions.
double vqa_score(std::span<const double> yes_probabilities);

double combined_score(double tifa, double vqa);

// (tifa + vqa) / 2 rounded half-up to three decimals, as emitted in reports.
double report_average(double tifa, double vqa);

std::string vqa_question_text(const NounChunk& chunk);

// P("Yes") renormalised over {"Yes", "No"} from natural-log likelihoods.
double normalized_yes_probability(double yes_logprob, double no_logprob);

// Assembles a bundle from per-question and per-chunk evidence. Either list
// may be empty, in which case the matching metric stays unscored.
ScoreBundle make_score_bundle(std::vector<QuestionOutcome> per_question,
                              std::vector<ChunkOutcome> per_chunk);

// Decimal rounding, half away from zero. The value is first snapped to 12
// decimal places so that binary representation error (0.8474999999999999
// for the sum 0.845 + 0.850 halved) does not flip a half-way case.
double round_half_up(double value, int decimals);
std::string format_fixed(double value, int decimals);
// Like format_fixed but always carries a sign: "+0.0424", "-0.0500".
std::string format_signed(double value, int decimals);

}  // namespace fpa::scoring
