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

#include <json.hpp>

#include "fpa/domain.hpp"

// JSON mapping for the domain types. Unscored metrics serialise as null.
namespace fpa {

inline constexpr const char* kRecordSchema = "fpa/1";

void to_json(nlohmann::json& j, const PromptRecord& v);
void from_json(const nlohmann::json& j, PromptRecord& v);
void to_json(nlohmann::json& j, const Candidate& v);
void from_json(const nlohmann::json& j, Candidate& v);
void to_json(nlohmann::json& j, const ImageRef& v);
void from_json(const nlohmann::json& j, ImageRef& v);
void to_json(nlohmann::json& j, const NounChunk& v);
void from_json(const nlohmann::json& j, NounChunk& v);
void to_json(nlohmann::json& j, const McQuestion& v);
void from_json(const nlohmann::json& j, McQuestion& v);
void to_json(nlohmann::json& j, const ScoreBundle& v);
void from_json(const nlohmann::json& j, ScoreBundle& v);
void to_json(nlohmann::json& j, const ScoredCandidate& v);
void from_json(const nlohmann::json& j, ScoredCandidate& v);
void to_json(nlohmann::json& j, const IterationTrace& v);
void from_json(const nlohmann::json& j, IterationTrace& v);
void to_json(nlohmann::json& j, const BackendCallStats& v);
void from_json(const nlohmann::json& j, BackendCallStats& v);
void to_json(nlohmann::json& j, const OptimizationRecord& v);
void from_json(const nlohmann::json& j, OptimizationRecord& v);
void to_json(nlohmann::json& j, const ExamplePair& v);
void from_json(const nlohmann::json& j, ExamplePair& v);
void to_json(nlohmann::json& j, const HumanRating& v);
void from_json(const nlohmann::json& j, HumanRating& v);

}  // namespace fpa
