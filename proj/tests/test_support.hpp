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

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "fpa/domain.hpp"
#include "fpa/scoring.hpp"
#include "fpa/synthetic.hpp"

namespace fpa::testing {

// Directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "fpa") {
    std::string tmpl =
        (std::filesystem::temp_directory_path() / (tag + "-XXXXXX")).string();
    if (!::mkdtemp(tmpl.data())) std::abort();
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline BackendSet synthetic_backends(SyntheticWorldConfig cfg = {}) {
  auto w = std::make_shared<SyntheticWorld>(cfg);
  return {w, w, w, w, w, w, w};
}

// Bundle with `correct` of `total` questions right and the given chunk probabilities.
inline ScoreBundle bundle(int correct, int total, std::vector<double> probs) {
  std::vector<QuestionOutcome> qs;
  for (int i = 0; i < total; ++i) qs.push_back({"q" + std::to_string(i), 0, i < correct});
  std::vector<ChunkOutcome> cs;
  for (std::size_t i = 0; i < probs.size(); ++i) cs.push_back({"c" + std::to_string(i), probs[i]});
  return scoring::make_score_bundle(std::move(qs), std::move(cs));
}

// Well-formed one-iteration record: original scored `orig`, candidates after it.
inline OptimizationRecord hand_record(const std::vector<ScoreBundle>& paraphrase_scores,
                                      const ScoreBundle& orig, int selected) {
  OptimizationRecord r;
  r.prompt = {"p1", "a red bicycle", "coco", "2026-01-01T00:00:00Z"};
  r.original_score = orig;
  IterationTrace t;
  t.iteration = 0;
  t.seed_text = r.prompt.text;
  ScoredCandidate o;
  o.candidate = {0, r.prompt.text, Provenance::kOriginal, 0};
  o.score = orig;
  t.candidates.push_back(o);
  for (std::size_t i = 0; i < paraphrase_scores.size(); ++i) {
    ScoredCandidate c;
    c.candidate = {static_cast<int>(i + 1), "variant " + std::to_string(i + 1),
                   Provenance::kParaphrase, 0};
    c.score = paraphrase_scores[i];
    t.candidates.push_back(c);
  }
  t.selected_index = selected;
  r.final_text = t.candidates[selected].candidate.text;
  r.final_score = t.candidates[selected].score;
  r.traces.push_back(t);
  r.mode = "After 1 Iteration";
  r.config_fingerprint = "f";
  return r;
}

}  // namespace fpa::testing
