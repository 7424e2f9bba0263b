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

#include "fpa/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "fpa/error.hpp"
#include "fpa/scoring.hpp"

namespace fpa {
namespace {

using nlohmann::json;
using scoring::format_fixed;
using scoring::round_half_up;

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string lpad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

// Renders rows of cells with every column padded to its widest cell. The
// first `text_cols` columns are left-aligned, the rest right-aligned.
std::string render_columns(const std::vector<std::vector<std::string>>& rows,
                           std::size_t text_cols) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (width.size() < r.size()) width.resize(r.size(), 0);
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) line += "  ";
      line += c < text_cols ? pad(r[c], width[c]) : lpad(r[c], width[c]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

std::string ratio_text(double num, double den) {
  if (den == 0.0) return num == 0.0 ? "n/a" : "inf";
  return format_fixed(num / den, 2);
}

}  // namespace

std::vector<ScoreSample> samples_from_records(std::span<const OptimizationRecord> records) {
  std::vector<ScoreSample> out;
  for (const auto& r : records) {
    const auto& o = r.original_score;
    if (o.tifa && o.vqa) out.push_back({r.prompt.dataset, kOriginalModeLabel, *o.tifa, *o.vqa});
    const auto& f = r.final_score;
    if (f.tifa && f.vqa) out.push_back({r.prompt.dataset, r.mode, *f.tifa, *f.vqa});
  }
  return out;
}

std::vector<TableRow> aggregate(std::span<const ScoreSample> samples) {
  struct Sum {
    double tifa = 0, vqa = 0, avg = 0;
    std::size_t n = 0;
  };
  std::map<std::pair<std::string, std::string>, Sum> groups;
  for (const auto& s : samples) {
    auto& g = groups[{s.dataset, s.mode}];
    g.tifa += s.tifa;
    g.vqa += s.vqa;
    g.avg += (s.tifa + s.vqa) / 2.0;
    ++g.n;
  }
  std::vector<TableRow> rows;
  for (const auto& [key, g] : groups) {
    TableRow row;
    row.dataset = key.first;
    row.mode = key.second;
    row.n = g.n;
    row.raw_tifa = g.tifa / static_cast<double>(g.n);
    row.raw_vqa = g.vqa / static_cast<double>(g.n);
    row.raw_average = g.avg / static_cast<double>(g.n);
    row.mean_tifa = round_half_up(row.raw_tifa, 3);
    row.mean_vqa = round_half_up(row.raw_vqa, 3);
    row.mean_average = round_half_up(row.raw_average, 3);
    rows.push_back(std::move(row));
  }
  return rows;
}

double delta(double before, double after) { return round_half_up(after - before, 4); }

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kInvalidArgument, "pearson: series lengths differ (" +
                                                 std::to_string(x.size()) + " vs " +
                                                 std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw Error(ErrorCode::kInvalidArgument, "pearson: need at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::kUndefined, "undefined correlation");
  const double r = sxy / (std::sqrt(sxx) * std::sqrt(syy));
  return std::clamp(r, -1.0, 1.0);
}

ScoreTable score_table_from_records(std::span<const OptimizationRecord> records) {
  ScoreTable out;
  for (const auto& r : records) {
    if (r.original_score.tifa && r.original_score.vqa) {
      out[{r.prompt.id, PromptCase::kOriginal}] = {*r.original_score.tifa, *r.original_score.vqa};
    }
    if (r.final_score.tifa && r.final_score.vqa) {
      out[{r.prompt.id, PromptCase::kOptimized}] = {*r.final_score.tifa, *r.final_score.vqa};
    }
  }
  return out;
}

std::vector<CorrelationMatrix> correlate_human(std::span<const HumanRating> ratings,
                                               const ScoreTable& scores, bool pooled) {
  struct Mean {
    double alignment = 0, structure = 0;
    int n = 0;
  };
  std::map<std::pair<std::string, PromptCase>, Mean> averaged;
  std::set<std::string> unmatched;
  for (const auto& r : ratings) {
    const std::pair key{r.prompt_id, r.prompt_case};
    if (!scores.count(key)) {
      unmatched.insert(r.prompt_id + "/" + std::string(to_string(r.prompt_case)));
      continue;
    }
    auto& m = averaged[key];
    m.alignment += r.alignment;
    m.structure += r.structure;
    ++m.n;
  }
  if (!unmatched.empty()) {
    std::string ids;
    for (const auto& id : unmatched) ids += (ids.empty() ? "" : ", ") + id;
    throw Error(ErrorCode::kValidation, "ratings without automatic scores: " + ids);
  }

  auto matrix_for = [&](const std::string& scope, std::optional<PromptCase> only) {
    std::vector<double> al, st, ti, vq;
    for (const auto& [key, m] : averaged) {
      if (only && key.second != *only) continue;
      const auto& s = scores.at(key);
      al.push_back(m.alignment / m.n);
      st.push_back(m.structure / m.n);
      ti.push_back(s.tifa);
      vq.push_back(s.vqa);
    }
    CorrelationMatrix c;
    c.scope = scope;
    c.n = al.size();
    c.alignment_tifa = pearson(al, ti);
    c.alignment_vqa = pearson(al, vq);
    c.structure_tifa = pearson(st, ti);
    c.structure_vqa = pearson(st, vq);
    return c;
  };

  if (pooled) return {matrix_for("pooled", std::nullopt)};
  return {matrix_for("original", PromptCase::kOriginal),
          matrix_for("optimized", PromptCase::kOptimized)};
}

std::vector<ModeCost> mode_costs_from_records(std::span<const OptimizationRecord> records) {
  std::map<std::string, ModeCost> by_mode;
  std::map<std::string, bool> uniform;
  for (const auto& r : records) {
    auto [it, fresh] = by_mode.try_emplace(r.mode);
    auto& mc = it->second;
    mc.mode = r.mode;
    ++mc.records;
    mc.stats += r.stats;
    const int k = static_cast<int>(r.traces.size());
    int m = 0;
    if (!r.traces.empty()) {
      m = static_cast<int>(r.traces.front().candidates.size()) - (r.pool_incumbent ? 1 : 0);
    }
    if (fresh) {
      uniform[r.mode] = true;
      mc.k = k;
      mc.m = m;
    } else if (mc.k != k || mc.m != m) {
      uniform[r.mode] = false;
    }
  }
  std::vector<ModeCost> out;
  for (auto& [mode, mc] : by_mode) {
    if (!uniform[mode]) {
      mc.k.reset();
      mc.m.reset();
    }
    out.push_back(std::move(mc));
  }
  return out;
}

CostReport cost_report(std::span<const ModeCost> modes) {
  CostReport rep;
  rep.modes.assign(modes.begin(), modes.end());
  const ModeCost* iterative = nullptr;
  const ModeCost* one_pass = nullptr;
  for (const auto& mc : rep.modes) {
    if (mc.one_pass) {
      if (mc.stats.scoring_calls() != 0 || mc.stats.paraphraser_calls != 0) {
        rep.violations.push_back(mc.mode + ": one-pass issued " +
                                 std::to_string(mc.stats.scoring_calls()) +
                                 " scoring call(s), expected 0");
      }
      if (mc.stats.one_pass_llm_calls != mc.records) {
        rep.violations.push_back(mc.mode + ": one_pass_llm_calls " +
                                 std::to_string(mc.stats.one_pass_llm_calls) + " != records " +
                                 std::to_string(mc.records));
      }
      if (!one_pass) one_pass = &mc;
    } else {
      if (mc.k && mc.m) {
        const std::uint64_t expected =
            static_cast<std::uint64_t>(mc.records) * (1 + static_cast<std::uint64_t>(*mc.k * *mc.m));
        if (mc.stats.image_gen_calls != expected) {
          rep.violations.push_back(mc.mode + ": image_gen_calls " +
                                   std::to_string(mc.stats.image_gen_calls) + " != records*(1+k*m) " +
                                   std::to_string(expected));
        }
      }
      if (!iterative) iterative = &mc;
    }
  }
  if (iterative && one_pass) {
    if (one_pass->stats.scoring_calls() == 0) {
      rep.notes.push_back("scoring-call ratio " + iterative->mode + "/" + one_pass->mode +
                          " = inf: one-pass performs no scoring");
    } else {
      rep.notes.push_back("scoring-call ratio " + iterative->mode + "/" + one_pass->mode + " = " +
                          ratio_text(static_cast<double>(iterative->stats.scoring_calls()),
                                     static_cast<double>(one_pass->stats.scoring_calls())));
    }
    rep.notes.push_back("total-call ratio " + iterative->mode + "/" + one_pass->mode + " = " +
                        ratio_text(static_cast<double>(iterative->stats.total()),
                                   static_cast<double>(one_pass->stats.total())));
  }
  return rep;
}

std::string format_table(std::span<const TableRow> rows) {
  std::vector<std::vector<std::string>> cells = {
      {"dataset", "mode", "n", "TIFA", "VQA", "Average"}};
  for (const auto& r : rows) {
    cells.push_back({r.dataset, r.mode, std::to_string(r.n), format_fixed(r.mean_tifa, 3),
                     format_fixed(r.mean_vqa, 3), format_fixed(r.mean_average, 3)});
  }
  return render_columns(cells, 2);
}

json table_to_json(std::span<const TableRow> rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"dataset", r.dataset},
                   {"mode", r.mode},
                   {"n", r.n},
                   {"tifa", format_fixed(r.mean_tifa, 3)},
                   {"vqa", format_fixed(r.mean_vqa, 3)},
                   {"average", format_fixed(r.mean_average, 3)}});
  }
  return out;
}

std::string format_correlations(std::span<const CorrelationMatrix> matrices) {
  std::string out;
  for (const auto& m : matrices) {
    out += "scope: " + m.scope + " (n=" + std::to_string(m.n) + ")\n";
    out += render_columns({{"", "TIFA", "VQA"},
                           {"Text-Image Alignment", format_fixed(m.alignment_tifa, 4),
                            format_fixed(m.alignment_vqa, 4)},
                           {"Image Structure", format_fixed(m.structure_tifa, 4),
                            format_fixed(m.structure_vqa, 4)}},
                          1);
  }
  return out;
}

json correlations_to_json(std::span<const CorrelationMatrix> matrices) {
  json out = json::array();
  for (const auto& m : matrices) {
    out.push_back({{"scope", m.scope},
                   {"n", m.n},
                   {"alignment_tifa", format_fixed(m.alignment_tifa, 4)},
                   {"alignment_vqa", format_fixed(m.alignment_vqa, 4)},
                   {"structure_tifa", format_fixed(m.structure_tifa, 4)},
                   {"structure_vqa", format_fixed(m.structure_vqa, 4)}});
  }
  return out;
}

std::string format_cost_report(const CostReport& report) {
  std::vector<std::vector<std::string>> cells = {{"mode", "records"}};
  for (auto kind : kAllBackendKinds) cells[0].push_back(std::string(to_string(kind)));
  for (const auto& mc : report.modes) {
    std::vector<std::string> row = {mc.mode, std::to_string(mc.records)};
    for (auto kind : kAllBackendKinds) row.push_back(std::to_string(mc.stats[kind]));
    cells.push_back(std::move(row));
  }
  std::string out = render_columns(cells, 1);
  for (const auto& n : report.notes) out += n + "\n";
  for (const auto& v : report.violations) out += "VIOLATION " + v + "\n";
  return out;
}

json cost_report_to_json(const CostReport& report) {
  json modes = json::array();
  for (const auto& mc : report.modes) {
    json calls = json::object();
    for (auto kind : kAllBackendKinds) calls[std::string(to_string(kind))] = mc.stats[kind];
    json row = {{"mode", mc.mode},
                {"one_pass", mc.one_pass},
                {"records", mc.records},
                {"calls", calls}};
    if (mc.k) row["k"] = *mc.k;
    if (mc.m) row["m"] = *mc.m;
    modes.push_back(std::move(row));
  }
  return {{"modes", modes}, {"notes", report.notes}, {"violations", report.violations}};
}

}  // namespace fpa
