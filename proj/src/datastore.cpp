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

#include "fpa/datastore.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <fstream>
#include <mutex>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "fpa/error.hpp"
#include "fpa/hashing.hpp"
#include "fpa/json_io.hpp"
#include "fpa/log.hpp"

namespace fpa {
namespace {

using nlohmann::json;

std::mutex& append_mutex() {
  static std::mutex m;
  return m;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

class FdGuard {
 public:
  explicit FdGuard(int fd) : fd_(fd) {}
  ~FdGuard() {
    if (fd_ >= 0) ::close(fd_);
  }
  FdGuard(const FdGuard&) = delete;
  FdGuard& operator=(const FdGuard&) = delete;
  int get() const { return fd_; }

 private:
  int fd_;
};

}  // namespace

std::string_view to_string(PromptFormat f) {
  return f == PromptFormat::kPlainLines ? "plain_lines" : "jsonl";
}

PromptFormat prompt_format_from_string(std::string_view s) {
  if (s == "plain_lines" || s == "plain" || s == "txt") return PromptFormat::kPlainLines;
  if (s == "jsonl") return PromptFormat::kJsonl;
  throw Error(ErrorCode::kInvalidArgument, "unknown prompt format '" + std::string(s) + "'");
}

PromptFormat guess_prompt_format(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".jsonl" || ext == ".json") ? PromptFormat::kJsonl : PromptFormat::kPlainLines;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot write " + path.string());
  }
}

std::vector<PromptRecord> load_prompts(const std::filesystem::path& path, PromptFormat format,
                                       std::string_view default_dataset) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kNotFound, "prompts file not found: " + path.string());
  }
  const auto lines = split_lines(read_file(path));
  const std::string now = utc_now_iso8601();
  std::vector<PromptRecord> out;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    if (trim(lines[i]).empty()) {
      log_warning(where + ": blank prompt skipped");
      continue;
    }
    PromptRecord rec;
    if (format == PromptFormat::kPlainLines) {
      rec.text = trim(lines[i]);
    } else {
      try {
        const json j = json::parse(lines[i]);
        if (!j.is_object()) throw Error(ErrorCode::kParse, "expected a JSON object");
        rec = j.get<PromptRecord>();
      } catch (const std::exception& e) {
        throw Error(ErrorCode::kParse, where + ": " + e.what());
      }
      if (trim(rec.text).empty()) {
        log_warning(where + ": blank prompt skipped");
        continue;
      }
    }
    if (rec.id.empty()) rec.id = std::to_string(i);
    if (rec.dataset.empty()) rec.dataset = std::string(default_dataset);
    if (rec.created_at.empty()) rec.created_at = now;
    if (!seen.insert(rec.id).second) {
      throw Error(ErrorCode::kValidation, where + ": duplicate prompt id '" + rec.id + "'");
    }
    out.push_back(std::move(rec));
  }
  if (out.empty()) throw Error(ErrorCode::kValidation, "no prompts in " + path.string());
  return out;
}

void save_prompts(const std::filesystem::path& path, std::span<const PromptRecord> prompts,
                  PromptFormat format) {
  std::string body;
  for (const auto& p : prompts) {
    if (format == PromptFormat::kPlainLines) {
      if (p.text.find('\n') != std::string::npos) {
        throw Error(ErrorCode::kInvalidArgument, "prompt " + p.id + " spans several lines");
      }
      body += p.text;
    } else {
      body += json(p).dump();
    }
    body += '\n';
  }
  write_file_atomic(path, body);
}

std::string serialize_record(const OptimizationRecord& record) {
  return json(record).dump();
}

void save_record(const std::filesystem::path& path, const OptimizationRecord& record) {
  const auto problems = validate_record(record);
  if (!problems.empty()) {
    std::string msg = "record " + record.prompt.id + " rejected:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw Error(ErrorCode::kValidation, msg);
  }
  const std::string line = serialize_record(record) + "\n";

  std::lock_guard lock(append_mutex());
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  FdGuard fd(::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644));
  if (fd.get() < 0) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  if (::flock(fd.get(), LOCK_EX) != 0) throw Error(ErrorCode::kIo, "cannot lock " + path.string());
  std::size_t done = 0;
  while (done < line.size()) {
    const auto n = ::write(fd.get(), line.data() + done, line.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::flock(fd.get(), LOCK_UN);
      throw Error(ErrorCode::kIo, "write failed on " + path.string());
    }
    done += static_cast<std::size_t>(n);
  }
  ::fsync(fd.get());
  ::flock(fd.get(), LOCK_UN);
}

LoadedRecords load_records(const std::filesystem::path& path) {
  LoadedRecords out;
  if (!std::filesystem::exists(path)) return out;
  const auto lines = split_lines(read_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    try {
      out.records.push_back(json::parse(lines[i]).get<OptimizationRecord>());
    } catch (const std::exception& e) {
      out.errors.push_back({i + 1, e.what()});
    }
  }
  return out;
}

bool truncate_partial_tail(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return false;
  const std::string bytes = read_file(path);
  if (bytes.empty() || bytes.back() == '\n') return false;
  const auto cut = bytes.find_last_of('\n');
  const std::size_t keep = cut == std::string::npos ? 0 : cut + 1;
  std::filesystem::resize_file(path, keep);
  log_warning("dropped an incomplete trailing line from " + path.string());
  return true;
}

std::vector<ExamplePair> select_pairs(std::span<const OptimizationRecord> records,
                                      const ExportOptions& opts) {
  std::vector<ExamplePair> out;
  std::unordered_set<std::string> seen;
  for (const auto& r : records) {
    ExamplePair p = example_pair_from(r);
    if (p.combined_gain < opts.min_gain) continue;
    if (opts.dedup && !seen.insert(p.original).second) continue;
    out.push_back(std::move(p));
  }
  return out;
}

std::string render_sft(std::span<const ExamplePair> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    out += json{{"prompt", p.original}, {"completion", p.optimized}}.dump();
    out += '\n';
  }
  return out;
}

std::string render_icl_pool(std::span<const ExamplePair> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    out += json(p).dump();
    out += '\n';
  }
  return out;
}

namespace {

std::size_t export_with(std::span<const OptimizationRecord> records, const ExportOptions& opts,
                        const std::filesystem::path& out,
                        std::string (*render)(std::span<const ExamplePair>)) {
  const auto pairs = select_pairs(records, opts);
  write_file_atomic(out, render(pairs));
  if (pairs.empty()) log_warning("export wrote 0 rows to " + out.string());
  return pairs.size();
}

}  // namespace

std::size_t export_sft(std::span<const OptimizationRecord> records, const ExportOptions& opts,
                       const std::filesystem::path& out) {
  return export_with(records, opts, out, &render_sft);
}

std::size_t export_icl_pool(std::span<const OptimizationRecord> records,
                            const ExportOptions& opts, const std::filesystem::path& out) {
  return export_with(records, opts, out, &render_icl_pool);
}

std::vector<ExamplePair> load_example_pool(const std::filesystem::path& path) {
  const auto lines = split_lines(read_file(path));
  std::vector<ExamplePair> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    try {
      out.push_back(json::parse(lines[i]).get<ExamplePair>());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

std::vector<ExamplePair> sample_examples(std::span<const ExamplePair> pool, std::size_t n,
                                         std::uint64_t seed) {
  if (n > pool.size()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot sample " + std::to_string(n) +
                                                 " examples from a pool of " +
                                                 std::to_string(pool.size()));
  }
  std::vector<std::size_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  SplitMix rng(seed);
  std::vector<ExamplePair> out;
  out.reserve(n);
  // Partial Fisher-Yates: the first n slots are the sample in draw order.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
    std::swap(idx[i], idx[j]);
    out.push_back(pool[idx[i]]);
  }
  return out;
}

}  // namespace fpa
