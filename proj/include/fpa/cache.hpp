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

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fpa/backends.hpp"

namespace fpa {

// Canonical compact serialisation: sorted keys, no insignificant whitespace.
std::string canonical_json(const nlohmann::json& value);

struct CacheKey {
  std::string hex;  // lowercase SHA-256

  // Hash over (kind, model id, canonical payload).
  static CacheKey of(BackendKind kind, std::string_view model_id, const nlohmann::json& payload);

  bool operator==(const CacheKey&) const = default;
};

// Content-addressed store of backend responses: one JSON file per key under
// `root/<first two hex chars>/<hex>.json`. Safe for concurrent readers and
// writers across threads and processes (writes go through rename).
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path root);

  std::optional<nlohmann::json> get(const CacheKey& key) const;
  void put(const CacheKey& key, const nlohmann::json& value,
           const nlohmann::json& request = nullptr) const;

  std::filesystem::path path_for(const CacheKey& key) const;
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

// Serves repeated requests from `cache`; only misses reach `inner`.
BackendSet with_response_cache(const BackendSet& inner, std::shared_ptr<ResponseCache> cache);

}  // namespace fpa
