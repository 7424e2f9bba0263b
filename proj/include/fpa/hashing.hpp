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

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace fpa {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

// Stable 64-bit string hash (FNV-1a); std::hash is not stable across builds.
std::uint64_t fnv1a64(std::string_view bytes);

std::uint64_t splitmix64(std::uint64_t x);

// Splittable seed derivation: child seeds depend only on the parent and the
// ordered labels, never on call order.
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> labels);
std::uint64_t derive_seed(std::uint64_t parent, std::string_view label);

// Small deterministic generator whose output is identical on every platform
// (unlike the std distributions).
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  // Uniform integer in [0, bound), bound > 0, without modulo bias.
  std::uint64_t below(std::uint64_t bound);
  // Uniform double in [0, 1).
  double unit();
  bool chance(double p) { return unit() < p; }

 private:
  std::uint64_t state_;
};

}  // namespace fpa
