// Copyright 2026 The wsmom Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WSMOM_MANIFEST_HPP
#define WSMOM_MANIFEST_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace wsmom {

inline constexpr const char* kVersion = "1.0.0";

std::uint64_t fnv1a(std::string_view bytes);

/// Hash of the canonical serialization; object keys are sorted, so the value
/// does not depend on the order keys were written in.
std::string config_hash(const nlohmann::json& config);

/// Hex FNV-1a of a file's bytes, or empty when unreadable.
std::string file_hash(const std::string& path);

struct RunManifest {
  std::string subcommand;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> inputs;   // path, hash
  std::vector<std::pair<std::string, std::string>> outputs;  // path, hash
  double wall_clock_seconds = 0.0;

  void add_input(const std::string& path) { inputs.emplace_back(path, file_hash(path)); }
  void add_output(const std::string& path) { outputs.emplace_back(path, file_hash(path)); }
  nlohmann::json to_json() const;
  void write(const std::string& path) const;
};

}  // namespace wsmom

#endif  // WSMOM_MANIFEST_HPP
