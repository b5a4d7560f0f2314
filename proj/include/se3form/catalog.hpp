// Copyright 2026 The se3form Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Built-in scenarios. The JSON sources live in scenarios/ and are embedded
// at configure time.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "se3form/error.hpp"
#include "se3form/scenario.hpp"

namespace se3form {

struct CatalogEntry {
  std::string_view name;
  std::string_view json;
};

inline constexpr CatalogEntry kBuiltinCatalog[] = {
#include "se3form/builtin_scenarios.inc"
};

inline std::vector<std::string> builtin_names() {
  std::vector<std::string> out;
  for (const auto& e : kBuiltinCatalog) out.emplace_back(e.name);
  return out;
}

inline bool is_builtin(std::string_view name) {
  for (const auto& e : kBuiltinCatalog) {
    if (e.name == name) return true;
  }
  return false;
}

/// Loads a catalog scenario, honoring SE3FORM_SEED.
inline Scenario builtin_scenario(std::string_view name) {
  for (const auto& e : kBuiltinCatalog) {
    if (e.name == name) {
      Scenario s = parse_scenario(e.json);
      apply_seed_override(s);
      return s;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown built-in scenario " + std::string(name));
}

/// A catalog name, or else a path to a scenario file.
inline Scenario resolve_scenario(const std::string& name_or_path) {
  return is_builtin(name_or_path) ? builtin_scenario(name_or_path) : load_scenario(name_or_path);
}

}  // namespace se3form
