// Copyright 2026 The mixsim Authors
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "mixsim/environment.hpp"
#include "mixsim/patterns.hpp"
#include "mixsim/rir.hpp"

namespace mixsim {

struct GeneratorConfig {
  std::uint64_t root_seed = 0;
  std::string dataset_label = "mixsim";
  std::filesystem::path manifest;
  ScenarioConfig scenario;
  EnvironmentConfig environment;
  std::optional<RirGeneratorConfig> rir_generator;  // used by `rir` when no inventory exists yet
  std::map<int, int> counts;  // speaker count -> number of examples
  int num_examples = 0;       // used when counts is empty; speaker count drawn per example
  std::filesystem::path output_dir;

  std::int64_t total_examples() const;
  void validate() const;
};

// Relative paths are resolved against base_dir (normally the config file's
// directory).
GeneratorConfig config_from_json(const nlohmann::json& document, const std::filesystem::path& base_dir = {});
GeneratorConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const GeneratorConfig& config);

}  // namespace mixsim
