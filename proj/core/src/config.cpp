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

#include "mixsim/config.hpp"

#include <fstream>

#include "json_util.hpp"
#include "mixsim/error.hpp"

namespace mixsim {

using nlohmann::json;

std::int64_t GeneratorConfig::total_examples() const {
  if (counts.empty()) return num_examples;
  std::int64_t total = 0;
  for (const auto& [k, n] : counts) total += n;
  return total;
}

void GeneratorConfig::validate() const {
  if (dataset_label.empty()) throw Error("dataset_label", "must not be empty");
  if (manifest.empty()) throw Error("manifest", "missing manifest path");
  scenario.validate();
  environment.validate();
  if (rir_generator) rir_generator->validate();
  for (const auto& [k, n] : counts) {
    const std::string path = "counts." + std::to_string(k);
    if (k < 1) throw Error(path, "speaker count must be >= 1");
    if (n < 1) throw Error(path, "must be >= 1");
  }
  if (counts.empty() && num_examples < 1) throw Error("num_examples", "must be >= 1 when counts is absent");
}

GeneratorConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  using namespace detail;
  if (!doc.is_object()) throw Error("config", "expected an object");
  auto resolve = [&](const std::filesystem::path& p) { return p.is_relative() && !base_dir.empty() ? base_dir / p : p; };
  GeneratorConfig c;
  c.root_seed = value_or<std::uint64_t>(doc, "root_seed", c.root_seed, "");
  c.dataset_label = value_or<std::string>(doc, "dataset_label", c.dataset_label, "");
  if (has(doc, "manifest")) c.manifest = resolve(as<std::string>(doc["manifest"], "manifest"));
  c.scenario = scenario_from_json(require(doc, "scenario", ""), "scenario");
  if (has(doc, "environment")) c.environment = environment_from_json(doc["environment"], base_dir, "environment");
  if (has(doc, "rir_generator")) c.rir_generator = rir_config_from_json(doc["rir_generator"], "rir_generator");
  if (has(doc, "counts")) {
    const json& counts = doc["counts"];
    if (!counts.is_object()) throw Error("counts", "expected an object mapping speaker count to number of examples");
    for (const auto& [key, value] : counts.items()) {
      int k = 0;
      try {
        std::size_t used = 0;
        k = std::stoi(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        throw Error("counts." + key, "key must be an integer speaker count");
      }
      if (k < c.scenario.num_speakers_min || k > c.scenario.num_speakers_max) {
        throw Error("counts." + key, "speaker count outside scenario.num_speakers");
      }
      c.counts[k] = as<int>(value, "counts." + key);
    }
  }
  c.num_examples = value_or<int>(doc, "num_examples", c.num_examples, "");
  if (has(doc, "output_dir")) c.output_dir = resolve(as<std::string>(doc["output_dir"], "output_dir"));
  c.validate();
  return c;
}

GeneratorConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(path.string(), "cannot open config");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(path.string(), std::string("parse failure: ") + e.what());
  }
  return config_from_json(doc, path.parent_path());
}

json to_json(const GeneratorConfig& c) {
  json counts = json::object();
  for (const auto& [k, n] : c.counts) counts[std::to_string(k)] = n;
  json out = {{"root_seed", c.root_seed},
              {"dataset_label", c.dataset_label},
              {"manifest", c.manifest.string()},
              {"scenario", to_json(c.scenario)},
              {"environment", to_json(c.environment)},
              {"counts", counts},
              {"num_examples", c.num_examples},
              {"output_dir", c.output_dir.string()}};
  if (c.rir_generator) out["rir_generator"] = to_json(*c.rir_generator);
  return out;
}

}  // namespace mixsim
