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

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mixsim/error.hpp"
#include "mixsim/parallel.hpp"
#include "mixsim_cli/commands.hpp"

namespace {

using mixsim::cli::resolve_output;

template <typename T>
void set_if(const CLI::Option* option, std::optional<T>& target, const T& value) {
  if (option->count() > 0) target = value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixsim: multi-speaker mixture and meeting simulator"};
  app.require_subcommand(1);
  bool json_errors = false;
  unsigned workers = mixsim::default_workers();
  app.add_flag("--json", json_errors, "Report errors as a JSON object on stdout");
  app.add_option("--workers", workers, "Worker threads (default: available cores)")->check(CLI::PositiveNumber);

  std::uint64_t seed = 0;
  std::string manifest_path, output_path;

  mixsim::cli::SampleOptions sample;
  auto* sample_cmd = app.add_subcommand("sample", "Sample mixture descriptors from a config");
  sample_cmd->add_option("config", sample.config, "Generator config (JSON)")->required()->check(CLI::ExistingFile);
  auto* sample_seed = sample_cmd->add_option("--seed", seed, "Override root_seed");
  auto* sample_manifest = sample_cmd->add_option("--manifest", manifest_path, "Override the corpus manifest");
  auto* sample_output = sample_cmd->add_option("--output,-o", output_path, "Output directory");

  mixsim::cli::RenderOptions render;
  std::string inventory_path, encoding = "float32";
  auto* render_cmd = app.add_subcommand("render", "Render descriptors to audio");
  render_cmd->add_option("descriptors", render.descriptors, "Descriptor file")->required()->check(CLI::ExistingFile);
  render_cmd->add_option("--manifest,-m", render.manifest, "Corpus manifest")->required();
  auto* render_inventory = render_cmd->add_option("--inventory,-i", inventory_path, "RIR inventory directory");
  render_cmd->add_option("--output,-o", render.output, "Output directory")->required();
  render_cmd->add_flag("--intermediates", render.intermediates, "Also write per-entry sources, images and noise");
  render_cmd->add_option("--encoding", encoding, "float32 or pcm16")->check(CLI::IsMember({"float32", "pcm16"}));

  mixsim::cli::StatsOptions stats;
  std::string boundary = "vad", report_path, csv_path, rttm_path;
  auto* stats_cmd = app.add_subcommand("stats", "Measure overlap, silence and activity");
  stats_cmd->add_option("descriptors", stats.descriptors, "Descriptor file")->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--manifest,-m", stats.manifest, "Corpus manifest")->required();
  stats_cmd->add_option("--boundary", boundary, "recording or vad")->check(CLI::IsMember({"recording", "vad"}));
  stats_cmd->add_flag("--energy-vad", stats.energy_vad_fallback, "Measure missing vad_bounds from audio");
  auto* per_meeting = stats_cmd->add_flag("--per-meeting", stats.per_meeting, "Include per-meeting statistics");
  stats_cmd->add_flag("--aggregate", "Aggregate statistics only (default)")->excludes(per_meeting);
  stats_cmd->add_flag("--total-samples", stats.normalize_by_total_samples,
                      "Normalize by descriptor length instead of the last activity end");
  auto* stats_report = stats_cmd->add_option("--report", report_path, "Write the JSON report here");
  auto* stats_csv = stats_cmd->add_option("--csv", csv_path, "Write per-meeting activity intervals as CSV");
  auto* stats_rttm = stats_cmd->add_option("--rttm", rttm_path, "Write one RTTM file per meeting into this directory");

  mixsim::cli::RirOptions rir;
  int rooms = 0, positions = 0, mics = 0;
  auto* rir_cmd = app.add_subcommand("rir", "Build an image-method RIR inventory");
  rir_cmd->add_option("config", rir.config, "RIR generator config (JSON)")->required()->check(CLI::ExistingFile);
  rir_cmd->add_option("--output,-o", rir.output, "Inventory directory")->required();
  auto* rir_seed = rir_cmd->add_option("--seed", seed, "Override the generator seed");
  auto* rir_rooms = rir_cmd->add_option("--rooms", rooms, "Number of rooms")->check(CLI::PositiveNumber);
  auto* rir_positions = rir_cmd->add_option("--positions", positions, "Source positions per room")->check(CLI::PositiveNumber);
  auto* rir_mics = rir_cmd->add_option("--mics", mics, "Microphones per room")->check(CLI::PositiveNumber);

  mixsim::cli::ValidateOptions validate;
  auto* validate_cmd = app.add_subcommand("validate", "Check that manifest audio exists and matches");
  validate_cmd->add_option("manifest", validate.manifest, "Corpus manifest")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    nlohmann::json result;
    if (sample_cmd->parsed()) {
      sample.workers = workers;
      set_if(sample_seed, sample.seed, seed);
      set_if(sample_manifest, sample.manifest, std::filesystem::path(manifest_path));
      set_if(sample_output, sample.output, std::filesystem::path(output_path));
      result = mixsim::cli::cmd_sample(sample);
    } else if (render_cmd->parsed()) {
      render.workers = workers;
      set_if(render_inventory, render.inventory, std::filesystem::path(inventory_path));
      render.encoding = encoding == "pcm16" ? mixsim::SampleEncoding::kPcm16 : mixsim::SampleEncoding::kFloat32;
      result = mixsim::cli::cmd_render(render);
    } else if (stats_cmd->parsed()) {
      stats.workers = workers;
      stats.boundary = mixsim::boundary_mode_from_string(boundary);
      set_if(stats_report, stats.report, std::filesystem::path(report_path));
      set_if(stats_csv, stats.csv, std::filesystem::path(csv_path));
      set_if(stats_rttm, stats.rttm_dir, std::filesystem::path(rttm_path));
      result = mixsim::cli::cmd_stats(stats);
    } else if (rir_cmd->parsed()) {
      rir.workers = workers;
      set_if(rir_seed, rir.seed, seed);
      set_if(rir_rooms, rir.num_rooms, rooms);
      set_if(rir_positions, rir.positions_per_room, positions);
      set_if(rir_mics, rir.num_mics, mics);
      result = mixsim::cli::cmd_rir(rir);
    } else if (validate_cmd->parsed()) {
      result = mixsim::cli::cmd_validate(validate);
    }
    std::cout << result.dump(2) << '\n';
    return 0;
  } catch (const std::exception& e) {
    const auto* error = dynamic_cast<const mixsim::Error*>(&e);
    if (json_errors) {
      const nlohmann::json out = {{"error", {{"message", e.what()}, {"context", error ? error->context() : ""}}}};
      std::cout << out.dump(2) << '\n';
    } else {
      std::cerr << "mixsim: error: " << e.what() << '\n';
    }
    return 1;
  }
}
