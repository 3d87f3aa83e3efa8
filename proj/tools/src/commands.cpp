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

#include "mixsim_cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>

#include "mixsim/config.hpp"
#include "mixsim/corpus.hpp"
#include "mixsim/environment.hpp"
#include "mixsim/error.hpp"
#include "mixsim/generator.hpp"
#include "mixsim/parallel.hpp"
#include "mixsim/renderer.hpp"
#include "mixsim/rir.hpp"

namespace mixsim::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(path.string(), "cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(path.string(), std::string("parse failure: ") + e.what());
  }
}

void write_json(const fs::path& path, const json& value) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path.string(), "cannot open for writing");
  out << value.dump(2) << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path.string(), "cannot open for writing");
  out << text;
}

std::string mixture_name(const MixtureDescriptor& d) {
  char index[32];
  std::snprintf(index, sizeof(index), "%06lld", static_cast<long long>(d.example_index));
  return d.dataset_label + "_" + index;
}

std::string join_lines(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) out += "\n  " + item;
  return out;
}

Waveform mono(int sample_rate, std::vector<double> data) {
  Waveform w;
  w.sample_rate = sample_rate;
  w.channels.push_back(std::move(data));
  return w;
}

Waveform dense(const Segment& segment, int sample_rate, std::int64_t length) {
  Waveform w;
  w.sample_rate = sample_rate;
  for (std::size_t c = 0; c < segment.channels.size(); ++c) w.channels.push_back(segment.dense(c, length));
  return w;
}

}  // namespace

fs::path resolve_output(const fs::path& path) {
  if (path.is_absolute()) return path;
  if (const char* root = std::getenv("MIXSIM_OUTPUT_ROOT"); root != nullptr && *root != '\0') return fs::path(root) / path;
  return path;
}

json cmd_sample(const SampleOptions& options) {
  json doc = read_json(options.config);
  if (options.seed) doc["root_seed"] = *options.seed;
  if (options.manifest) doc["manifest"] = fs::absolute(*options.manifest).string();
  GeneratorConfig config = config_from_json(doc, options.config.parent_path());

  const CorpusManifest manifest = load_manifest(config.manifest);
  std::optional<InventoryShape> rooms;
  if (config.environment.reverb == ReverbKind::kSimulated) rooms = read_inventory_shape(config.environment.inventory);
  const Generator generator(config, manifest, rooms);
  const auto descriptors = generator.sample_all(options.workers);

  fs::path out_dir = options.output ? *options.output
                                    : (config.output_dir.empty() ? fs::path(config.dataset_label) : config.output_dir);
  out_dir = resolve_output(out_dir);
  fs::create_directories(out_dir);
  write_descriptors(out_dir / "descriptors.json", descriptors);
  write_json(out_dir / "config.json", to_json(config));
  return {{"descriptors", (out_dir / "descriptors.json").string()},
          {"count", descriptors.size()},
          {"dataset_label", config.dataset_label},
          {"root_seed", config.root_seed}};
}

json cmd_render(const RenderOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const auto descriptors = read_descriptors(options.descriptors);
  const CorpusManifest manifest = load_manifest(options.manifest);

  // Collect every problem first so a broken batch fails once, up front.
  std::vector<std::string> problems;
  std::size_t reverberant = 0;
  std::set<std::string> checked;
  for (const auto& d : descriptors) {
    bool uses_rir = false;
    for (const auto& e : d.entries) {
      uses_rir = uses_rir || e.rir.has_value();
      if (!checked.insert(e.utterance_id).second) continue;
      const UtteranceRecord* r = manifest.find(e.utterance_id);
      if (r == nullptr) {
        problems.push_back(mixture_name(d) + ": unknown utterance_id '" + e.utterance_id + "'");
      } else if (!fs::exists(manifest.resolve(*r))) {
        problems.push_back("missing audio file " + manifest.resolve(*r).string());
      }
    }
    if (uses_rir) ++reverberant;
  }
  std::optional<RoomInventory> inventory;
  if (reverberant > 0 && !options.inventory) {
    problems.push_back(std::to_string(reverberant) + " descriptor(s) reference RIRs but no inventory was given");
  }
  if (!problems.empty()) throw Error("render", "cannot render:" + join_lines(problems));
  if (options.inventory) inventory = load_inventory(*options.inventory);

  const fs::path out_dir = resolve_output(options.output);
  fs::create_directories(out_dir);
  write_json(out_dir / "render.json",
             {{"descriptors", fs::absolute(options.descriptors).string()},
              {"manifest", fs::absolute(options.manifest).string()},
              {"inventory", options.inventory ? json(fs::absolute(*options.inventory).string()) : json(nullptr)},
              {"intermediates", options.intermediates},
              {"encoding", options.encoding == SampleEncoding::kPcm16 ? "pcm16" : "float32"}});

  std::vector<double> seconds(descriptors.size(), 0.0);
  parallel_for(descriptors.size(), options.workers, [&](std::size_t i) {
    const auto& d = descriptors[i];
    const RenderedMixture r = render_mixture(d, manifest, inventory ? &*inventory : nullptr);
    const std::string name = mixture_name(d);
    write_audio(out_dir / (name + ".wav"), r.mixture, options.encoding);
    json files = {{"mixture", name + ".wav"}};
    if (options.intermediates) {
      const fs::path dir = out_dir / name;
      fs::create_directories(dir);
      json sources = json::array(), images = json::array();
      for (std::size_t e = 0; e < r.images.size(); ++e) {
        char stem[32];
        std::snprintf(stem, sizeof(stem), "%03zu", e);
        write_audio(dir / ("source_" + std::string(stem) + ".wav"),
                    mono(r.sample_rate, r.sources[e].dense(0, r.length)), options.encoding);
        write_audio(dir / ("image_" + std::string(stem) + ".wav"), dense(r.images[e], r.sample_rate, r.length),
                    options.encoding);
        sources.push_back(name + "/source_" + stem + ".wav");
        images.push_back(name + "/image_" + stem + ".wav");
      }
      write_audio(dir / "noise.wav", r.noise, options.encoding);
      files["sources"] = std::move(sources);
      files["images"] = std::move(images);
      files["noise"] = name + "/noise.wav";
    }
    write_json(out_dir / (name + ".json"), {{"descriptor", to_json(d)},
                                            {"render",
                                             {{"length", r.length},
                                              {"reference_power", r.reference_power},
                                              {"noise_floor_used", r.noise_floor_used},
                                              {"files", std::move(files)}}}});
    seconds[i] = static_cast<double>(r.length) / r.sample_rate;
  });

  double audio = 0.0;
  for (double s : seconds) audio += s;
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return {{"rendered", descriptors.size()},
          {"audio_seconds", audio},
          {"elapsed_seconds", elapsed},
          {"output", out_dir.string()}};
}

json cmd_stats(const StatsOptions& options) {
  const auto descriptors = read_descriptors(options.descriptors);
  const CorpusManifest manifest = load_manifest(options.manifest);
  std::vector<MeetingStats> stats(descriptors.size());
  std::vector<ActivitySegments> segments(descriptors.size());
  parallel_for(descriptors.size(), options.workers, [&](std::size_t i) {
    ActivityOptions a;
    a.mode = options.boundary;
    a.energy_vad_fallback = options.energy_vad_fallback;
    if (options.normalize_by_total_samples) a.total_length = descriptors[i].render_length();
    segments[i] = activity_from_descriptor(descriptors[i], manifest, a);
    stats[i] = meeting_stats(segments[i]);
  });

  std::vector<double> ov, sil, conc, utts;
  json per_meeting = json::array();
  for (std::size_t i = 0; i < stats.size(); ++i) {
    ov.push_back(stats[i].ov_rel);
    sil.push_back(stats[i].sil_rel);
    conc.push_back(stats[i].max_concurrency);
    utts.push_back(static_cast<double>(stats[i].num_utterances));
    if (options.per_meeting) {
      json m = to_json(stats[i]);
      m["name"] = mixture_name(descriptors[i]);
      m["example_index"] = descriptors[i].example_index;
      per_meeting.push_back(std::move(m));
    }
  }
  json report = {{"descriptors", fs::absolute(options.descriptors).string()},
                 {"boundary", std::string(to_string(options.boundary))},
                 {"normalization", options.normalize_by_total_samples ? "total_samples" : "last_activity_end"},
                 {"std_convention", "population"},
                 {"num_meetings", descriptors.size()},
                 {"aggregate",
                  {{"ov_rel", to_json(summarize(ov))},
                   {"sil_rel", to_json(summarize(sil))},
                   {"max_concurrency", to_json(summarize(conc))},
                   {"num_utterances", to_json(summarize(utts))}}}};
  if (options.per_meeting) report["per_meeting"] = std::move(per_meeting);

  if (options.csv) {
    std::string csv = "meeting,speaker,start_sample,end_sample,start_s,end_s\n";
    char line[512];
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const auto& s = segments[i];
      for (std::size_t k = 0; k < s.speakers.size(); ++k) {
        for (const auto& [a, b] : s.intervals[k]) {
          std::snprintf(line, sizeof(line), "%s,%s,%lld,%lld,%.4f,%.4f\n", mixture_name(descriptors[i]).c_str(),
                        s.speakers[k].c_str(), static_cast<long long>(a), static_cast<long long>(b),
                        static_cast<double>(a) / s.sample_rate, static_cast<double>(b) / s.sample_rate);
          csv += line;
        }
      }
    }
    write_text(resolve_output(*options.csv), csv);
  }
  if (options.rttm_dir) {
    const fs::path dir = resolve_output(*options.rttm_dir);
    fs::create_directories(dir);
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const std::string name = mixture_name(descriptors[i]);
      write_text(dir / (name + ".rttm"), export_rttm(segments[i], name));
    }
  }
  if (options.report) write_json(resolve_output(*options.report), report);
  return report;
}

json cmd_rir(const RirOptions& options) {
  const json doc = read_json(options.config);
  const bool nested = doc.is_object() && doc.contains("rir_generator");
  json section = nested ? doc["rir_generator"] : doc;
  if (options.seed) section["seed"] = *options.seed;
  if (options.num_rooms) section["num_rooms"] = *options.num_rooms;
  if (options.positions_per_room) section["positions_per_room"] = *options.positions_per_room;
  if (options.num_mics) section["num_mics"] = *options.num_mics;
  const RirGeneratorConfig config = rir_config_from_json(section, nested ? "rir_generator" : "rir");

  const RoomInventory inventory = build_inventory(config, options.workers);
  const fs::path out_dir = resolve_output(options.output);
  save_inventory(out_dir, inventory);
  write_json(out_dir / "rir_config.json", to_json(config));
  json t60 = json::array();
  for (const auto& room : inventory.rooms) t60.push_back(room.t60);
  return {{"output", out_dir.string()},
          {"shape", {inventory.rooms.size(), inventory.positions_per_room, inventory.num_mics, inventory.rir_length}},
          {"t60", std::move(t60)}};
}

json cmd_validate(const ValidateOptions& options) {
  const CorpusManifest manifest = load_manifest(options.manifest);
  const auto problems = validate_audio(manifest);
  if (!problems.empty()) {
    throw Error(options.manifest.string(),
                std::to_string(problems.size()) + " problem(s):" + join_lines(problems));
  }
  return {{"manifest", options.manifest.string()},
          {"utterances", manifest.utterances().size()},
          {"speakers", manifest.speakers().size()},
          {"ok", true}};
}

}  // namespace mixsim::cli
