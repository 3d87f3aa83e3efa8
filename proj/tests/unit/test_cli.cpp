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


#include <doctest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "mixsim/environment.hpp"
#include "mixsim/error.hpp"
#include "mixsim_cli/commands.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int status = 0;
  std::string out;
};

Result run(const std::string& args) {
  const std::string command = std::string(MIXSIM_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  Result r;
  std::array<char, 4096> buffer{};
  for (std::size_t n; (n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0;) r.out.append(buffer.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path preset(const std::string& name) { return fs::path(MIXSIM_PRESET_DIR) / (name + ".json"); }

struct Workspace {
  fs::path dir = mixsim::testing::fresh_dir("cli");
  fs::path manifest = dir / "corpus" / "manifest.json";

  Workspace() {
    mixsim::testing::write_corpus(mixsim::testing::SyntheticCorpusSpec{8, 4, 8000, 1.0, 2.5, 0.1, 0.3, 5},
                                  dir / "corpus");
  }

  fs::path small_config(const std::string& name, json overrides = json::object()) const {
    json doc = json::parse(slurp(preset("medium_ov")));
    doc["scenario"]["num_speakers"] = {2, 3};
    doc["scenario"]["target_length"] = 8.0;
    doc["counts"] = {{"2", 2}, {"3", 1}};
    doc.merge_patch(overrides);
    const fs::path path = dir / (name + ".json");
    std::ofstream(path) << doc.dump(2);
    return path;
  }
};

const Workspace& workspace() {
  static const Workspace w;
  return w;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("sample is byte-identical across runs") {
  const auto& w = workspace();
  const auto a = w.dir / "sample_a", b = w.dir / "sample_b";
  REQUIRE(run("sample " + q(preset("medium_ov")) + " --manifest " + q(w.manifest) + " -o " + q(a)).status == 0);
  REQUIRE(run("--workers 3 sample " + q(preset("medium_ov")) + " --manifest " + q(w.manifest) + " -o " + q(b)).status ==
          0);
  CHECK(slurp(a / "descriptors.json") == slurp(b / "descriptors.json"));
  CHECK(mixsim::read_descriptors(a / "descriptors.json").size() == 64);
  const auto echo = json::parse(slurp(a / "config.json"));
  CHECK(echo.at("root_seed") == 0);
  CHECK(echo.at("manifest") == fs::absolute(w.manifest).string());

  const auto c = w.dir / "sample_c";
  REQUIRE(run("sample " + q(preset("medium_ov")) + " --seed 5 --manifest " + q(w.manifest) + " -o " + q(c)).status == 0);
  CHECK(slurp(a / "descriptors.json") != slurp(c / "descriptors.json"));
}

TEST_CASE("full overlap with a single example") {
  const auto& w = workspace();
  json doc = json::parse(slurp(preset("wsj0_2mix_style")));
  doc["counts"] = {{"2", 1}};
  doc["manifest"] = w.manifest.string();
  const fs::path path = w.dir / "full.json";
  std::ofstream(path) << doc.dump();
  mixsim::cli::SampleOptions o;
  o.config = path;
  o.output = w.dir / "full_out";
  const auto summary = mixsim::cli::cmd_sample(o);
  CHECK(summary.at("count") == 1);
  const auto d = mixsim::read_descriptors(w.dir / "full_out" / "descriptors.json");
  REQUIRE(d.size() == 1);
  REQUIRE(d[0].entries.size() == 2);
  CHECK(d[0].entries[0].offset == 0);
  CHECK(d[0].entries[1].offset == 0);
}

TEST_CASE("render writes mixtures, sidecars and intermediates") {
  const auto& w = workspace();
  const auto out = w.dir / "small";
  REQUIRE(run("sample " + q(w.small_config("small")) + " --manifest " + q(w.manifest) + " -o " + q(out)).status == 0);
  const auto r = run("render " + q(out / "descriptors.json") + " -m " + q(w.manifest) + " -o " + q(out / "audio") +
                     " --intermediates");
  REQUIRE(r.status == 0);
  CHECK(json::parse(r.out).at("rendered") == 3);
  const auto descriptors = mixsim::read_descriptors(out / "descriptors.json");
  for (const auto& d : descriptors) {
    char name[64];
    std::snprintf(name, sizeof(name), "wsj_meeting_%06lld", static_cast<long long>(d.example_index));
    CHECK(fs::exists(out / "audio" / (std::string(name) + ".wav")));
    const auto sidecar = json::parse(slurp(out / "audio" / (std::string(name) + ".json")));
    CHECK(mixsim::descriptor_from_json(sidecar.at("descriptor")) == d);
    for (std::size_t e = 0; e < d.entries.size(); ++e) {
      char image[32];
      std::snprintf(image, sizeof(image), "image_%03zu.wav", e);
      CHECK(fs::exists(out / "audio" / name / image));
    }
    CHECK(fs::exists(out / "audio" / name / "noise.wav"));
  }
  CHECK(fs::exists(out / "audio" / "render.json"));

  // Second render of the same descriptors is byte-identical.
  REQUIRE(run("--workers 2 render " + q(out / "descriptors.json") + " -m " + q(w.manifest) + " -o " +
              q(out / "audio2"))
              .status == 0);
  CHECK(slurp(out / "audio" / "wsj_meeting_000000.wav") == slurp(out / "audio2" / "wsj_meeting_000000.wav"));
}

TEST_CASE("reverberant descriptors without an inventory fail once") {
  const auto& w = workspace();
  auto d = mixsim::read_descriptors(w.dir / "sample_a" / "descriptors.json");
  d.resize(3);
  for (auto& x : d) {
    x.room = 0;
    for (auto& e : x.entries) e.rir = mixsim::RirRef{0, 0};
  }
  mixsim::write_descriptors(w.dir / "reverb.json", d);
  const auto r = run("--json render " + q(w.dir / "reverb.json") + " -m " + q(w.manifest) + " -o " +
                     q(w.dir / "reverb_out"));
  CHECK(r.status != 0);
  const auto err = json::parse(r.out).at("error");
  CHECK(err.at("message").get<std::string>().find("3 descriptor(s) reference RIRs") != std::string::npos);
  CHECK(!fs::exists(w.dir / "reverb_out" / "wsj_meeting_000000.wav"));
}

TEST_CASE("stats on the no-overlap preset report zero overlap") {
  const auto& w = workspace();
  const auto out = w.dir / "noov";
  REQUIRE(run("sample " + q(preset("no_ov")) + " --manifest " + q(w.manifest) + " -o " + q(out)).status == 0);
  const auto r = run("stats " + q(out / "descriptors.json") + " -m " + q(w.manifest) + " --boundary recording --rttm " +
                     q(out / "rttm") + " --csv " + q(out / "activity.csv") + " --report " + q(out / "report.json"));
  REQUIRE(r.status == 0);
  const auto report = json::parse(r.out);
  CHECK(report.at("aggregate").at("ov_rel").at("max") == 0.0);
  CHECK(report.at("aggregate").at("ov_rel").at("mean") == 0.0);
  CHECK(report.at("num_meetings") == 64);
  CHECK(json::parse(slurp(out / "report.json")) == report);
  CHECK(fs::exists(out / "rttm" / "wsj_meeting_000063.rttm"));
  CHECK(slurp(out / "activity.csv").rfind("meeting,speaker,", 0) == 0);

  const auto vad = json::parse(run("stats " + q(out / "descriptors.json") + " -m " + q(w.manifest) +
                                   " --per-meeting").out);
  CHECK(vad.at("boundary") == "vad");
  CHECK(vad.at("per_meeting").size() == 64);
}

TEST_CASE("rir builds the requested shape") {
  const auto& w = workspace();
  const auto out = w.dir / "rirs";
  const auto r = run("rir " + q(preset("sms_wsj_rirs")) + " -o " + q(out) + " --rooms 1 --positions 1 --mics 2");
  REQUIRE(r.status == 0);
  const auto summary = json::parse(r.out);
  CHECK(summary.at("shape") == json::array({1, 1, 2, 8000}));
  const auto inv = mixsim::load_inventory(out);
  CHECK(inv.rir(0, 0).num_channels() == 2);
  CHECK(fs::exists(out / "rir_config.json"));
}

TEST_CASE("validate reports missing audio") {
  const auto& w = workspace();
  CHECK(run("validate " + q(w.manifest)).status == 0);
  const auto broken = w.dir / "broken";
  fs::copy(w.dir / "corpus", broken, fs::copy_options::recursive);
  fs::remove(broken / "spk003" / "spk003_u001.wav");
  const auto r = run("--json validate " + q(broken / "manifest.json"));
  CHECK(r.status != 0);
  CHECK(r.out.find("spk003_u001.wav") != std::string::npos);
  CHECK_THROWS_WITH_AS(mixsim::cli::cmd_validate({broken / "manifest.json"}), doctest::Contains("spk003_u001"),
                       mixsim::Error);
}

TEST_CASE("config errors surface with field paths") {
  const auto& w = workspace();
  const auto bad = w.small_config("bad", {{"scenario", {{"overlap_range", {2, 1}}}}});
  const auto r = run("--json sample " + q(bad) + " --manifest " + q(w.manifest) + " -o " + q(w.dir / "bad_out"));
  CHECK(r.status == 1);
  const auto err = json::parse(r.out).at("error");
  CHECK(err.at("context").get<std::string>().find("scenario.overlap_range") != std::string::npos);
  CHECK(run("frobnicate").status != 0);
}

TEST_CASE("relative outputs go under the output root") {
  const auto& w = workspace();
  const auto root = w.dir / "root";
  ::setenv("MIXSIM_OUTPUT_ROOT", root.c_str(), 1);
  CHECK(mixsim::cli::resolve_output("x/y") == root / "x/y");
  CHECK(mixsim::cli::resolve_output("/abs") == fs::path("/abs"));
  ::unsetenv("MIXSIM_OUTPUT_ROOT");
  CHECK(mixsim::cli::resolve_output("x") == fs::path("x"));
}
