#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <ctg/csv.hpp>
#include <ctg/synth.hpp>

#include "helpers.hpp"

using namespace ctg;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string stdout_text;
};

CliResult run_cli(const std::string& args, const std::filesystem::path& capture_dir) {
  const auto out_path = capture_dir / "stdout.txt";
  const std::string cmd =
      std::string(CTG_CLI_PATH) + " " + args + " > " + out_path.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.stdout_text = test::read_file(out_path);
  return r;
}

void write_scenario(const std::filesystem::path& path, const Scenario& s) {
  std::ofstream out(path);
  out << scenario_to_json(s).dump(2) << "\n";
}

}  // namespace

TEST_CASE("cli: analyze prints a JSON verdict and exits 0") {
  test::TempDir dir("cli_analyze");
  const auto scenario = test::sample_scenario(31);
  const auto [rec, gt] = generate(scenario);
  save_csv(rec, dir.path / "t.csv");

  const auto r = run_cli("analyze " + (dir.path / "t.csv").string() + " --backend rules", dir.path);
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(r.stdout_text);
  CHECK(doc["record_id"] == "t");
  CHECK(doc["overall"]["class"] == to_string(gt.overall_class));
  CHECK(doc["features"].size() == 5);
}

TEST_CASE("cli: analyze --svg writes the rendering") {
  test::TempDir dir("cli_svg");
  const auto [rec, gt] = generate(test::sample_scenario(32));
  save_csv(rec, dir.path / "t.csv");
  const auto svg_path = dir.path / "t.svg";
  const auto r = run_cli(
      "analyze " + (dir.path / "t.csv").string() + " --svg " + svg_path.string(), dir.path);
  REQUIRE(r.exit_code == 0);
  const std::string svg = test::read_file(svg_path);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("<svg") != std::string::npos);
}

TEST_CASE("cli: analyze on a missing file exits 1") {
  test::TempDir dir("cli_missing");
  const auto r = run_cli("analyze /nonexistent.csv", dir.path);
  CHECK(r.exit_code == 1);
}

TEST_CASE("cli: bad flags exit 2") {
  test::TempDir dir("cli_badflag");
  const auto r = run_cli("analyze t.csv --backend nonsense", dir.path);
  CHECK(r.exit_code == 2);
}

TEST_CASE("cli: synth then eval over a labeled directory") {
  test::TempDir dir("cli_synth_eval");
  const auto traces = dir.path / "traces";

  int n_scenarios = 0;
  for (std::uint64_t seed : {101ULL, 102ULL, 103ULL, 104ULL}) {
    auto s = test::sample_scenario(seed);
    s.record_id = "s" + std::to_string(seed);
    write_scenario(dir.path / "scenario.json", s);
    const auto r = run_cli("synth --scenario " + (dir.path / "scenario.json").string() + " --out " +
                               traces.string(),
                           dir.path);
    REQUIRE(r.exit_code == 0);
    ++n_scenarios;
  }
  REQUIRE(std::filesystem::exists(traces / "labels.csv"));
  const auto labels = load_labels(traces / "labels.csv");
  CHECK(static_cast<int>(labels.size()) == n_scenarios);

  const auto r = run_cli("eval " + traces.string() + " --labels " +
                             (traces / "labels.csv").string() + " --trials 5",
                         dir.path);
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.stdout_text);
  CHECK(report["trials"] == 5);
  CHECK(report["n_records"] == n_scenarios);
  CHECK(report["per_trial"].size() == 5);
  // the rules backend recovers synthetic ground truth
  CHECK(report["mean_accuracy"] == doctest::Approx(1.0));
}

TEST_CASE("cli: eval without labels.csv exits 2 with a diagnostic") {
  test::TempDir dir("cli_nolabels");
  std::filesystem::create_directories(dir.path / "traces");
  const auto r = run_cli(
      "eval " + (dir.path / "traces").string() + " --labels " + (dir.path / "traces/labels.csv").string(),
      dir.path);
  CHECK(r.exit_code == 2);
}

TEST_CASE("cli: render writes an SVG") {
  test::TempDir dir("cli_render");
  const auto [rec, gt] = generate(test::sample_scenario(33));
  save_csv(rec, dir.path / "t.csv");
  const auto r = run_cli("render " + (dir.path / "t.csv").string() + " --out " +
                             (dir.path / "out.svg").string() + " --markers",
                         dir.path);
  REQUIRE(r.exit_code == 0);
  CHECK(test::read_file(dir.path / "out.svg").find("<svg") != std::string::npos);
}

TEST_CASE("cli: render defaults the output name to <record_id>.svg") {
  test::TempDir dir("cli_render_default");
  const auto [rec, gt] = generate(test::sample_scenario(34));
  save_csv(rec, dir.path / "trace34.csv");
  const std::string cmd = "cd " + dir.path.string() + " && " + CTG_CLI_PATH + " render " +
                          (dir.path / "trace34.csv").string() + " >/dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(std::filesystem::exists(dir.path / "trace34.svg"));
}

TEST_CASE("cli: synth --sample --balanced protocol shape on a labeled set") {
  test::TempDir dir("cli_balanced");
  const auto traces = dir.path / "traces";
  std::filesystem::create_directories(traces);
  // 6 normal + 6 abnormal records, written directly
  std::ostringstream labels;
  labels << "record_id,label\n";
  for (int i = 0; i < 12; ++i) {
    Scenario s;
    s.record_id = (i < 6 ? "n" : "a") + std::to_string(i);
    s.baseline_bpm = i < 6 ? 140 : 90;  // abnormal via pathological baseline
    s.variability = {10, 4};
    s.accelerations.push_back({200, 40, 25, EpisodeShape::Trapezoid});
    s.accelerations.push_back({700, 40, 25, EpisodeShape::Trapezoid});
    const auto [rec, gt] = generate(s);
    save_csv(rec, traces / (s.record_id + ".csv"));
    labels << s.record_id << "," << to_string(gt.binary) << "\n";
  }
  test::write_file(traces / "labels.csv", labels.str());

  const auto r = run_cli("eval " + traces.string() + " --labels " +
                             (traces / "labels.csv").string() +
                             " --trials 2 --sample 8 --balanced --seed 3",
                         dir.path);
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.stdout_text);
  CHECK(report["n_records"] == 8);
  for (const auto& trial : report["per_trial"]) {
    int abnormal = 0;
    for (const auto& rec : trial["records"]) abnormal += rec["label"] == "abnormal";
    CHECK(abnormal == 4);
  }
}
