// Command-line front end: analyze single traces, batch-evaluate labeled
// directories, synthesize scenario traces, and render SVG charts.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <ctg/ctg.hpp>

namespace fs = std::filesystem;
using ctg::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAnalysisError = 1;
constexpr int kExitUsageError = 2;

struct BackendOptions {
  std::string backend = "rules";
  std::string mode = "multi";
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4.1";
  double timeout_s = 120.0;
  int max_retries = 1;
  std::string api_key_env = "CTG_API_KEY";
  std::string prompt_dir;

  void attach(CLI::App* cmd, bool with_mode = true) {
    cmd->add_option("--backend", backend, "Classification backend")
        ->check(CLI::IsMember({"rules", "remote"}))
        ->capture_default_str();
    if (with_mode)
      cmd->add_option("--mode", mode, "Agent topology")
          ->check(CLI::IsMember({"multi", "direct"}))
          ->capture_default_str();
    cmd->add_option("--base-url", base_url, "Chat-completion endpoint base URL")
        ->capture_default_str();
    cmd->add_option("--model", model, "Remote model name")->capture_default_str();
    cmd->add_option("--timeout", timeout_s, "Per-agent timeout in seconds")->capture_default_str();
    cmd->add_option("--max-retries", max_retries, "Retries on transport errors")
        ->capture_default_str();
    cmd->add_option("--api-key-env", api_key_env, "Environment variable holding the API key")
        ->capture_default_str();
    cmd->add_option("--prompt-dir", prompt_dir, "Directory overriding the bundled prompt bodies");
  }

  std::unique_ptr<ctg::AgentBackend> make_backend() const {
    if (backend == "rules") return std::make_unique<ctg::RuleEngineBackend>();
    ctg::RemoteConfig cfg;
    cfg.base_url = base_url;
    cfg.model = model;
    cfg.timeout_s = timeout_s;
    cfg.max_retries = max_retries;
    cfg.api_key_env = api_key_env;
    return std::make_unique<ctg::RemoteModelBackend>(cfg);
  }

  ctg::PipelineConfig pipeline_config() const {
    ctg::PipelineConfig cfg;
    if (!prompt_dir.empty()) cfg.prompt_dir = fs::path(prompt_dir);
    return cfg;
  }

  ctg::PipelineMode pipeline_mode() const {
    return mode == "direct" ? ctg::PipelineMode::DirectPrompt : ctg::PipelineMode::MultiAgent;
  }
};

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ctg::Error("cannot write " + path);
  out << text << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"CTG trace analysis: guideline feature agents with rule and chat-model backends"};
  app.require_subcommand(1);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Classify one trace CSV and print the JSON verdict");
  std::string analyze_csv, analyze_json_out, analyze_svg_out;
  BackendOptions analyze_backend;
  analyze->add_option("csv", analyze_csv, "Trace CSV (t_s,fhr_bpm,uc)")->required();
  analyze->add_option("--json", analyze_json_out, "Write the verdict JSON here instead of stdout");
  analyze->add_option("--svg", analyze_svg_out, "Also render the trace to this SVG file");
  analyze_backend.attach(analyze);

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a labeled trace directory");
  std::string eval_dir, eval_labels, eval_out;
  int eval_trials = 5;
  std::optional<int> eval_sample;
  bool eval_balanced = false;
  std::uint64_t eval_seed = 0;
  int eval_jobs = 1;
  BackendOptions eval_backend;
  eval->add_option("dir", eval_dir, "Directory of <record_id>.csv traces")->required();
  eval->add_option("--labels", eval_labels, "labels.csv with record_id,label")->required();
  eval->add_option("--trials", eval_trials, "Repeated trials")->capture_default_str();
  eval->add_option("--sample", eval_sample, "Per-trial sample size");
  eval->add_flag("--balanced", eval_balanced, "Sample half abnormal, half normal");
  eval->add_option("--seed", eval_seed, "Sampling seed")->capture_default_str();
  eval->add_option("--jobs", eval_jobs, "Parallel records")->capture_default_str();
  eval->add_option("--out", eval_out, "Write the report JSON here instead of stdout");
  eval_backend.attach(eval);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a trace from a scenario JSON");
  std::string synth_scenario, synth_out_dir;
  synth->add_option("--scenario", synth_scenario, "Scenario JSON file")->required();
  synth->add_option("--out", synth_out_dir, "Output directory")->required();

  // render
  auto* render = app.add_subcommand("render", "Render a trace CSV to SVG");
  std::string render_csv, render_out;
  int render_px_per_cm = 40;
  bool render_markers = false;
  render->add_option("csv", render_csv, "Trace CSV")->required();
  render->add_option("--out", render_out, "Output SVG path (default: <record_id>.svg)");
  render->add_option("--px-per-cm", render_px_per_cm, "Pixels per centimeter")
      ->capture_default_str();
  render->add_flag("--markers", render_markers, "Shade detected episodes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsageError;
  }

  try {
    if (*analyze) {
      const ctg::CtgRecord rec = ctg::load_csv(analyze_csv);
      const auto backend = analyze_backend.make_backend();
      const auto cfg = analyze_backend.pipeline_config();
      const auto overall =
          ctg::run_pipeline(rec, analyze_backend.pipeline_mode(), *backend, cfg);
      write_output(ctg::assessment_to_json(overall, rec.record_id).dump(2), analyze_json_out);
      if (!analyze_svg_out.empty()) {
        std::ofstream out(analyze_svg_out, std::ios::binary);
        if (!out) throw ctg::Error("cannot write " + analyze_svg_out);
        out << ctg::render_svg(rec, cfg.render);
      }
    } else if (*eval) {
      if (!fs::is_directory(eval_dir)) {
        std::cerr << "error: not a directory: " << eval_dir << "\n";
        return kExitUsageError;
      }
      if (!fs::exists(eval_labels)) {
        std::cerr << "error: labels file not found: " << eval_labels << "\n";
        return kExitUsageError;
      }
      const auto records = ctg::load_trace_dir(eval_dir);
      const auto labels = ctg::load_labels(eval_labels);
      const auto backend = eval_backend.make_backend();
      const auto cfg = eval_backend.pipeline_config();
      const auto mode = eval_backend.pipeline_mode();
      ctg::SamplerConfig sampling;
      sampling.sample_k = eval_sample;
      sampling.balanced = eval_balanced;
      sampling.seed = eval_seed;
      const ctg::RecordRunner runner = [&](const ctg::CtgRecord& r) {
        return ctg::run_pipeline(r, mode, *backend, cfg);
      };
      const auto report =
          ctg::evaluate(records, labels, eval_trials, sampling, runner, eval_jobs);
      write_output(ctg::report_to_json(report).dump(2), eval_out);
    } else if (*synth) {
      std::ifstream in(synth_scenario);
      if (!in) throw ctg::FileNotFoundError(synth_scenario);
      json doc;
      in >> doc;
      const ctg::Scenario scenario = ctg::scenario_from_json(doc);
      const auto [rec, gt] = ctg::generate(scenario);
      fs::create_directories(synth_out_dir);
      const fs::path dir(synth_out_dir);
      ctg::save_csv(rec, dir / (rec.record_id + ".csv"));
      std::ofstream truth(dir / (rec.record_id + ".truth.json"));
      truth << ctg::ground_truth_to_json(gt).dump(2) << "\n";
      // merge into labels.csv
      std::map<std::string, ctg::BinaryLabel> labels;
      if (fs::exists(dir / "labels.csv")) labels = ctg::load_labels(dir / "labels.csv");
      labels[rec.record_id] = gt.binary;
      std::ofstream labels_out(dir / "labels.csv");
      labels_out << "record_id,label\n";
      for (const auto& [id, label] : labels) labels_out << id << ',' << to_string(label) << "\n";
      std::cout << (dir / (rec.record_id + ".csv")).string() << "\n";
    } else if (*render) {
      const ctg::CtgRecord rec = ctg::load_csv(render_csv);
      if (render_out.empty()) render_out = rec.record_id + ".svg";
      ctg::RenderConfig cfg;
      cfg.px_per_cm = render_px_per_cm;
      cfg.episode_markers = render_markers;
      std::vector<ctg::Episode> episodes;
      if (render_markers) {
        const auto analysis = ctg::analyze_signals(rec);
        episodes = analysis.accelerations;
        episodes.insert(episodes.end(), analysis.decelerations.begin(),
                        analysis.decelerations.end());
        episodes.insert(episodes.end(), analysis.contractions.begin(),
                        analysis.contractions.end());
      }
      std::ofstream out(render_out, std::ios::binary);
      if (!out) throw ctg::Error("cannot write " + render_out);
      out << ctg::render_svg(rec, cfg, episodes);
    }
  } catch (const ctg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAnalysisError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAnalysisError;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
