// Command-line front end: synth / design / run / report.

#include "sfdi/harness.hpp"
#include "sfdi/serialization.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace sfdi;

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& args, const std::string& out_help) {
  cmd->add_option("--config", args.config, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed, "Override the config seed");
  cmd->add_option("--out", args.out, out_help)->required();
}

DesignBundle bundle_for(const PipelineConfig& cfg, const std::string& bundle_path) {
  if (!bundle_path.empty()) return bundle_from_json(read_json(bundle_path));
  return run_offline_design(cfg);
}

int run_stage(const char* stage, const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "sfdi " << stage << ": " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensor fault detection and isolation with reliability-weighted evidence fusion"};
  app.require_subcommand(1);

  CommonArgs synth_args;
  std::string synth_which = "validation";
  std::size_t synth_index = 0;
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset described in the config as CSV");
  add_common(synth, synth_args, "Output CSV");
  synth->add_option("--which", synth_which, "validation or train")->check(CLI::IsMember({"validation", "train"}));
  synth->add_option("--index", synth_index, "Training source index when --which train");

  CommonArgs design_args;
  auto* design = app.add_subcommand("design", "Offline design; writes the design bundle JSON");
  add_common(design, design_args, "Output bundle JSON");

  CommonArgs run_args;
  std::string run_bundle;
  auto* run = app.add_subcommand("run", "Online phase over every fault scenario; writes the report JSON");
  add_common(run, run_args, "Output report JSON");
  run->add_option("--bundle", run_bundle, "Design bundle (runs the design phase when omitted)")
      ->check(CLI::ExistingFile);

  CommonArgs report_args;
  std::string report_bundle;
  std::string report_scenario;
  auto* report = app.add_subcommand("report", "Online phase plus per-scenario series CSVs in a directory");
  add_common(report, report_args, "Output directory");
  report->add_option("--bundle", report_bundle, "Design bundle (runs the design phase when omitted)")
      ->check(CLI::ExistingFile);
  report->add_option("--scenario", report_scenario, "Scenario name (sensor name or fault_free); all when omitted");

  CLI11_PARSE(app, argc, argv);

  if (*synth) {
    return run_stage("synth", [&] {
      const auto cfg = load_config(synth_args.config, synth_args.seed);
      const DataSource* src = nullptr;
      if (synth_which == "validation") {
        if (!cfg.validation) throw std::invalid_argument("config has no validation source");
        src = &*cfg.validation;
      } else {
        if (synth_index >= cfg.train.size()) throw std::invalid_argument("--index out of range");
        src = &cfg.train[synth_index];
      }
      if (!src->synthetic) throw std::invalid_argument("selected source is not synthetic");
      save_dataset(synth_args.out, load_sources(cfg, {*src}).front());
    });
  }
  if (*design) {
    return run_stage("design", [&] {
      const auto cfg = load_config(design_args.config, design_args.seed);
      write_json(design_args.out, bundle_to_json(run_offline_design(cfg)));
    });
  }
  if (*run) {
    return run_stage("run", [&] {
      const auto cfg = load_config(run_args.config, run_args.seed);
      const auto bundle = bundle_for(cfg, run_bundle);
      const auto rep = run_scenarios(load_validation(cfg), bundle, cfg);
      write_json(run_args.out, report_to_json(rep));
    });
  }
  if (*report) {
    return run_stage("report", [&] {
      const auto cfg = load_config(report_args.config, report_args.seed);
      const auto bundle = bundle_for(cfg, report_bundle);
      const auto rep = run_scenarios(load_validation(cfg), bundle, cfg);
      if (!report_scenario.empty()) rep.scenario(report_scenario);
      const fs::path dir = report_args.out;
      fs::create_directories(dir);
      write_json(dir / "report.json", report_to_json(rep));
      for (const auto& s : rep.scenarios) {
        if (!report_scenario.empty() && s.name != report_scenario) continue;
        emit_series(rep, s.name, "detection", dir / (s.name + "_detection.csv"));
        emit_series(rep, s.name, "bbm", dir / (s.name + "_bbm.csv"));
        for (const auto& t : s.traces)
          emit_series(rep, s.name, "combined", dir / (s.name + "_combined_" + t.rule + ".csv"), t.rule);
        if (s.fault) emit_series(rep, s.name, "fault_mass", dir / (s.name + "_fault_mass.csv"));
      }
    });
  }
  return 0;
}
