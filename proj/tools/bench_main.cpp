#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cts/bench.hpp"
#include "cts/bridge.hpp"

namespace {

cts::ExperimentConfig resolve_config(const std::string& config_path,
                                     const std::string& preset_name) {
  if (!config_path.empty() && !preset_name.empty()) {
    throw cts::ContractError("pass either --config or --preset, not both");
  }
  if (!config_path.empty()) return cts::load_config_file(config_path);
  if (!preset_name.empty()) {
    const cts::Preset* p = cts::find_preset(preset_name);
    if (!p) {
      throw cts::ContractError("unknown preset '" + preset_name +
                               "' (see `bench presets list`)");
    }
    return cts::parse_config_text(p->text, "preset:" + p->name);
  }
  throw cts::ContractError("a config is required: --config <file> or --preset <name>");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curriculum teacher benchmark"};
  app.require_subcommand(1);

  // --- run ---
  auto* run = app.add_subcommand("run", "run a campaign and write the metrics CSV");
  std::string run_config, run_preset, run_out, run_teacher;
  std::uint64_t run_budget = 0, run_seed = 0;
  int run_repeats = 0;
  bool have_seed = false;
  run->add_option("--config", run_config, "experiment config file");
  run->add_option("--preset", run_preset, "built-in config name");
  run->add_option("--budget", run_budget, "override: episodes per run");
  run->add_option("--repeats", run_repeats, "override: number of runs");
  run->add_option("--seed", run_seed, "override: base seed")
      ->each([&](const std::string&) { have_seed = true; });
  run->add_option("--teacher", run_teacher, "override: teacher name");
  run->add_option("--out", run_out, "output CSV path")->required();

  // --- presets ---
  auto* presets_cmd = app.add_subcommand("presets", "inspect built-in configs");
  presets_cmd->require_subcommand(1);
  auto* presets_list = presets_cmd->add_subcommand("list", "list preset names");
  auto* presets_show = presets_cmd->add_subcommand("show", "print a preset config");
  std::string show_name;
  presets_show->add_option("name", show_name, "preset name")->required();

  // --- serve ---
  auto* serve_cmd =
      app.add_subcommand("serve", "serve a teacher over the line protocol");
  std::string serve_teacher, serve_config;
  std::uint16_t serve_port = 0;
  bool have_port = false;
  serve_cmd->add_option("--teacher", serve_teacher, "teacher name")->required();
  serve_cmd->add_option("--config", serve_config, "experiment config file")->required();
  serve_cmd->add_option("--port", serve_port, "serve on 127.0.0.1:<port> instead of stdio")
      ->each([&](const std::string&) { have_port = true; });

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      cts::ExperimentConfig cfg = resolve_config(run_config, run_preset);
      if (run_budget > 0) cfg.budget = run_budget;
      if (run_repeats > 0) cfg.repeats = run_repeats;
      if (have_seed) cfg.base_seed = run_seed;
      if (!run_teacher.empty()) cfg.teacher = cts::teacher_kind_from_string(run_teacher);

      const cts::CampaignResult result = cts::run_campaign(cfg);
      cts::write_csv_file(run_out, result.runs);
      std::cout << cts::to_string(cfg.teacher) << ": " << cfg.repeats << " runs of "
                << cfg.budget << " episodes, final median unlocked fraction "
                << cts::format_double(result.final_median) << "\n";
    } else if (*presets_list) {
      for (const cts::Preset& p : cts::presets()) {
        std::cout << p.name << "\t" << p.summary << "\n";
      }
    } else if (*presets_show) {
      const cts::Preset* p = cts::find_preset(show_name);
      if (!p) throw cts::ContractError("unknown preset '" + show_name + "'");
      std::cout << p->text;
    } else if (*serve_cmd) {
      cts::ExperimentConfig cfg = cts::load_config_file(serve_config);
      const cts::TeacherKind kind = cts::teacher_kind_from_string(serve_teacher);
      cfg.validate();
      const cts::ParameterSpace space =
          cfg.space_lower.empty()
              ? cts::ParameterSpace::unit(static_cast<std::size_t>(cfg.env.dims()))
              : cts::ParameterSpace(cfg.space_lower, cfg.space_upper);
      const auto teacher = cts::make_teacher(kind, space, cfg.params, cfg.base_seed);
      if (have_port) {
        cts::TcpTransport transport(serve_port);
        std::cerr << "listening on 127.0.0.1:" << transport.port() << "\n";
        cts::serve(*teacher, transport);
      } else {
        cts::StdioTransport transport;
        cts::serve(*teacher, transport);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
