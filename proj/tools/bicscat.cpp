// Command-line driver: bicscat <command> [--config PATH] [--preset NAME] [--out DIR] [--threads N]

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "bicscat/commands.hpp"
#include "bicscat/config.hpp"

namespace {

constexpr int kUsage = 1;
constexpr int kNumerical = 2;

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reaction-matrix scattering, BIC search and resonance poles for a theta-lattice"};
  std::string command;
  std::string config_path;
  std::string preset_name;
  std::string out_dir = "out";
  int threads = 0;
  bool dump = false;
  bool list = false;

  app.add_option("command", command, "one of: " + join(bicscat::command_names()))
      ->check(CLI::IsMember(bicscat::command_names()));
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--preset", preset_name, "bundled configuration, paper-fig1 ... paper-fig12");
  app.add_option("--out", out_dir, "output directory (created if missing)");
  app.add_option("--threads", threads, "worker threads; overrides the config")
      ->check(CLI::PositiveNumber);
  app.add_flag("--dump-config", dump, "print the resolved configuration and exit");
  app.add_flag("--list-presets", list, "list bundled presets and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  if (list) {
    for (const auto& name : bicscat::preset_names()) {
      std::cout << name << "  " << bicscat::preset(name).first << '\n';
    }
    return 0;
  }

  try {
    bicscat::RunConfig cfg;
    if (!preset_name.empty() && !config_path.empty()) {
      std::cerr << "error: --config and --preset are mutually exclusive\n";
      return kUsage;
    }
    if (!preset_name.empty()) {
      auto [preset_command, preset_cfg] = bicscat::preset(preset_name);
      cfg = preset_cfg;
      if (command.empty()) command = preset_command;
    } else if (!config_path.empty()) {
      cfg = bicscat::load_config(config_path);
    }
    if (threads > 0) cfg.threads = threads;
    cfg.validate();
    if (dump) {
      std::cout << bicscat::to_json(cfg);
      return 0;
    }
    if (command.empty()) {
      std::cerr << "error: no command given\n" << app.help();
      return kUsage;
    }

    const bicscat::CommandResult result = bicscat::run_command(command, cfg, out_dir);
    for (const auto& line : result.summary) std::cout << line << '\n';
    for (const auto& line : result.diagnostics) std::cerr << "note: " << line << '\n';
    for (const auto& file : result.outputs) std::cout << "wrote " << file << '\n';
    return result.ok ? 0 : kNumerical;
  } catch (const bicscat::InvalidConfig& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}
