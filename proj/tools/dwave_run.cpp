#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "dwave/errors.hpp"
#include "dwave/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Run a delayed-damping wave scenario and write CSV diagnostics."};
  std::string config_path;
  std::string preset;
  std::string out_dir = "out";
  int jobs = 1;
  bool export_ops = false;
  bool list = false;
  bool dry_run = false;
  app.add_option("--config", config_path, "key = value scenario file")->check(CLI::ExistingFile);
  app.add_option("--preset", preset, "built-in scenario name");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--jobs", jobs, "worker threads for resolvent sweeps")->check(CLI::PositiveNumber);
  app.add_flag("--export-operators", export_ops, "also write A.coo and G.coo");
  app.add_flag("--list-presets", list, "print preset names and exit");
  app.add_flag("--dry-run", dry_run, "print the resolved scenario and exit");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& name : dwave::preset_names()) std::cout << name << '\n';
    return 0;
  }
  if (config_path.empty() && preset.empty()) {
    std::cerr << "one of --config or --preset is required\n";
    return 1;
  }

  // Presets are applied before any other key, so appending keeps config line numbers intact.
  std::string text;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "cannot read " << config_path << '\n';
      return 1;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
    if (!text.empty() && text.back() != '\n') text += '\n';
  }
  if (!preset.empty()) text += "preset = " + preset + "\n";

  dwave::Scenario s;
  try {
    s = dwave::parse_scenario(text);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  if (dry_run) {
    std::cout << dwave::format_scenario(s);
    return 0;
  }
  dwave::RunOptions opt;
  opt.jobs = jobs;
  opt.export_operators = export_ops;
  opt.log = &std::cerr;
  return dwave::run_scenario(s, out_dir, opt);
}
