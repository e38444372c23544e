#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qctl/cli/config.hpp"
#include "qctl/cli/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Quadratic control of quantum stochastic flows"};
  app.require_subcommand(1);
  app.set_version_flag("--version", qctl::cli::kVersion);

  std::string config_path, out_dir;
  for (const std::string& kind : qctl::cli::kinds()) {
    CLI::App* sub = app.add_subcommand(kind, "run a " + kind + " experiment");
    sub->add_option("--config", config_path, "experiment configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides the config's \"output\")");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  const std::string kind = app.get_subcommands().front()->get_name();

  qctl::cli::ExperimentConfig cfg;
  try {
    cfg = qctl::cli::load_config(config_path, kind);
  } catch (const qctl::Error& e) {
    std::cerr << qctl::cli::detail::error_line("validation", e.what()) << '\n';
    return qctl::cli::kValidationFailure;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << qctl::cli::detail::error_line("validation", std::string("config: ") + e.what()) << '\n';
    return qctl::cli::kValidationFailure;
  }
  return qctl::cli::run(cfg, out_dir.empty() ? cfg.output : out_dir, std::cerr);
}
