// chunktune: forward modeling, RTM migration, chunk-size auto-tuning,
// scheduler benchmarking and analytical validation from one binary.

#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "chunktune/cli.hpp"
#include "chunktune/config.hpp"
#include "chunktune/io.hpp"

namespace {

chunktune::RunConfig build_config(const std::string& config_path,
                                  const std::vector<std::string>& overrides) {
  chunktune::RunConfig cfg;
  if (!config_path.empty()) cfg = chunktune::load_config_file(config_path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got: " + kv);
    chunktune::apply_config_line(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CSA-tuned chunked loop scheduling for 3D RTM"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_path, "key = value config file");
  app.add_option("-s,--set", overrides, "override a config key (key=value)");

  auto* model_cmd = app.add_subcommand("model", "synthesize shot seismograms");
  auto* migrate_cmd = app.add_subcommand("migrate", "run the migration");
  auto* tune_cmd = app.add_subcommand("tune", "auto-tune the dynamic chunk size");
  auto* bench_cmd = app.add_subcommand("bench", "compare schedulers");
  auto* validate_cmd =
      app.add_subcommand("validate", "compare against the analytical solution");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const chunktune::RunConfig cfg = build_config(config_path, overrides);
    if (model_cmd->parsed()) chunktune::cmd_model(cfg);
    if (migrate_cmd->parsed()) chunktune::cmd_migrate(cfg);
    if (tune_cmd->parsed()) chunktune::cmd_tune(cfg);
    if (bench_cmd->parsed()) chunktune::cmd_bench(cfg);
    if (validate_cmd->parsed()) chunktune::cmd_validate(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const chunktune::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
