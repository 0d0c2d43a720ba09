#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "tolreg/cli.hpp"

namespace {

struct Invocation {
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::vector<std::pair<std::string, std::string>> overrides;
};

void add_common_options(CLI::App* sub, Invocation& inv) {
  sub->add_option("--config", inv.config_path, "JSON config file with flat dotted keys");
  sub->add_option("--out", inv.out_dir, "output directory (default: $TOLREG_OUT_DIR or ./out)");
  for (const auto& key : tolreg::config_keys()) {
    sub->add_option_function<std::string>(
        "--" + key.name,
        [&inv, name = key.name](const std::string& raw) {
          inv.overrides.emplace_back(name, raw);
        },
        "override config key " + key.name);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tikhonov regularization with tolerances"};
  app.require_subcommand(1);

  Invocation inv;
  for (const std::string& name : tolreg::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    add_common_options(sub, inv);
    sub->callback([&inv, name] { inv.command = name; });
    if (name == "fourier") {
      sub->add_option_function<std::string>(
          "--eps",
          [&inv](const std::string& raw) { inv.overrides.emplace_back("fourier.eps", raw); },
          "shorthand for --fourier.eps");
      sub->add_option_function<std::string>(
          "--terms",
          [&inv](const std::string& raw) { inv.overrides.emplace_back("fourier.terms", raw); },
          "shorthand for --fourier.terms");
    }
  }
  app.get_subcommand("solve")->description("reconstruct one noisy realization");
  app.get_subcommand("sweep-eps")->description("error vs tolerance over repeated noise draws");
  app.get_subcommand("lcurve")->description("residual/penalty trade-off curve with corner detection");
  app.get_subcommand("morozov")->description("discrepancy-based choice of alpha");
  app.get_subcommand("rates")->description("error decay as the noise level shrinks");
  app.get_subcommand("fourier")->description("Fourier coefficients of a clipped sine");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Bad flags count as invalid configuration; --help stays a success.
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    tolreg::RunConfig config;
    if (!inv.config_path.empty())
      tolreg::load_config(config, tolreg::read_json(inv.config_path));
    for (const auto& [key, raw] : inv.overrides)
      tolreg::apply_override(config, key, raw);
    if (!inv.out_dir.empty()) config.out_dir = inv.out_dir;
    return tolreg::run_command(inv.command, config);
  } catch (const tolreg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
