#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vdns/checks.hpp"
#include "vdns/cli.hpp"

namespace {

/// Collects `--key value` and `--key=value` pairs left over by the parser.
std::vector<std::pair<std::string, std::string>> overrides_from(std::vector<std::string> extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string arg = extras[i];
    if (arg.rfind("--", 0) != 0) throw vdns::ConfigError("unexpected argument '" + arg + "'");
    arg.erase(0, 2);
    const auto eq = arg.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(arg.substr(0, eq), arg.substr(eq + 1));
    } else {
      if (i + 1 >= extras.size()) throw vdns::ConfigError("missing value for --" + arg);
      out.emplace_back(arg, extras[++i]);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid variable-density Navier-Stokes solver"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run one simulation (extra --key value pairs override the config)");
  run->add_option("--config", config_path, "Config file");
  run->allow_extras();
  auto* study = app.add_subcommand("study", "Run a convergence study over refinement levels");
  study->add_option("--config", config_path, "Config file");
  study->allow_extras();
  auto* check = app.add_subcommand("check", "Run the invariant and property suite");
  std::uint64_t seed = vdns::CheckOptions{}.seed;
  check->add_option("--seed", seed, "Random seed");

  CLI11_PARSE(app, argc, argv);

  if (check->parsed()) {
    vdns::CheckOptions options;
    options.seed = seed;
    const auto results = vdns::run_property_suite(options);
    std::cout << vdns::format_check_table(results);
    std::size_t failed = 0;
    for (const auto& r : results) failed += r.passed ? 0 : 1;
    std::cout << (failed == 0 ? "all checks passed" : std::to_string(failed) + " checks failed")
              << '\n';
    return failed == 0 ? 0 : 1;
  }

  vdns::RunConfig config;
  try {
    const auto* sub = run->parsed() ? run : study;
    std::optional<std::filesystem::path> file;
    if (!config_path.empty()) file = config_path;
    config = vdns::load_config(file, overrides_from(sub->remaining()));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  if (run->parsed()) return vdns::run_single(config, std::cout);
  return vdns::run_convergence_study(config, std::cout).status;
}
