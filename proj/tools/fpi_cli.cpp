// fpi: run experiment configs, re-emit reports from bundles, and check the
// built-in acceptance configs.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fpi/error.hpp"
#include "fpi/harness/acceptance.hpp"
#include "fpi/harness/config.hpp"
#include "fpi/harness/report.hpp"
#include "fpi/harness/runner.hpp"

namespace {

using namespace fpi;
using namespace fpi::harness;

int cmd_run(const std::string& source, std::optional<std::uint64_t> seed, const std::string& root,
            bool serial) {
  const ExperimentConfig config = load_config(source);
  RunOptions opt;
  opt.output_root = root.empty() ? output_root_from_env() : std::filesystem::path(root);
  opt.seed_override = seed;
  opt.execution = serial ? Execution::serial : Execution::parallel;
  const RunOutcome out = run_experiment(config, opt);
  std::cout << "bundle: " << out.bundle_dir.string() << "\n";
  for (const auto& r : out.summary.at("runs")) {
    std::cout << "  " << r.at("id").get<std::string>() << ": " << r.at("steps").get<long long>()
              << " steps, " << r.at("termination").get<std::string>();
    if (!r.at("final_error").is_null())
      std::cout << ", error " << format_number(r.at("final_error").get<double>());
    std::cout << "\n";
  }
  if (!out.ok()) {
    for (const auto& v : out.violations) std::cerr << "violation: " << v << "\n";
    return exit_bound_violation;
  }
  return exit_success;
}

int cmd_report(const std::string& bundle_dir, const std::string& format) {
  const auto f = parse_report_format(format);
  if (!f) throw Error(ErrorKind::config, "unknown report format '" + format + "'");
  const Bundle bundle = load_bundle(bundle_dir);
  for (const auto& p : emit_report(bundle, *f)) std::cout << p.string() << "\n";
  return exit_success;
}

int cmd_verify(bool serial) {
  const auto start = std::chrono::steady_clock::now();
  const auto results = verify_builtin(serial ? Execution::serial : Execution::parallel);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool all = true;
  std::printf("%-3s %-34s %-20s %-6s %s\n", "#", "criterion", "config", "result", "detail");
  for (const auto& r : results) {
    all = all && r.pass;
    std::printf("%-3d %-34s %-20s %-6s %s\n", r.number, r.title.c_str(), r.config.c_str(),
                r.pass ? "PASS" : "FAIL", r.detail.c_str());
  }
  std::printf("%s in %.2f s\n", all ? "all criteria pass" : "some criteria FAIL", secs);
  return all ? exit_success : exit_bound_violation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-point iteration experiments: schemes, bounds, rates and data dependence"};
  app.require_subcommand(1);

  std::string source, root;
  std::optional<std::uint64_t> seed;
  bool serial = false;
  auto* run = app.add_subcommand("run", "Run a config file or built-in config and write its bundle");
  run->add_option("config", source, "Config path or built-in name")->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--output-root", root, "Bundle root (default: $FPI_OUTPUT_ROOT or ./fpi-out)");
  run->add_flag("--serial", serial, "Use the serial reference kernels instead of OpenMP");

  std::string bundle, format;
  auto* report = app.add_subcommand("report", "Re-emit a view of a bundle after checking its hashes");
  report->add_option("bundle", bundle, "Bundle directory")->required();
  report->add_option("--format", format, "csv | json | svg")->required();

  auto* verify = app.add_subcommand("verify", "Run every built-in acceptance config");
  verify->add_flag("--serial", serial, "Use the serial reference kernels instead of OpenMP");

  auto* list = app.add_subcommand("list", "List built-in configs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_malformed_config;
  }

  try {
    if (*run) return cmd_run(source, seed, root, serial);
    if (*report) return cmd_report(bundle, format);
    if (*verify) return cmd_verify(serial);
    if (*list) {
      for (auto name : builtin_config_names()) std::cout << name << "\n";
      return exit_success;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_failure;
  }
  return exit_failure;
}
