#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpi/batch.hpp"
#include "fpi/error.hpp"
#include "fpi/harness/config.hpp"

namespace fpi::harness {

/// Process exit status of the CLI.
enum ExitCode : int {
  exit_success = 0,
  exit_failure = 1,
  exit_malformed_config = 2,
  exit_inadmissible_schedule = 3,
  exit_bound_violation = 4,
  exit_numeric_fault = 5,
  exit_io = 6,
};

[[nodiscard]] int exit_code_for(ErrorKind kind);

struct RunOptions {
  std::filesystem::path output_root = "fpi-out";
  bool write_outputs = true;
  std::optional<std::uint64_t> seed_override;
  Execution execution = Execution::parallel;
};

/// FPI_OUTPUT_ROOT if set and non-empty, else ./fpi-out.
[[nodiscard]] std::filesystem::path output_root_from_env();

struct RunOutcome {
  nlohmann::json summary;
  std::filesystem::path bundle_dir;
  /// Failed bound, recurrence or oracle assertions. Outputs are still written.
  std::vector<std::string> violations;

  [[nodiscard]] bool ok() const noexcept { return violations.empty(); }
};

/// Executes every run and analysis of the config. Runs go through the batch
/// kernels; the summary and files are assembled in run-id order, so the
/// bundle does not depend on thread scheduling.
[[nodiscard]] RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options);

/// Note attached to every rate report.
inline constexpr const char* kRateDirectionNote =
    "The abstract says the CR scheme converges faster than the KO scheme, while the statement "
    "of the rate theorem says {p_n} (KO) converges faster than {u_n} (CR). Its proof shows "
    "theta_n = a_n / b_n -> 0, i.e. the CR bound decays faster than the KO bound. The measured "
    "direction and both ratios are reported; the wording conflict is not adjudicated here. "
    "Bound ratios compare error bounds, not errors.";

}  // namespace fpi::harness
