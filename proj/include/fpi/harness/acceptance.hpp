#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "fpi/harness/runner.hpp"

namespace fpi::harness {

struct CriterionResult {
  int number = 0;
  std::string title;
  std::string config;
  bool pass = false;
  std::string detail;
};

/// Judges one criterion from the summary of its built-in config.
[[nodiscard]] CriterionResult judge_criterion(int number, const nlohmann::json& summary);

/// Runs each built-in acceptance config in memory and judges it.
/// A config that throws yields a failing result carrying the message.
[[nodiscard]] std::vector<CriterionResult> verify_builtin(Execution exec = Execution::parallel);

/// Built-in config name for criterion 1..9.
[[nodiscard]] std::string criterion_config(int number);

}  // namespace fpi::harness
