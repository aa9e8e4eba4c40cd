#pragma once

// Declarative experiment configs. A config is one JSON document; the schema
// is documented in configs/README.md and enforced here, including rejection
// of unknown fields.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fpi/data_dependence.hpp"
#include "fpi/problem.hpp"
#include "fpi/schedule.hpp"
#include "fpi/schemes.hpp"

namespace fpi::harness {

struct ProblemSpec {
  std::string id;
  /// "affine" (matrix + offset) or "nonlinear" (a named built-in map).
  std::string kind;
  std::vector<std::vector<double>> matrix;
  std::vector<double> offset;
  std::string builtin;  // nonlinear only: "half_cosine"
  std::optional<std::vector<double>> x0;
};

struct ScheduleSpec {
  std::string family;  // constant | harmonic | harmonic_complement
  std::array<double, 3> values{0.0, 0.0, 0.0};
};

enum class Analysis { bounds, rates, equivalence, datadep, lemmas, oracle, reductions, theta_grid };

[[nodiscard]] std::string_view to_string(Analysis a);

struct RatesSpec {
  SchemeId first = SchemeId::CR;
  SchemeId second = SchemeId::KO;
  /// Steps per sequence; the comparison ignores the stop tolerance.
  std::size_t horizon = 80;
};

struct DataDepSpec {
  std::vector<double> epsilons{0.1};
  /// Experiments per (problem, schedule, epsilon, mode).
  std::size_t seeds = 1;
  std::vector<PerturbationMode> modes{PerturbationMode::constant_shift};
  std::size_t max_n = 5000;
  /// Explicit constant shift; when absent each seed draws one with norm <= epsilon.
  std::optional<std::vector<double>> shift;
};

struct OracleSpec {
  std::size_t steps = 50;
  double tolerance = 1e-12;
};

struct ReductionsSpec {
  std::size_t steps = 50;
  std::vector<std::vector<double>> starts;
  std::vector<Alphas> weights;
};

struct ThetaGridSpec {
  std::vector<double> deltas;
  std::vector<double> alpha1;
  std::vector<std::pair<double, double>> alpha23;
};

struct PerturbationConfig {
  double epsilon = 0.0;
  std::vector<double> shift;
};

struct ExperimentConfig {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<ProblemSpec> problems;
  std::vector<SchemeId> schemes;
  std::vector<ScheduleSpec> schedules;
  std::vector<double> x0;
  StopRule stop;
  std::set<Analysis> analyses;
  RatesSpec rates;
  DataDepSpec datadep;
  OracleSpec oracle;
  ReductionsSpec reductions;
  ThetaGridSpec theta_grid;
  /// Operator used by KOPerturbed runs; absent means T itself.
  std::optional<PerturbationConfig> perturbation;
  std::string output_dir;

  [[nodiscard]] bool wants(Analysis a) const { return analyses.contains(a); }
};

/// Throws Error(config) on malformed input and Error(inadmissible_schedule)
/// when a requested analysis cannot apply to a configured schedule.
[[nodiscard]] ExperimentConfig parse_config(std::string_view text);

/// Reads `source` as a file path, or as the name of a built-in config when no
/// such file exists.
[[nodiscard]] ExperimentConfig load_config(const std::string& source);

[[nodiscard]] std::vector<std::string_view> builtin_config_names();
[[nodiscard]] std::optional<std::string_view> builtin_config_text(std::string_view name);

[[nodiscard]] ControlSchedule to_schedule(const ScheduleSpec& spec);
[[nodiscard]] ContractionProblem build_problem(const ProblemSpec& spec);
/// The problem's own start if given, else the config-wide one.
[[nodiscard]] VectorPoint start_for(const ExperimentConfig& config, const ProblemSpec& spec);

}  // namespace fpi::harness
