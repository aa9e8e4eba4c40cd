#pragma once

// Batch kernels. Each has an OpenMP path and a serial reference path; both
// write results into index-ordered slots, so their outputs are identical.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fpi/data_dependence.hpp"
#include "fpi/problem.hpp"
#include "fpi/schemes.hpp"

namespace fpi {

enum class Execution { serial, parallel };

struct RunRequest {
  const ContractionProblem* problem = nullptr;
  SchemeId scheme = SchemeId::Picard;
  ControlSchedule schedule = ControlSchedule::constant(0.5, 0.5, 0.5);
  VectorPoint x0{0.0};
  StopRule stop;
};

/// If any run throws, the exception of the lowest failing index is rethrown
/// after all runs finish.
[[nodiscard]] std::vector<IterationTrace> run_batch(std::span<const RunRequest> requests,
                                                    Execution exec);

struct DataDependenceRequest {
  const ContractionProblem* problem = nullptr;
  PerturbationSpec spec;
  ControlSchedule schedule = ControlSchedule::constant(0.5, 0.5, 0.5);
  VectorPoint x0{0.0};
  StopRule stop;
};

[[nodiscard]] std::vector<DataDependenceReport> data_dependence_batch(
    std::span<const DataDependenceRequest> requests, Execution exec);

struct ContractionSample {
  std::size_t pairs = 0;
  /// max over pairs of ||Tx - Ty|| - delta ||x - y||.
  double max_excess = 0.0;
  /// max_excess <= 1e-12.
  bool holds = true;
};

/// Samples pairs uniformly from the cube [-radius, radius]^d around the
/// fixed point (or the origin). Pair i is drawn from a stream keyed on
/// (seed, i), so the result does not depend on thread count.
[[nodiscard]] ContractionSample sample_contraction(const ContractionProblem& problem,
                                                   std::size_t pairs, std::uint64_t seed,
                                                   double radius, Execution exec);

/// max over sampled x of ||T x - T~ x||, same sampling as above.
[[nodiscard]] double sample_perturbation_sup(const ContractionProblem& base,
                                             const ContractionProblem& approx,
                                             std::size_t points, std::uint64_t seed,
                                             double radius, Execution exec);

}  // namespace fpi
