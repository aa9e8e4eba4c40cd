#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "fpi/analysis.hpp"
#include "fpi/problem.hpp"
#include "fpi/schedule.hpp"
#include "fpi/schemes.hpp"

namespace fpi {

enum class PerturbationMode { constant_shift, seeded_bounded };

[[nodiscard]] std::string_view to_string(PerturbationMode m);

/// How an approximate operator T~ departs from T, with sup ||T x - T~ x|| <= epsilon.
struct PerturbationSpec {
  double epsilon = 0.0;
  PerturbationMode mode = PerturbationMode::constant_shift;
  std::optional<VectorPoint> shift;  // constant_shift only
  std::uint64_t seed = 0;            // seeded_bounded only

  static PerturbationSpec constant_shift(VectorPoint c, double epsilon);
  static PerturbationSpec seeded_bounded(std::uint64_t seed, double epsilon);
};

/// T~(x) = T(x) + offset(x).
///
/// constant_shift on an affine problem yields the affine problem (A, b + c),
/// whose fixed point (I - A)^{-1}(b + c) is known. seeded_bounded adds
///   eps * s * u * sin(omega <w, x> + phi)
/// with unit u, w, s in [1/2, 1] and omega * eps <= (1 - delta) / 2, all drawn
/// from the seed, so T~ is a deterministic contraction with sup-offset <= eps.
[[nodiscard]] ContractionProblem make_approximate_operator(const ContractionProblem& problem,
                                                           const PerturbationSpec& spec);

/// 5 eps / (1 - delta).
[[nodiscard]] double data_dependence_bound(double epsilon, double delta);

struct DataDependenceReport {
  double epsilon = 0.0;
  double delta = 0.0;
  double bound = 0.0;
  double observed_gap = 0.0;  // ||x* - x~*||
  double margin = 0.0;        // bound - observed_gap
  /// ||(I - A)^{-1} c|| for constant shifts of affine problems.
  std::optional<double> analytic_gap;
  /// ||p_{n+1} - p~_{n+1}|| <= [1 - a1(1-d)] ||p_n - p~_n|| + a1(1-d) bound, within 1e-12.
  bool recurrence_holds = true;
  std::optional<std::size_t> first_recurrence_failure;
  std::size_t steps = 0;
  /// (||p_n - p~_n||, mu_n = a1(1-d), eta_n = bound) for the lemma2 validator.
  LemmaRecurrence lemma2_data;
};

/// Runs KO on T and on T~ from x0. x~* is the perturbed run's final iterate at
/// tolerance 1e-12; the unperturbed run is taken to the same length. Rejects
/// schedules with inf alpha^1 < 1/2 or a convergent alpha^1 series before running.
[[nodiscard]] DataDependenceReport data_dependence_experiment(
    const ContractionProblem& problem, const PerturbationSpec& spec,
    const ControlSchedule& schedule, const VectorPoint& x0, const StopRule& stop);

}  // namespace fpi
