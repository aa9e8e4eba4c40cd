#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "fpi/problem.hpp"
#include "fpi/schedule.hpp"
#include "fpi/vector_point.hpp"

namespace fpi {

enum class SchemeId {
  Picard,
  Mann,
  Ishikawa,
  Noor,
  SP,
  TwoStepMann,
  S,
  CR,
  KO,
  KOPerturbed,
};

inline constexpr std::array<SchemeId, 10> kAllSchemes = {
    SchemeId::Picard, SchemeId::Mann,        SchemeId::Ishikawa, SchemeId::Noor,
    SchemeId::SP,     SchemeId::TwoStepMann, SchemeId::S,        SchemeId::CR,
    SchemeId::KO,     SchemeId::KOPerturbed,
};

[[nodiscard]] std::string_view to_string(SchemeId id);
[[nodiscard]] std::optional<SchemeId> parse_scheme(std::string_view tag);
/// Number of schedule components the scheme reads (Picard reads none).
[[nodiscard]] int scheme_arity(SchemeId id);

// One step of each scheme. Sub-steps are evaluated in the fixed order
// innermost -> outermost; weights must lie in [0, 1].

[[nodiscard]] VectorPoint step_picard(const ContractionProblem& p, const VectorPoint& x);
[[nodiscard]] VectorPoint step_mann(const ContractionProblem& p, const VectorPoint& x,
                                    double a1);
[[nodiscard]] VectorPoint step_ishikawa(const ContractionProblem& p, const VectorPoint& x,
                                        double a1, double a2);
[[nodiscard]] VectorPoint step_two_step_mann(const ContractionProblem& p,
                                             const VectorPoint& x, double a1, double a2);
/// z = (1-a3)x + a3 Tx;  y = (1-a2)x + a2 Tz;  x+ = (1-a1)x + a1 Ty.
[[nodiscard]] VectorPoint step_noor_family(const ContractionProblem& p,
                                           const VectorPoint& x, Alphas a);
/// z = (1-a3)x + a3 Tx;  y = (1-a2)z + a2 Tz;  x+ = (1-a1)y + a1 Ty.
[[nodiscard]] VectorPoint step_sp_family(const ContractionProblem& p,
                                         const VectorPoint& x, Alphas a);
/// t = (1-a2)s + a2 Ts;  s+ = (1-a1)Ts + a1 Tt.
[[nodiscard]] VectorPoint step_s(const ContractionProblem& p, const VectorPoint& s,
                                 double a1, double a2);
/// y = (1-a3)u + a3 Tu;  v = (1-a2)Tu + a2 Ty;  u+ = (1-a1)v + a1 Tv.
[[nodiscard]] VectorPoint step_cr(const ContractionProblem& p, const VectorPoint& u,
                                  Alphas a);
/// r = (1-a3)p + a3 Tp;  q = (1-a2)Tp + a2 Tr;  p+ = (1-a1)Tp + a1 Tq.
[[nodiscard]] VectorPoint step_ko(const ContractionProblem& p, const VectorPoint& x,
                                  Alphas a);
/// step_ko with every T replaced by the approximate operator.
[[nodiscard]] VectorPoint step_ko_perturbed(const ContractionProblem& approx,
                                            const VectorPoint& x, Alphas a);

/// Dispatch on `id`; components beyond the scheme's arity are ignored.
[[nodiscard]] VectorPoint step(SchemeId id, const ContractionProblem& p,
                               const VectorPoint& x, Alphas a);

struct StopRule {
  std::size_t max_n = 200;
  /// Threshold on the true error when x* is known, else on the residual.
  /// Disabled when empty.
  std::optional<double> tolerance = 1e-10;
};

enum class Termination { reached_max_n, reached_tolerance };

[[nodiscard]] std::string_view to_string(Termination t);

struct IterationTrace {
  SchemeId scheme;
  ControlSchedule schedule;
  std::vector<VectorPoint> iterates;
  std::vector<double> errors;     // ||x_n - x*||; empty when x* is unknown
  std::vector<double> residuals;  // ||x_n - T x_n||
  Termination termination = Termination::reached_max_n;

  [[nodiscard]] std::size_t steps() const noexcept { return iterates.size() - 1; }
  [[nodiscard]] const VectorPoint& last() const { return iterates.back(); }
};

/// Iterates until the stop rule fires. A non-finite iterate throws
/// Error(numeric_fault) naming the step index.
[[nodiscard]] IterationTrace run_scheme(const ContractionProblem& problem, SchemeId scheme,
                                        const ControlSchedule& schedule,
                                        const VectorPoint& x0, const StopRule& stop);

}  // namespace fpi
