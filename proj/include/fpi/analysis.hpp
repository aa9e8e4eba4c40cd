#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fpi/problem.hpp"
#include "fpi/schedule.hpp"
#include "fpi/schemes.hpp"

namespace fpi {

/// e_n = ||x_n - x*||.
[[nodiscard]] std::vector<double> error_sequence(const IterationTrace& trace,
                                                 const VectorPoint& x_star);

// ---------------------------------------------------------------------------
// Rate comparison of two null sequences.

enum class RateClass { first_faster, same_rate, second_faster, inconclusive };

[[nodiscard]] std::string_view to_string(RateClass c);

struct RateThresholds {
  double lower = 0.01;
  double upper = 100.0;
};

struct RateReport {
  /// errA_n / errB_n, truncated where errB first drops below 1e-300.
  std::vector<double> ratios;
  /// Median of the last quarter of `ratios`; NaN when nothing is left.
  double estimated_limit = 0.0;
  RateClass classification = RateClass::inconclusive;
};

/// Requires equal lengths >= 8. The limit of |a_n| / |b_n| is estimated from
/// the tail; l < lower means the first sequence is faster, l > upper the
/// second, anything between is the same rate.
[[nodiscard]] RateReport compare_rates(std::span<const double> err_a,
                                       std::span<const double> err_b,
                                       RateThresholds thresholds = {});

// ---------------------------------------------------------------------------
// Closed-form bounds for the KO and CR schemes.

struct BoundSequences {
  std::vector<double> exp_bound;  // e0 / exp((1 - delta) sum_{k<=n} alpha_k^1)
  std::vector<double> b_n;        // KO bound on e_{n+1}
  std::vector<double> a_n;        // CR bound on e_{n+1}
  std::vector<double> theta_n;    // a_n / b_n
  double theta_step_ratio = 0.0;  // theta_{n+1} / theta_n
};

/// Constant weights.
[[nodiscard]] BoundSequences theoretical_bounds(double e0, double delta, Alphas alphas,
                                                std::size_t count);

/// exp_bound uses the exact partial sums of alpha^1; a_n, b_n and theta_n use
/// the schedule's lower bounds, which must be positive.
[[nodiscard]] BoundSequences theoretical_bounds(double e0, double delta,
                                                const ControlSchedule& schedule,
                                                std::size_t count);

struct ThetaRatio {
  double ratio = 0.0;
  bool passes = false;  // ratio < 1
};

/// [1 - a1(1-d)][1 - a2 a3 (1-d)] / [1 - a1(1 - d(1 - a2 a3 (1-d)))].
///
/// Evaluated as 1 - a2 a3 (1-d)(1-a1) / denominator, which is the same
/// quantity and lands on exactly 1 at a1 = 1.
[[nodiscard]] ThetaRatio theta_ratio_test(double delta, Alphas alphas);

// ---------------------------------------------------------------------------
// Recurrence validators standing in for the two limit lemmas.

enum class LemmaKind {
  lemma1,  // a_{n+1} <= (1 - eta_n) a_n + rho_n,     rho_n / eta_n -> 0  =>  a_n -> 0
  lemma2,  // a_{n+1} <= (1 - mu_n) a_n + mu_n eta_n  =>  limsup a <= limsup eta
};

struct LemmaRecurrence {
  LemmaKind kind = LemmaKind::lemma1;
  std::vector<double> a;
  std::vector<double> coeff;    // eta_n (lemma1) or mu_n (lemma2)
  std::vector<double> forcing;  // rho_n (lemma1) or eta_n (lemma2)
};

struct LemmaCheckOptions {
  /// Partial sums of the coefficient must exceed this (finite stand-in for
  /// a divergent series).
  double partial_sum_threshold = 5.0;
  /// Absolute slack on each recurrence inequality.
  double slack = 1e-12;
  /// Fraction of trailing indices that count as the tail.
  double tail_fraction = 0.25;
};

struct LemmaVerdict {
  bool hypotheses_hold = false;
  bool conclusion_holds = false;
  std::optional<std::size_t> first_recurrence_failure;
  double coeff_partial_sum = 0.0;
  /// lemma1: tail max of a. lemma2: tail max of a minus tail max of eta.
  double tail_statistic = 0.0;
};

/// Finite-tail numeric evidence for the lemma, never a proof. Sequences must
/// have equal length >= 16, nonnegative entries and coefficients in (0, 1).
[[nodiscard]] LemmaVerdict lemma_recurrence_check(const LemmaRecurrence& r,
                                                  double tolerance,
                                                  LemmaCheckOptions options = {});

// ---------------------------------------------------------------------------
// Equivalence of KO and CR started from the same point.

struct EquivalenceReport {
  std::vector<double> gaps;  // ||p_n - u_n||
  /// g_{n+1} <= [1 - a1(1-d)] g_n + (1-a1)(2 + a2 d a3)(1+d) ||p_n - x*||
  bool ko_side_recurrence_holds = true;
  std::optional<std::size_t> ko_side_first_failure;
  /// g_{n+1} <= [1 - a1(1-d)] g_n + (1-a1) a2 d a3 (1+d) ||u_n - x*||
  bool cr_side_recurrence_holds = true;
  std::optional<std::size_t> cr_side_first_failure;
  /// (g_n, eta_n = a1(1-d), rho_n) ready for lemma_recurrence_check.
  LemmaRecurrence lemma1_data;
};

/// Both traces must come from the same problem, start, schedule and length.
[[nodiscard]] EquivalenceReport equivalence_gap(const IterationTrace& ko,
                                                const IterationTrace& cr,
                                                const ContractionProblem& problem);

/// First index n >= from with values[n] < threshold.
[[nodiscard]] std::optional<std::size_t> first_below(std::span<const double> values,
                                                     double threshold, std::size_t from = 0);

}  // namespace fpi
