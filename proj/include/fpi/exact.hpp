#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <gmpxx.h>

#include "fpi/problem.hpp"
#include "fpi/schedule.hpp"
#include "fpi/schemes.hpp"

namespace fpi::exact {

/// Arbitrary-precision rational, always in lowest terms with positive
/// denominator.
using Rational = mpq_class;
using RationalVector = std::vector<Rational>;

/// Every finite double is a dyadic rational; the conversion is exact.
[[nodiscard]] Rational to_rational(double x);
/// Round to nearest double, ties to even.
[[nodiscard]] double to_nearest_double(const Rational& q);

[[nodiscard]] RationalVector to_rational(const VectorPoint& x);

/// Exact image of an affine map with double coefficients.
struct RationalAffine {
  std::size_t dim = 0;
  std::vector<Rational> matrix;  // row-major
  RationalVector offset;

  static RationalAffine from(const AffineContraction& map);
  [[nodiscard]] RationalVector apply(const RationalVector& x) const;
};

/// (I - A)^{-1} b by exact Gaussian elimination.
[[nodiscard]] RationalVector exact_fixed_point(const RationalAffine& map);

struct ExactTrace {
  SchemeId scheme;
  std::array<Rational, 3> alphas;
  std::vector<RationalVector> iterates;
};

/// N + 1 exact iterates with the same sub-step structure as the floating
/// schemes. Only constant schedules are accepted.
[[nodiscard]] ExactTrace exact_run(const RationalAffine& map, SchemeId scheme,
                                   const ControlSchedule& schedule,
                                   const RationalVector& x0, std::size_t n_steps);

/// ||x_n - x*|| rounded to double. The squared norm is exact; only the final
/// square root is floating.
[[nodiscard]] std::vector<double> exact_errors(const ExactTrace& trace,
                                               const RationalVector& x_star);

struct TraceComparison {
  double max_abs_gap = 0.0;
  bool pass = true;
  std::size_t worst_step = 0;
  std::size_t worst_coord = 0;
};

/// Max over steps and coordinates of |float - round(exact)|.
[[nodiscard]] TraceComparison compare_traces(const IterationTrace& floating,
                                             const ExactTrace& exact, double abs_tol);

}  // namespace fpi::exact
