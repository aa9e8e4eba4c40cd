#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fpi/vector_point.hpp"

namespace fpi {

/// Dense square matrix, row-major.
class SquareMatrix {
 public:
  explicit SquareMatrix(std::size_t n, double fill = 0.0);
  static SquareMatrix from_rows(const std::vector<std::vector<double>>& rows);

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const {
    return data_[i * n_ + j];
  }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<double> data_;
};

/// T(x) = A x + b.
struct AffineContraction {
  SquareMatrix matrix;
  VectorPoint offset;

  /// Row-by-row sum of A_ij x_j in index order, then + b_i.
  [[nodiscard]] VectorPoint apply(const VectorPoint& x) const;
};

using MapRule = std::function<VectorPoint(const VectorPoint&)>;

/// A self-map of R^d with Lipschitz constant delta in (0, 1) in the
/// Euclidean norm. Immutable and cheap to copy.
class ContractionProblem {
 public:
  /// Wraps an arbitrary pure rule with an asserted Lipschitz constant.
  /// A supplied fixed point must satisfy ||T x* - x*|| <= 1e-12 max(1, ||x*||).
  static ContractionProblem from_rule(std::string name, std::size_t dimension,
                                      double lipschitz, MapRule rule,
                                      std::optional<VectorPoint> fixed_point);

  /// Affine problem whose delta is the computed operator norm of A and whose
  /// fixed point is (I - A)^{-1} b.
  static ContractionProblem affine(std::string name, AffineContraction map);

  [[nodiscard]] VectorPoint apply(const VectorPoint& x) const;

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] double lipschitz() const noexcept { return lipschitz_; }
  [[nodiscard]] const std::optional<VectorPoint>& fixed_point() const noexcept {
    return fixed_point_;
  }
  [[nodiscard]] const std::optional<AffineContraction>& affine_form() const noexcept {
    return affine_;
  }

 private:
  ContractionProblem() = default;

  std::string name_;
  std::size_t dimension_ = 0;
  double lipschitz_ = 0.0;
  std::shared_ptr<const MapRule> rule_;
  std::optional<VectorPoint> fixed_point_;
  std::optional<AffineContraction> affine_;
};

/// T(x); rejects mismatched dimension.
[[nodiscard]] VectorPoint apply_map(const ContractionProblem& problem,
                                    const VectorPoint& x);

/// Largest singular value of A. Exactly |a| when d = 1.
[[nodiscard]] double operator_norm(const SquareMatrix& a);

/// Solves (I - A) x = b directly. Rejects ||A|| >= 1.
[[nodiscard]] VectorPoint affine_fixed_point(const SquareMatrix& a,
                                             const VectorPoint& b);

/// Rejects ||A|| >= 1 with the computed norm in the message.
[[nodiscard]] ContractionProblem make_affine_contraction(const SquareMatrix& a,
                                                         const VectorPoint& b,
                                                         std::string name = "affine");

/// d = 1, T(x) = 0.5 x + 1, delta = 0.5, x* = 2.
[[nodiscard]] ContractionProblem standard_problem();

/// Scalar T(x) = a x + b.
[[nodiscard]] ContractionProblem scalar_affine(double a, double b);

/// d = 1, T(x) = cos(x) / 2 with delta = 1/2. The fixed point comes from a
/// Picard pre-solve run until successive iterates agree to 1e-14.
[[nodiscard]] ContractionProblem half_cosine_problem();

}  // namespace fpi
