#include "fpi/problem.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "fpi/error.hpp"

namespace fpi {

namespace {

constexpr double kFixedPointTol = 1e-12;

Eigen::MatrixXd to_eigen(const SquareMatrix& a) {
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      m(i, j) = a(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  return m;
}

void require_contractive(double norm_value) {
  if (!(norm_value < 1.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "operator norm " << norm_value << " is not below 1";
    throw Error(ErrorKind::not_contractive, os.str());
  }
}

}  // namespace

SquareMatrix::SquareMatrix(std::size_t n, double fill) : n_(n), data_(n * n, fill) {
  if (n == 0) throw Error(ErrorKind::dimension_mismatch, "SquareMatrix: size must be >= 1");
}

SquareMatrix SquareMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  SquareMatrix m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) {
      throw Error(ErrorKind::dimension_mismatch, "SquareMatrix: row " + std::to_string(i) +
                                                     " has " + std::to_string(rows[i].size()) +
                                                     " entries, expected " +
                                                     std::to_string(rows.size()));
    }
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (!std::isfinite(rows[i][j]))
        throw Error(ErrorKind::non_finite, "SquareMatrix: non-finite entry");
      m(i, j) = rows[i][j];
    }
  }
  return m;
}

VectorPoint AffineContraction::apply(const VectorPoint& x) const {
  const std::size_t n = matrix.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += matrix(i, j) * x[j];
    out[i] = s + offset[i];
  }
  return VectorPoint(std::move(out));
}

ContractionProblem ContractionProblem::from_rule(std::string name, std::size_t dimension,
                                                 double lipschitz, MapRule rule,
                                                 std::optional<VectorPoint> fixed_point) {
  if (dimension == 0)
    throw Error(ErrorKind::dimension_mismatch, "problem dimension must be >= 1");
  if (!(lipschitz > 0.0 && lipschitz < 1.0)) {
    throw Error(ErrorKind::not_contractive,
                "lipschitz constant must lie in (0, 1), got " + std::to_string(lipschitz));
  }
  if (!rule) throw Error(ErrorKind::invalid_argument, "problem rule is empty");

  ContractionProblem p;
  p.name_ = std::move(name);
  p.dimension_ = dimension;
  p.lipschitz_ = lipschitz;
  p.rule_ = std::make_shared<const MapRule>(std::move(rule));
  if (fixed_point) {
    if (fixed_point->dimension() != dimension)
      throw Error(ErrorKind::dimension_mismatch, "fixed point dimension mismatch");
    const double residual = distance(p.apply(*fixed_point), *fixed_point);
    if (residual > kFixedPointTol * std::max(1.0, norm(*fixed_point))) {
      throw Error(ErrorKind::invalid_argument,
                  "declared fixed point has residual " + std::to_string(residual));
    }
    p.fixed_point_ = std::move(fixed_point);
  }
  return p;
}

ContractionProblem ContractionProblem::affine(std::string name, AffineContraction map) {
  if (map.matrix.size() != map.offset.dimension())
    throw Error(ErrorKind::dimension_mismatch, "affine map: matrix and offset sizes differ");
  const double delta = operator_norm(map.matrix);
  require_contractive(delta);
  VectorPoint x_star = affine_fixed_point(map.matrix, map.offset);
  const std::size_t d = map.matrix.size();
  // A constant map is a contraction for every delta; keep delta inside (0, 1).
  const double lipschitz = std::max(delta, std::numeric_limits<double>::min());
  auto shared = std::make_shared<const AffineContraction>(map);
  ContractionProblem p = from_rule(
      std::move(name), d, lipschitz,
      [shared](const VectorPoint& x) { return shared->apply(x); }, std::move(x_star));
  p.affine_ = std::move(map);
  return p;
}

VectorPoint ContractionProblem::apply(const VectorPoint& x) const {
  if (x.dimension() != dimension_) {
    throw Error(ErrorKind::dimension_mismatch,
                "apply_map: point has dimension " + std::to_string(x.dimension()) +
                    ", problem '" + name_ + "' has " + std::to_string(dimension_));
  }
  VectorPoint y = (*rule_)(x);
  if (y.dimension() != dimension_)
    throw Error(ErrorKind::dimension_mismatch, "apply_map: rule changed the dimension");
  return y;
}

VectorPoint apply_map(const ContractionProblem& problem, const VectorPoint& x) {
  return problem.apply(x);
}

double operator_norm(const SquareMatrix& a) {
  if (a.size() == 1) return std::abs(a(0, 0));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(a));
  return svd.singularValues()(0);
}

VectorPoint affine_fixed_point(const SquareMatrix& a, const VectorPoint& b) {
  if (a.size() != b.dimension())
    throw Error(ErrorKind::dimension_mismatch, "affine_fixed_point: size mismatch");
  require_contractive(operator_norm(a));
  const std::size_t n = a.size();
  if (n == 1) return VectorPoint{b[0] / (1.0 - a(0, 0))};

  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                                static_cast<Eigen::Index>(n)) -
                      to_eigen(a);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) rhs(static_cast<Eigen::Index>(i)) = b[i];
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  Eigen::VectorXd x = lu.solve(rhs);
  // One refinement pass recovers the last bits lost in the factorization.
  x += lu.solve(rhs - m * x);
  return VectorPoint(std::vector<double>(x.data(), x.data() + x.size()));
}

ContractionProblem make_affine_contraction(const SquareMatrix& a, const VectorPoint& b,
                                           std::string name) {
  return ContractionProblem::affine(std::move(name), AffineContraction{a, b});
}

ContractionProblem scalar_affine(double a, double b) {
  std::ostringstream name;
  name << "affine(" << a << "x+" << b << ")";
  return make_affine_contraction(SquareMatrix::from_rows({{a}}), VectorPoint{b}, name.str());
}

ContractionProblem standard_problem() {
  return make_affine_contraction(SquareMatrix::from_rows({{0.5}}), VectorPoint{1.0},
                                 "standard");
}

ContractionProblem half_cosine_problem() {
  auto rule = [](const VectorPoint& x) { return VectorPoint{std::cos(x[0]) / 2.0}; };
  // Picard pre-solve: |x_k - x*| <= delta/(1-delta) |x_k - x_{k-1}| = |x_k - x_{k-1}|.
  double x = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double next = std::cos(x) / 2.0;
    const bool done = std::abs(next - x) <= 1e-14;
    x = next;
    if (done) break;
  }
  return ContractionProblem::from_rule("half_cosine", 1, 0.5, rule, VectorPoint{x});
}

}  // namespace fpi
