#include "fpi/vector_point.hpp"

#include <cmath>
#include <string>

#include "fpi/error.hpp"

namespace fpi {

VectorPoint::VectorPoint(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.empty()) {
    throw Error(ErrorKind::dimension_mismatch, "VectorPoint: dimension must be >= 1");
  }
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (!std::isfinite(coords_[i])) {
      throw Error(ErrorKind::non_finite,
                  "VectorPoint: coordinate " + std::to_string(i) + " is not finite");
    }
  }
}

VectorPoint::VectorPoint(std::initializer_list<double> coords)
    : VectorPoint(std::vector<double>(coords)) {}

VectorPoint VectorPoint::zeros(std::size_t dimension) {
  return VectorPoint(std::vector<double>(dimension, 0.0));
}

void require_same_dimension(const VectorPoint& a, const VectorPoint& b,
                            std::string_view context) {
  if (a.dimension() != b.dimension()) {
    throw Error(ErrorKind::dimension_mismatch,
                std::string(context) + ": dimension " + std::to_string(a.dimension()) +
                    " vs " + std::to_string(b.dimension()));
  }
}

double norm(const VectorPoint& x) {
  if (x.dimension() == 1) return std::abs(x[0]);
  double s = 0.0;
  for (double v : x.coords()) s += v * v;
  return std::sqrt(s);
}

double distance(const VectorPoint& a, const VectorPoint& b) {
  require_same_dimension(a, b, "distance");
  if (a.dimension() == 1) return std::abs(a[0] - b[0]);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

VectorPoint blend(const VectorPoint& a, const VectorPoint& b, double t) {
  require_same_dimension(a, b, "blend");
  std::vector<double> out(a.dimension());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::lerp(a[i], b[i], t);
  return VectorPoint(std::move(out));
}

}  // namespace fpi
