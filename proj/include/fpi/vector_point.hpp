#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace fpi {

/// A point of R^d with finite coordinates, d >= 1.
class VectorPoint {
 public:
  explicit VectorPoint(std::vector<double> coords);
  VectorPoint(std::initializer_list<double> coords);

  static VectorPoint zeros(std::size_t dimension);

  [[nodiscard]] std::size_t dimension() const noexcept { return coords_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return coords_[i]; }
  [[nodiscard]] std::span<const double> coords() const noexcept { return coords_; }

  friend bool operator==(const VectorPoint&, const VectorPoint&) = default;

 private:
  std::vector<double> coords_;
};

/// Throws Error(dimension_mismatch) naming `context` when dimensions differ.
void require_same_dimension(const VectorPoint& a, const VectorPoint& b,
                            std::string_view context);

/// Euclidean norm.
[[nodiscard]] double norm(const VectorPoint& x);

/// Euclidean distance ||a - b||.
[[nodiscard]] double distance(const VectorPoint& a, const VectorPoint& b);

/// Per-coordinate std::lerp(a_i, b_i, t), i.e. (1 - t) a + t b.
///
/// std::lerp is exact at t = 0 and t = 1 and returns a when a == b, so every
/// degenerate weight collapses the blend bit-exactly.
[[nodiscard]] VectorPoint blend(const VectorPoint& a, const VectorPoint& b,
                                double t);

}  // namespace fpi
