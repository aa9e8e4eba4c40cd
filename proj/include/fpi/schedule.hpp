#pragma once

#include <array>
#include <cstddef>
#include <string>

namespace fpi {

/// The three control weights used by one step.
struct Alphas {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;

  friend bool operator==(const Alphas&, const Alphas&) = default;
};

enum class RuleKind {
  constant,             // alpha_n = c
  harmonic,             // alpha_n = 1 / (n + 1)
  harmonic_complement,  // alpha_n = 1 - 1 / (n + 2)
};

/// Closed-form rule for one component of a schedule. Every property below is
/// answered analytically, never by extrapolating sampled values.
struct ComponentRule {
  RuleKind kind = RuleKind::constant;
  double value = 0.0;  // only meaningful for RuleKind::constant

  [[nodiscard]] double at(std::size_t n) const;
  [[nodiscard]] double infimum() const;
  [[nodiscard]] bool series_diverges() const;
  /// sum_{k=0}^{n} alpha_k, exact finite sum.
  [[nodiscard]] double partial_sum(std::size_t n) const;

  friend bool operator==(const ComponentRule&, const ComponentRule&) = default;
};

class ControlSchedule {
 public:
  explicit ControlSchedule(std::array<ComponentRule, 3> components);

  static ControlSchedule constant(double c1, double c2, double c3);
  static ControlSchedule harmonic();
  static ControlSchedule harmonic_complement();

  [[nodiscard]] Alphas at(std::size_t n) const;
  [[nodiscard]] const ComponentRule& component(std::size_t i) const {
    return components_.at(i);
  }

  [[nodiscard]] bool is_constant() const;
  /// Component-wise infimum over n (the alpha_i lower bounds of the rate
  /// comparison theorem).
  [[nodiscard]] Alphas lower_bounds() const;

  /// sum alpha_n^1 = infinity.
  [[nodiscard]] bool alpha1_diverges() const;
  /// inf alpha_n^i > 0 for each i.
  [[nodiscard]] bool bounded_below() const;
  /// inf alpha_n^1 >= 1/2 and the series diverges.
  [[nodiscard]] bool admits_data_dependence() const;

  [[nodiscard]] std::string describe() const;

  friend bool operator==(const ControlSchedule&, const ControlSchedule&) = default;

 private:
  std::array<ComponentRule, 3> components_;
};

[[nodiscard]] Alphas schedule_eval(const ControlSchedule& schedule, std::size_t n);

}  // namespace fpi
