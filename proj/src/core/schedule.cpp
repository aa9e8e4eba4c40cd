#include "fpi/schedule.hpp"

#include <sstream>

#include "fpi/error.hpp"

namespace fpi {

namespace {

// sum_{k=first}^{last} 1/k, smallest terms first.
double reciprocal_sum(std::size_t first, std::size_t last) {
  long double s = 0.0L;
  for (std::size_t k = last; k >= first; --k) {
    s += 1.0L / static_cast<long double>(k);
    if (k == first) break;
  }
  return static_cast<double>(s);
}

}  // namespace

double ComponentRule::at(std::size_t n) const {
  const double k = static_cast<double>(n);
  switch (kind) {
    case RuleKind::constant:
      return value;
    case RuleKind::harmonic:
      return 1.0 / (k + 1.0);
    case RuleKind::harmonic_complement:
      return 1.0 - 1.0 / (k + 2.0);
  }
  return value;
}

double ComponentRule::infimum() const {
  switch (kind) {
    case RuleKind::constant:
      return value;
    case RuleKind::harmonic:
      return 0.0;
    case RuleKind::harmonic_complement:
      return 0.5;
  }
  return value;
}

bool ComponentRule::series_diverges() const {
  return kind != RuleKind::constant || value > 0.0;
}

double ComponentRule::partial_sum(std::size_t n) const {
  switch (kind) {
    case RuleKind::constant:
      return static_cast<double>(n + 1) * value;
    case RuleKind::harmonic:
      return reciprocal_sum(1, n + 1);
    case RuleKind::harmonic_complement:
      return static_cast<double>(n + 1) - reciprocal_sum(2, n + 2);
  }
  return 0.0;
}

ControlSchedule::ControlSchedule(std::array<ComponentRule, 3> components)
    : components_(components) {
  for (const auto& c : components_) {
    if (c.kind == RuleKind::constant && !(c.value >= 0.0 && c.value <= 1.0)) {
      throw Error(ErrorKind::invalid_argument,
                  "schedule constant must lie in [0, 1], got " + std::to_string(c.value));
    }
  }
}

ControlSchedule ControlSchedule::constant(double c1, double c2, double c3) {
  return ControlSchedule({ComponentRule{RuleKind::constant, c1},
                          ComponentRule{RuleKind::constant, c2},
                          ComponentRule{RuleKind::constant, c3}});
}

ControlSchedule ControlSchedule::harmonic() {
  const ComponentRule r{RuleKind::harmonic, 0.0};
  return ControlSchedule({r, r, r});
}

ControlSchedule ControlSchedule::harmonic_complement() {
  const ComponentRule r{RuleKind::harmonic_complement, 0.0};
  return ControlSchedule({r, r, r});
}

Alphas ControlSchedule::at(std::size_t n) const {
  return {components_[0].at(n), components_[1].at(n), components_[2].at(n)};
}

bool ControlSchedule::is_constant() const {
  for (const auto& c : components_)
    if (c.kind != RuleKind::constant) return false;
  return true;
}

Alphas ControlSchedule::lower_bounds() const {
  return {components_[0].infimum(), components_[1].infimum(), components_[2].infimum()};
}

bool ControlSchedule::alpha1_diverges() const { return components_[0].series_diverges(); }

bool ControlSchedule::bounded_below() const {
  for (const auto& c : components_)
    if (!(c.infimum() > 0.0)) return false;
  return true;
}

bool ControlSchedule::admits_data_dependence() const {
  return components_[0].infimum() >= 0.5 && alpha1_diverges();
}

std::string ControlSchedule::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (std::size_t i = 0; i < 3; ++i) {
    if (i) os << ", ";
    switch (components_[i].kind) {
      case RuleKind::constant:
        os << components_[i].value;
        break;
      case RuleKind::harmonic:
        os << "1/(n+1)";
        break;
      case RuleKind::harmonic_complement:
        os << "1-1/(n+2)";
        break;
    }
  }
  os << ")";
  return os.str();
}

Alphas schedule_eval(const ControlSchedule& schedule, std::size_t n) { return schedule.at(n); }

}  // namespace fpi
