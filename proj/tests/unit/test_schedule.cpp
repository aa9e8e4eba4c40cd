#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fpi/error.hpp"
#include "fpi/schedule.hpp"

using namespace fpi;

TEST_CASE("schedule_eval examples") {
  CHECK(schedule_eval(ControlSchedule::constant(0.5, 0.5, 0.5), 7) == Alphas{0.5, 0.5, 0.5});
  CHECK(schedule_eval(ControlSchedule::harmonic(), 0) == Alphas{1.0, 1.0, 1.0});
  CHECK(schedule_eval(ControlSchedule::harmonic_complement(), 0) == Alphas{0.5, 0.5, 0.5});
  CHECK(schedule_eval(ControlSchedule::harmonic(), 3).a1 == 0.25);
  CHECK(schedule_eval(ControlSchedule::harmonic_complement(), 2).a2 == 0.75);
}

TEST_CASE("schedule values stay in [0, 1] and constants are n-independent") {
  const ControlSchedule mixed({ComponentRule{RuleKind::constant, 0.3},
                               ComponentRule{RuleKind::harmonic, 0.0},
                               ComponentRule{RuleKind::harmonic_complement, 0.0}});
  const auto c = ControlSchedule::constant(0.1, 0.7, 1.0);
  const Alphas c0 = c.at(0);
  for (std::size_t n = 0; n < 5000; n += 7) {
    for (const auto& s : {mixed, c, ControlSchedule::harmonic(), ControlSchedule::harmonic_complement()}) {
      const Alphas a = s.at(n);
      for (double v : {a.a1, a.a2, a.a3}) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
    CHECK(c.at(n) == c0);
  }
}

TEST_CASE("schedule constants outside [0, 1] are rejected") {
  CHECK_THROWS_AS((void)ControlSchedule::constant(1.5, 0.5, 0.5), Error);
  CHECK_THROWS_AS((void)ControlSchedule::constant(0.5, -0.1, 0.5), Error);
}

TEST_CASE("analytic admissibility flags") {
  CHECK(ControlSchedule::constant(0.5, 0.5, 0.5).alpha1_diverges());
  CHECK_FALSE(ControlSchedule::constant(0.0, 0.5, 0.5).alpha1_diverges());
  CHECK(ControlSchedule::harmonic().alpha1_diverges());
  CHECK(ControlSchedule::harmonic_complement().alpha1_diverges());

  CHECK(ControlSchedule::constant(0.5, 0.2, 0.1).bounded_below());
  CHECK_FALSE(ControlSchedule::constant(0.5, 0.0, 0.1).bounded_below());
  CHECK_FALSE(ControlSchedule::harmonic().bounded_below());
  CHECK(ControlSchedule::harmonic_complement().bounded_below());
  CHECK(ControlSchedule::harmonic_complement().lower_bounds() == Alphas{0.5, 0.5, 0.5});

  CHECK(ControlSchedule::constant(0.5, 0.1, 0.1).admits_data_dependence());
  CHECK_FALSE(ControlSchedule::constant(0.25, 0.5, 0.5).admits_data_dependence());
  CHECK_FALSE(ControlSchedule::harmonic().admits_data_dependence());
  CHECK(ControlSchedule::harmonic_complement().admits_data_dependence());
}

TEST_CASE("partial sums match direct summation") {
  for (const auto& rule : {ComponentRule{RuleKind::constant, 0.3}, ComponentRule{RuleKind::harmonic, 0.0},
                           ComponentRule{RuleKind::harmonic_complement, 0.0}}) {
    long double direct = 0.0L;
    for (std::size_t n = 0; n < 300; ++n) {
      direct += rule.at(n);
      CHECK(rule.partial_sum(n) == doctest::Approx(static_cast<double>(direct)).epsilon(1e-14));
    }
  }
  // H_4 = 25/12
  CHECK(ComponentRule{RuleKind::harmonic, 0.0}.partial_sum(3) == doctest::Approx(25.0 / 12.0).epsilon(1e-16));
}
