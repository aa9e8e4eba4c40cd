#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "fpi/analysis.hpp"
#include "fpi/exact.hpp"
#include "fpi/error.hpp"
#include "test_support.hpp"

using namespace fpi;

namespace {

const ContractionProblem kStd = standard_problem();

std::vector<double> geometric(double first, double factor, std::size_t n) {
  std::vector<double> v(n);
  double x = first;
  for (auto& e : v) {
    e = x;
    x *= factor;
  }
  return v;
}

}  // namespace

TEST_CASE("error_sequence") {
  const auto sched = ControlSchedule::constant(0.5, 0.5, 0.5);
  const auto picard = run_scheme(kStd, SchemeId::Picard, sched, VectorPoint{0.0}, {2, std::nullopt});
  CHECK(error_sequence(picard, VectorPoint{2.0}) == std::vector<double>{2.0, 1.0, 0.5});

  const auto still = run_scheme(kStd, SchemeId::KO, sched, VectorPoint{2.0}, {5, std::nullopt});
  for (double e : error_sequence(still, VectorPoint{2.0})) CHECK(e == 0.0);

  const auto ko = run_scheme(kStd, SchemeId::KO, sched, VectorPoint{0.0}, {1, std::nullopt});
  CHECK(error_sequence(ko, VectorPoint{2.0}) == std::vector<double>{2.0, 0.71875});  // 23/32

  CHECK_THROWS_AS((void)error_sequence(ko, VectorPoint{2.0, 0.0}), Error);
}

TEST_CASE("compare_rates examples") {
  SUBCASE("4^-n against 2^-n") {
    const auto r = compare_rates(geometric(1.0, 0.25, 40), geometric(1.0, 0.5, 40));
    CHECK(r.classification == RateClass::first_faster);
    CHECK(r.estimated_limit < 1e-9);
  }
  SUBCASE("identical sequences") {
    const auto e = geometric(3.0, 0.7, 30);
    const auto r = compare_rates(e, e);
    CHECK(r.classification == RateClass::same_rate);
    CHECK(r.estimated_limit == 1.0);
  }
  SUBCASE("second faster") {
    const auto r = compare_rates(geometric(1.0, 0.5, 40), geometric(1.0, 0.25, 40));
    CHECK(r.classification == RateClass::second_faster);
  }
  SUBCASE("denominator underflow truncates the tail") {
    std::vector<double> a(20, 1.0), b = geometric(1.0, std::ldexp(1.0, -100), 20);
    const auto r = compare_rates(a, b);
    CHECK(r.ratios.size() == 10);  // 2^-1000 is below 1e-300
  }
  SUBCASE("all-zero denominator is inconclusive") {
    std::vector<double> a(10, 1.0), b(10, 0.0);
    const auto r = compare_rates(a, b);
    CHECK(r.classification == RateClass::inconclusive);
    CHECK(std::isnan(r.estimated_limit));
  }
  SUBCASE("preconditions") {
    std::vector<double> a(7, 1.0);
    CHECK_THROWS_AS((void)compare_rates(a, a), Error);
    std::vector<double> b(9, 1.0), c(10, 1.0);
    CHECK_THROWS_AS((void)compare_rates(b, c), Error);
  }
}

TEST_CASE("compare_rates: CR against KO on the standard problem") {
  const auto sched = ControlSchedule::constant(0.5, 0.5, 0.5);
  // Floating errors carry an absolute floor near 4e-16, so the ratio drifts
  // from (21/23)^n after a few steps; exact errors keep it clean.
  const auto map = exact::RationalAffine::from(*kStd.affine_form());
  const auto x_star = exact::exact_fixed_point(map);
  const auto errors = [&](SchemeId id) {
    return exact::exact_errors(exact::exact_run(map, id, sched, {exact::Rational(0)}, 20), x_star);
  };
  const auto r = compare_rates(errors(SchemeId::CR), errors(SchemeId::KO));
  for (std::size_t n = 0; n < r.ratios.size(); ++n)
    CHECK(testing::rel_error(r.ratios[n], std::pow(21.0 / 23.0, static_cast<double>(n))) <= 1e-12);
  CHECK(r.estimated_limit < 1.0);
}

TEST_CASE("property: compare_rates is scale invariant") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> fac(0.05, 0.95);
  std::uniform_int_distribution<int> pow2(-40, 40);
  std::uniform_real_distribution<double> any(1e-3, 1e3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = geometric(1.0, fac(rng), 60);
    const auto b = geometric(1.0, fac(rng), 60);
    const auto base = compare_rates(a, b);

    // Power-of-two scales commute with rounding, so ratios are bit-identical.
    const double s2 = std::ldexp(1.0, pow2(rng));
    std::vector<double> a2(a), b2(b);
    for (auto& v : a2) v *= s2;
    for (auto& v : b2) v *= s2;
    const auto scaled = compare_rates(a2, b2);
    CHECK(scaled.classification == base.classification);
    REQUIRE(scaled.ratios.size() == base.ratios.size());
    for (std::size_t n = 0; n < base.ratios.size(); ++n) CHECK(scaled.ratios[n] == base.ratios[n]);

    // Arbitrary scales can move each ratio by a couple of ulps but never the class.
    const double s = any(rng);
    std::vector<double> a3(a), b3(b);
    for (auto& v : a3) v *= s;
    for (auto& v : b3) v *= s;
    const auto loose = compare_rates(a3, b3);
    CHECK(loose.classification == base.classification);
    for (std::size_t n = 0; n < base.ratios.size(); ++n)
      CHECK(testing::rel_error(loose.ratios[n], base.ratios[n]) <= 1e-15);
  }
}

TEST_CASE("theoretical_bounds examples") {
  const auto s = theoretical_bounds(2.0, 0.5, Alphas{0.5, 0.5, 0.5}, 10);
  CHECK(s.exp_bound[0] == doctest::Approx(1.5576015661428098).epsilon(1e-15));
  CHECK(s.b_n[0] == 0.71875);
  CHECK(s.a_n[0] == 0.65625);
  CHECK(s.theta_step_ratio == doctest::Approx(21.0 / 23.0).epsilon(1e-15));
  CHECK_THROWS_AS((void)theoretical_bounds(2.0, 1.0, Alphas{0.5, 0.5, 0.5}, 3), Error);
  CHECK_THROWS_AS((void)theoretical_bounds(2.0, 0.0, Alphas{0.5, 0.5, 0.5}, 3), Error);
}

TEST_CASE("theoretical_bounds with a schedule") {
  const auto c = theoretical_bounds(2.0, 0.5, ControlSchedule::constant(0.5, 0.5, 0.5), 30);
  const auto d = theoretical_bounds(2.0, 0.5, Alphas{0.5, 0.5, 0.5}, 30);
  for (std::size_t n = 0; n < 30; ++n) {
    CHECK(c.b_n[n] == d.b_n[n]);
    CHECK(c.a_n[n] == d.a_n[n]);
    CHECK(testing::rel_error(c.exp_bound[n], d.exp_bound[n]) <= 1e-14);
  }
  // Harmonic-complement weights are bounded below by 1/2.
  const auto hc = theoretical_bounds(2.0, 0.5, ControlSchedule::harmonic_complement(), 5);
  CHECK(hc.b_n[0] == 0.71875);
  // Partial sum 1/2 + 2/3 for n = 1.
  CHECK(hc.exp_bound[1] == doctest::Approx(2.0 * std::exp(-0.5 * (0.5 + 2.0 / 3.0))));
  try {
    (void)theoretical_bounds(2.0, 0.5, ControlSchedule::harmonic(), 5);
    FAIL("harmonic weights are not bounded below");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::inadmissible_schedule);
  }
}

TEST_CASE("property: theta_n is a geometric sequence") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  std::uniform_real_distribution<double> dist(0.01, 0.99);
  for (int trial = 0; trial < 100; ++trial) {
    const Alphas a{unit(rng), unit(rng), unit(rng)};
    const auto s = theoretical_bounds(1.0, dist(rng), a, 101);
    for (std::size_t n = 0; n < s.theta_n.size(); ++n) {
      const double expect = std::pow(s.theta_step_ratio, static_cast<double>(n)) * s.theta_n[0];
      CHECK(testing::rel_error(s.theta_n[n], expect) <= 1e-10);
      CHECK(s.theta_n[n] > 0.0);
      CHECK(s.a_n[n] > 0.0);
      CHECK(s.b_n[n] > 0.0);
      if (n > 0 && s.theta_step_ratio < 1.0) CHECK(s.theta_n[n] < s.theta_n[n - 1]);
    }
  }
}

TEST_CASE("theta_ratio_test examples") {
  const auto std_case = theta_ratio_test(0.5, {0.5, 0.5, 0.5});
  CHECK(std_case.ratio == doctest::Approx(0.9130434782608695).epsilon(1e-15));
  CHECK(std_case.passes);

  const auto high = theta_ratio_test(0.9, {0.5, 0.5, 0.5});
  CHECK(high.ratio == doctest::Approx(0.9866844207723036).epsilon(1e-15));
  CHECK(high.passes);

  for (double d : {0.1, 0.5, 0.99})
    for (double a2 : {0.2, 1.0}) {
      const auto edge = theta_ratio_test(d, {1.0, a2, 0.7});
      CHECK(edge.ratio == 1.0);
      CHECK_FALSE(edge.passes);
    }
  CHECK_THROWS_AS((void)theta_ratio_test(0.5, {0.0, 0.5, 0.5}), Error);
}

TEST_CASE("lemma_recurrence_check examples") {
  SUBCASE("lemma1 with geometric decay") {
    LemmaRecurrence r{LemmaKind::lemma1, geometric(1.0, 0.5, 64), std::vector<double>(64, 0.5),
                      std::vector<double>(64, 0.0)};
    const auto v = lemma_recurrence_check(r, 1e-10);
    CHECK(v.hypotheses_hold);
    CHECK(v.conclusion_holds);
  }
  SUBCASE("lemma2 settling at its forcing level") {
    std::vector<double> a{10.0};
    for (int i = 1; i < 80; ++i) a.push_back(0.5 * a.back() + 1.5);
    LemmaRecurrence r{LemmaKind::lemma2, a, std::vector<double>(80, 0.5),
                      std::vector<double>(80, 3.0)};
    const auto v = lemma_recurrence_check(r, 1e-10);
    CHECK(v.hypotheses_hold);
    CHECK(v.conclusion_holds);
    CHECK(v.tail_statistic <= 1e-10);
  }
  SUBCASE("constant sequence breaks the lemma1 recurrence at index 0") {
    LemmaRecurrence r{LemmaKind::lemma1, std::vector<double>(32, 1.0),
                      std::vector<double>(32, 0.5), std::vector<double>(32, 0.0)};
    const auto v = lemma_recurrence_check(r, 1e-10);
    CHECK_FALSE(v.hypotheses_hold);
    REQUIRE(v.first_recurrence_failure.has_value());
    CHECK(*v.first_recurrence_failure == 0);
  }
  SUBCASE("convergent coefficient series fails the divergence stand-in") {
    std::vector<double> coeff(32);
    for (std::size_t i = 0; i < coeff.size(); ++i) coeff[i] = std::ldexp(0.5, -static_cast<int>(i));
    LemmaRecurrence r{LemmaKind::lemma1, std::vector<double>(32, 0.0), coeff,
                      std::vector<double>(32, 0.0)};
    CHECK_FALSE(lemma_recurrence_check(r, 1e-10).hypotheses_hold);
  }
  SUBCASE("input validation") {
    LemmaRecurrence shortr{LemmaKind::lemma1, std::vector<double>(8, 0.0),
                           std::vector<double>(8, 0.5), std::vector<double>(8, 0.0)};
    CHECK_THROWS_AS((void)lemma_recurrence_check(shortr, 1e-10), Error);
    LemmaRecurrence neg{LemmaKind::lemma1, std::vector<double>(16, -1.0),
                        std::vector<double>(16, 0.5), std::vector<double>(16, 0.0)};
    CHECK_THROWS_AS((void)lemma_recurrence_check(neg, 1e-10), Error);
    LemmaRecurrence badc{LemmaKind::lemma1, std::vector<double>(16, 0.0),
                         std::vector<double>(16, 1.0), std::vector<double>(16, 0.0)};
    CHECK_THROWS_AS((void)lemma_recurrence_check(badc, 1e-10), Error);
  }
}

TEST_CASE("equivalence_gap on the standard problem") {
  const auto sched = ControlSchedule::constant(0.5, 0.5, 0.5);
  const StopRule stop{200, std::nullopt};
  const auto ko = run_scheme(kStd, SchemeId::KO, sched, VectorPoint{0.0}, stop);
  const auto cr = run_scheme(kStd, SchemeId::CR, sched, VectorPoint{0.0}, stop);
  const auto rep = equivalence_gap(ko, cr, kStd);
  CHECK(rep.gaps[0] == 0.0);
  CHECK(rep.gaps[1] == 0.0625);
  const auto below = first_below(rep.gaps, 1e-10, 1);
  REQUIRE(below.has_value());
  CHECK(*below == 24);
  CHECK(rep.ko_side_recurrence_holds);
  CHECK(rep.cr_side_recurrence_holds);

  const auto v = lemma_recurrence_check(rep.lemma1_data, 1e-10);
  CHECK(v.hypotheses_hold);
  CHECK(v.conclusion_holds);

  const auto short_cr = run_scheme(kStd, SchemeId::CR, sched, VectorPoint{0.0}, {10, std::nullopt});
  CHECK_THROWS_AS((void)equivalence_gap(ko, short_cr, kStd), Error);
  const auto other_start = run_scheme(kStd, SchemeId::CR, sched, VectorPoint{1.0}, stop);
  CHECK_THROWS_AS((void)equivalence_gap(ko, other_start, kStd), Error);
  CHECK_THROWS_AS((void)equivalence_gap(cr, ko, kStd), Error);
}

TEST_CASE("property: equivalence recurrences hold on random problems") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t d = 1 + static_cast<std::size_t>(trial % 4);
    const auto p = make_affine_contraction(testing::random_matrix(rng, d, 0.1 + 0.85 * unit(rng)),
                                           testing::random_point(rng, d, 3.0));
    const auto sched = trial % 2 == 0 ? ControlSchedule::constant(unit(rng), unit(rng), unit(rng))
                                      : ControlSchedule::harmonic_complement();
    const auto x0 = testing::random_point(rng, d, 10.0);
    const auto ko = run_scheme(p, SchemeId::KO, sched, x0, {120, std::nullopt});
    const auto cr = run_scheme(p, SchemeId::CR, sched, x0, {120, std::nullopt});
    const auto rep = equivalence_gap(ko, cr, p);
    CHECK(rep.ko_side_recurrence_holds);
    CHECK(rep.cr_side_recurrence_holds);
  }
}

TEST_CASE("property: KO errors stay under the exponential bound") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const double a = -0.95 + 1.9 * unit(rng);
    const auto p = scalar_affine(a, 4.0 * unit(rng) - 2.0);
    const auto sched = trial % 3 == 0   ? ControlSchedule::harmonic_complement()
                       : trial % 3 == 1 ? ControlSchedule::constant(0.05 + 0.95 * unit(rng), unit(rng), unit(rng))
                                        : ControlSchedule::constant(1.0, 1.0, 1.0);
    const auto t = run_scheme(p, SchemeId::KO, sched, VectorPoint{20.0 * unit(rng) - 10.0},
                              {100, std::nullopt});
    const auto lo = sched.lower_bounds();
    if (!(lo.a2 > 0.0 && lo.a3 > 0.0)) continue;
    const auto b = theoretical_bounds(t.errors[0], p.lipschitz(), sched, 100);
    for (std::size_t n = 0; n + 1 < t.errors.size(); ++n)
      CHECK(t.errors[n + 1] <= b.exp_bound[n] + 1e-12);
  }
}
