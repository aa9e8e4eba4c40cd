#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fpi/batch.hpp"
#include "fpi/data_dependence.hpp"
#include "fpi/error.hpp"
#include "test_support.hpp"

using namespace fpi;

namespace {
const ContractionProblem kStd = standard_problem();
const ControlSchedule kHalf = ControlSchedule::constant(0.5, 0.5, 0.5);
}  // namespace

TEST_CASE("make_approximate_operator: constant shift") {
  const auto shifted =
      make_approximate_operator(kStd, PerturbationSpec::constant_shift(VectorPoint{0.1}, 0.1));
  CHECK(shifted.apply(VectorPoint{0.0})[0] == 1.1);
  REQUIRE(shifted.fixed_point().has_value());
  CHECK((*shifted.fixed_point())[0] == doctest::Approx(2.2).epsilon(1e-15));
  CHECK(shifted.lipschitz() == kStd.lipschitz());

  const auto same =
      make_approximate_operator(kStd, PerturbationSpec::constant_shift(VectorPoint{0.0}, 0.1));
  for (double x : {-7.0, 0.0, 0.3, 2.0, 1e6}) CHECK(same.apply(VectorPoint{x}) == kStd.apply(VectorPoint{x}));

  CHECK_THROWS_AS((void)make_approximate_operator(
                      kStd, PerturbationSpec::constant_shift(VectorPoint{0.2}, 0.1)),
                  Error);
  CHECK_THROWS_AS((void)make_approximate_operator(
                      kStd, PerturbationSpec::constant_shift(VectorPoint{0.0, 0.0}, 0.1)),
                  Error);
  CHECK_THROWS_AS((void)make_approximate_operator(
                      kStd, PerturbationSpec::constant_shift(VectorPoint{0.0}, -1.0)),
                  Error);
}

TEST_CASE("make_approximate_operator: seeded offsets stay within budget") {
  const auto approx = make_approximate_operator(kStd, PerturbationSpec::seeded_bounded(7, 0.1));
  CHECK(sample_perturbation_sup(kStd, approx, 1000, 11, 50.0, Execution::serial) <= 0.1);
  CHECK(approx.lipschitz() < 1.0);

  // A function of the point, not a noise process.
  CHECK(approx.apply(VectorPoint{0.37}) == approx.apply(VectorPoint{0.37}));
  const auto again = make_approximate_operator(kStd, PerturbationSpec::seeded_bounded(7, 0.1));
  CHECK(again.apply(VectorPoint{0.37}) == approx.apply(VectorPoint{0.37}));
  const auto other = make_approximate_operator(kStd, PerturbationSpec::seeded_bounded(8, 0.1));
  CHECK_FALSE(other.apply(VectorPoint{0.37}) == approx.apply(VectorPoint{0.37}));

  const auto zero = make_approximate_operator(kStd, PerturbationSpec::seeded_bounded(7, 0.0));
  CHECK(zero.apply(VectorPoint{0.37}) == kStd.apply(VectorPoint{0.37}));
}

TEST_CASE("property: seeded perturbations are bounded contractions") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 1 + static_cast<std::size_t>(trial % 3);
    const auto p = make_affine_contraction(testing::random_matrix(rng, d, 0.1 + 0.85 * unit(rng)),
                                           testing::random_point(rng, d, 2.0));
    const double eps = trial % 2 == 0 ? 0.01 : 0.1;
    const auto approx =
        make_approximate_operator(p, PerturbationSpec::seeded_bounded(static_cast<std::uint64_t>(trial), eps));
    CHECK(sample_perturbation_sup(p, approx, 500, 3, 20.0, Execution::serial) <= eps + 1e-12);
    CHECK(sample_contraction(approx, 500, 4, 20.0, Execution::serial).holds);
  }
}

TEST_CASE("data_dependence_bound") {
  CHECK(data_dependence_bound(0.1, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(data_dependence_bound(0.0, 0.5) == 0.0);
}

TEST_CASE("data_dependence_experiment examples") {
  SUBCASE("constant shift on the standard problem") {
    const auto rep = data_dependence_experiment(
        kStd, PerturbationSpec::constant_shift(VectorPoint{0.1}, 0.1), kHalf, VectorPoint{0.0}, {});
    CHECK(rep.observed_gap == doctest::Approx(0.2).epsilon(1e-11));
    CHECK(rep.bound == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rep.margin == doctest::Approx(0.8).epsilon(1e-11));
    REQUIRE(rep.analytic_gap.has_value());
    CHECK(std::abs(*rep.analytic_gap - rep.observed_gap) <= 1e-12);
    CHECK(rep.recurrence_holds);
    const auto v = lemma_recurrence_check(rep.lemma2_data, 1e-10);
    CHECK(v.hypotheses_hold);
    CHECK(v.conclusion_holds);
  }
  SUBCASE("epsilon zero") {
    const auto rep = data_dependence_experiment(
        kStd, PerturbationSpec::constant_shift(VectorPoint{0.0}, 0.0), kHalf, VectorPoint{0.0}, {});
    CHECK(rep.observed_gap <= 1e-12);
    CHECK(rep.bound == 0.0);
    CHECK(rep.margin >= -1e-10);
  }
  SUBCASE("inadmissible schedules are rejected before running") {
    for (const auto& s : {ControlSchedule::constant(0.25, 0.5, 0.5), ControlSchedule::harmonic()}) {
      try {
        (void)data_dependence_experiment(kStd,
                                         PerturbationSpec::constant_shift(VectorPoint{0.1}, 0.1), s,
                                         VectorPoint{0.0}, {});
        FAIL("expected rejection");
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::inadmissible_schedule);
      }
    }
  }
}

TEST_CASE("property: observed gap under the data dependence bound") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const double delta = std::array{0.3, 0.5, 0.9}[trial % 3];
    const double eps = trial % 2 == 0 ? 0.01 : 0.1;
    const auto p = scalar_affine(delta, 4.0 * unit(rng) - 2.0);
    const auto spec = trial % 4 < 2
                          ? PerturbationSpec::seeded_bounded(static_cast<std::uint64_t>(trial), eps)
                          : PerturbationSpec::constant_shift(VectorPoint{eps * (2.0 * unit(rng) - 1.0)}, eps);
    const auto sched = trial % 5 == 0 ? ControlSchedule::harmonic_complement()
                                      : ControlSchedule::constant(0.5 + 0.5 * unit(rng), unit(rng), unit(rng));
    const auto rep = data_dependence_experiment(p, spec, sched, VectorPoint{10.0 * unit(rng)},
                                                {1000, std::nullopt});
    CHECK(rep.margin >= 0.0);
    CHECK(rep.recurrence_holds);
    // Sharper fact for this family: the gap never exceeds eps / (1 - delta).
    CHECK(rep.observed_gap <= eps / (1.0 - delta) + 1e-12);
  }
}
