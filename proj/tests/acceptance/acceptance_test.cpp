// Acceptance gate. Each criterion is checked twice: directly against the
// core library here, and through the harness on its built-in config (the
// path `fpi verify` takes). A criterion passes only when both agree.

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fpi/analysis.hpp"
#include "fpi/batch.hpp"
#include "fpi/data_dependence.hpp"
#include "fpi/exact.hpp"
#include "fpi/harness/acceptance.hpp"
#include "fpi/schemes.hpp"

using namespace fpi;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const ControlSchedule kHalf = ControlSchedule::constant(0.5, 0.5, 0.5);

std::vector<double> exact_errors(const ContractionProblem& p, SchemeId id, const ControlSchedule& s,
                                 double x0, std::size_t steps) {
  const auto map = exact::RationalAffine::from(*p.affine_form());
  const auto t = exact::exact_run(map, id, s, {exact::to_rational(x0)}, steps);
  return exact::exact_errors(t, exact::exact_fixed_point(map));
}

Verdict convergence() {
  const auto p = standard_problem();
  const auto same = make_approximate_operator(p, PerturbationSpec::constant_shift(VectorPoint{0.0}, 0.0));
  Verdict v;
  std::size_t ok = 0, ko_steps = 0;
  for (SchemeId id : kAllSchemes) {
    const auto& op = id == SchemeId::KOPerturbed ? same : p;
    const auto t = run_scheme(op, id, kHalf, VectorPoint{0.0}, {200, 1e-10});
    if (t.errors.back() < 1e-10) ++ok;
    if (id == SchemeId::KO) ko_steps = t.steps();
  }
  v.pass = ok == kAllSchemes.size() && ko_steps == 24;
  v.detail = std::to_string(ok) + "/10 below 1e-10, KO stops at n = " + std::to_string(ko_steps);
  return v;
}

Verdict exponential_bound() {
  Verdict v;
  double worst = -INFINITY;
  for (double a : {0.3, 0.5, 0.9}) {
    const auto p = scalar_affine(a, 1.0);
    const auto t = run_scheme(p, SchemeId::KO, kHalf, VectorPoint{0.0}, {101, std::nullopt});
    const auto b = theoretical_bounds(t.errors[0], p.lipschitz(), Alphas{0.5, 0.5, 0.5}, 101);
    for (std::size_t n = 0; n <= 100; ++n) {
      worst = std::max(worst, t.errors[n + 1] - b.exp_bound[n]);
      v.pass = v.pass && t.errors[n + 1] <= b.exp_bound[n] + 1e-12;
    }
  }
  v.detail = "delta in {0.3, 0.5, 0.9}, n <= 100, max(e_{n+1} - exp_bound_n) = " + num(worst);
  return v;
}

Verdict tightness() {
  Verdict v;
  double worst_exact = 0.0, worst_float = 0.0;
  const Alphas schedules[] = {{0.5, 0.5, 0.5}, {0.9, 0.3, 0.7}, {1.0, 1.0, 1.0}, {0.2, 0.6, 0.1}};
  for (double a : {0.3, 0.5, 0.625, 0.9}) {
    for (const Alphas& w : schedules) {
      const auto sched = ControlSchedule::constant(w.a1, w.a2, w.a3);
      // Exact errors, any offset.
      const auto p = scalar_affine(a, 1.0);
      for (SchemeId id : {SchemeId::KO, SchemeId::CR}) {
        const auto e = exact_errors(p, id, sched, -3.0, 51);
        const auto b = theoretical_bounds(e[0], a, w, 51);
        const auto& target = id == SchemeId::KO ? b.b_n : b.a_n;
        for (std::size_t n = 0; n <= 50; ++n)
          worst_exact = std::max(worst_exact, std::abs(e[n + 1] - target[n]) / target[n]);
      }
      // Floating errors where x* = 0, so no absolute floor intervenes.
      const auto z = scalar_affine(a, 0.0);
      for (SchemeId id : {SchemeId::KO, SchemeId::CR}) {
        const auto t = run_scheme(z, id, sched, VectorPoint{1.0}, {51, std::nullopt});
        const auto b = theoretical_bounds(t.errors[0], a, w, 51);
        const auto& target = id == SchemeId::KO ? b.b_n : b.a_n;
        for (std::size_t n = 0; n <= 50; ++n)
          worst_float = std::max(worst_float, std::abs(t.errors[n + 1] - target[n]) / target[n]);
      }
    }
  }
  v.pass = worst_exact <= 1e-12 && worst_float <= 1e-12;
  v.detail = "n <= 50, max relative error " + num(worst_exact) + " (exact errors), " +
             num(worst_float) + " (floating, x* = 0)";
  return v;
}

Verdict theta() {
  Verdict v;
  const auto b = theoretical_bounds(2.0, 0.5, Alphas{0.5, 0.5, 0.5}, 201);
  double dev = 0.0;
  for (std::size_t n = 0; n + 1 < b.theta_n.size(); ++n)
    dev = std::max(dev, std::abs(b.theta_n[n + 1] / b.theta_n[n] - 21.0 / 23.0));
  const auto below = first_below(b.theta_n, 1e-6);
  std::size_t interior = 0, interior_ok = 0, boundary = 0, boundary_ok = 0;
  for (double d : {0.2, 0.5, 0.8})
    for (double a1 : {0.3, 0.6, 0.95})
      for (auto [a2, a3] : {std::pair{0.5, 0.5}, std::pair{1.0, 0.25}, std::pair{0.1, 0.9}}) {
        ++interior;
        if (theta_ratio_test(d, {a1, a2, a3}).ratio < 1.0) ++interior_ok;
        ++boundary;
        if (theta_ratio_test(d, {1.0, a2, a3}).ratio == 1.0) ++boundary_ok;
      }
  v.pass = dev <= 1e-12 && below && *below <= 200 && interior == 27 && interior_ok == 27 &&
           boundary_ok == boundary;
  v.detail = "max |theta_{n+1}/theta_n - 21/23| = " + num(dev) + ", theta_n < 1e-6 at n = " +
             (below ? std::to_string(*below) : std::string("never")) + ", grid " +
             std::to_string(interior_ok) + "/27 below 1, boundary " + std::to_string(boundary_ok) +
             "/" + std::to_string(boundary) + " exactly 1";
  return v;
}

Verdict equivalence() {
  Verdict v;
  const auto p = standard_problem();
  const auto ko = run_scheme(p, SchemeId::KO, kHalf, VectorPoint{0.0}, {200, std::nullopt});
  const auto cr = run_scheme(p, SchemeId::CR, kHalf, VectorPoint{0.0}, {200, std::nullopt});
  const auto rep = equivalence_gap(ko, cr, p);
  const auto below = first_below(rep.gaps, 1e-10, 1);
  const auto lemma = lemma_recurrence_check(rep.lemma1_data, 1e-10);
  v.pass = below && rep.ko_side_recurrence_holds && lemma.hypotheses_hold && lemma.conclusion_holds;
  v.detail = "gap < 1e-10 at n = " + (below ? std::to_string(*below) : std::string("never")) +
             ", recurrence " + (rep.ko_side_recurrence_holds ? "holds" : "fails") +
             ", lemma-1 hypotheses " + (lemma.hypotheses_hold ? "hold" : "fail") + " and conclusion " +
             (lemma.conclusion_holds ? "holds" : "fails");
  return v;
}

Verdict data_dependence() {
  Verdict v;
  const std::vector<ContractionProblem> problems{scalar_affine(0.3, 1.0), scalar_affine(0.5, 1.0),
                                                 scalar_affine(0.9, 1.0)};
  std::vector<DataDependenceRequest> reqs;
  std::vector<double> shifts;
  for (std::size_t pi = 0; pi < problems.size(); ++pi)
    for (double eps : {0.01, 0.1})
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        DataDependenceRequest r;
        r.problem = &problems[pi];
        r.stop = {5000, std::nullopt};
        if (seed % 2 == 0) {
          r.spec = PerturbationSpec::seeded_bounded(seed * 31 + pi, eps);
          shifts.push_back(NAN);
        } else {
          const double c = eps * (seed % 4 == 1 ? 1.0 : -0.6);
          r.spec = PerturbationSpec::constant_shift(VectorPoint{c}, eps);
          shifts.push_back(c);
        }
        reqs.push_back(std::move(r));
      }
  const auto reps = data_dependence_batch(reqs, Execution::parallel);
  double min_margin = INFINITY, worst_analytic = 0.0;
  bool recurrence = true;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    min_margin = std::min(min_margin, reps[i].margin);
    recurrence = recurrence && reps[i].recurrence_holds;
    if (!std::isnan(shifts[i])) {
      const double analytic = std::abs(shifts[i]) / (1.0 - reps[i].delta);
      worst_analytic = std::max(worst_analytic, std::abs(reps[i].observed_gap - analytic));
    }
  }
  v.pass = reps.size() >= 100 && min_margin >= 0.0 && recurrence && worst_analytic <= 1e-12;
  v.detail = std::to_string(reps.size()) + " experiments, min margin " + num(min_margin) +
             ", recurrence " + (recurrence ? "holds" : "fails") +
             ", max |gap - |c|/(1-a)| = " + num(worst_analytic);
  return v;
}

Verdict oracle() {
  Verdict v;
  const auto p = standard_problem();
  const auto map = exact::RationalAffine::from(*p.affine_form());
  double worst = 0.0;
  for (SchemeId id : kAllSchemes) {
    const auto f = run_scheme(p, id, kHalf, VectorPoint{0.0}, {50, std::nullopt});
    const auto e = exact::exact_run(map, id, kHalf, {exact::Rational(0)}, 50);
    const auto c = exact::compare_traces(f, e, 1e-12);
    worst = std::max(worst, c.max_abs_gap);
    v.pass = v.pass && c.pass;
  }
  v.detail = "10 schemes, 50 steps, max |float - exact| = " + num(worst);
  return v;
}

Verdict reductions() {
  Verdict v;
  const auto p = standard_problem();
  const Alphas weights[] = {{0.5, 0.5, 0.5}, {0.3, 0.7, 0.9}, {0.95, 0.15, 0.6}};
  std::size_t exact = 0;
  auto same = [&](SchemeId a, Alphas wa, SchemeId b, Alphas wb, double x0) {
    const StopRule stop{50, std::nullopt};
    return run_scheme(p, a, ControlSchedule::constant(wa.a1, wa.a2, wa.a3), VectorPoint{x0}, stop).iterates ==
           run_scheme(p, b, ControlSchedule::constant(wb.a1, wb.a2, wb.a3), VectorPoint{x0}, stop).iterates;
  };
  const std::function<bool(Alphas, double)> identities[] = {
      [&](Alphas w, double x) { return same(SchemeId::Noor, {w.a1, 0, 0}, SchemeId::Mann, w, x); },
      [&](Alphas w, double x) { return same(SchemeId::Noor, {w.a1, w.a2, 0}, SchemeId::Ishikawa, w, x); },
      [&](Alphas w, double x) { return same(SchemeId::SP, {w.a1, w.a2, 0}, SchemeId::TwoStepMann, w, x); },
      [&](Alphas w, double x) { return same(SchemeId::S, {w.a1, 0, w.a3}, SchemeId::Picard, w, x); },
      [&](Alphas w, double x) { return same(SchemeId::CR, {0, 0, 0}, SchemeId::Picard, w, x); },
      [&](Alphas w, double x) { return same(SchemeId::KO, {0, w.a2, w.a3}, SchemeId::Picard, w, x); },
      [&](Alphas, double x) {
        VectorPoint pt{x};
        for (int n = 0; n < 50; ++n) {
          const auto next = step_ko(p, pt, {1.0, 1.0, 1.0});
          if (!(next == p.apply(p.apply(p.apply(pt))))) return false;
          pt = next;
        }
        return true;
      },
  };
  for (const auto& id : identities) {
    bool all = true;
    for (double x0 : {-7.25, 0.0, 13.0})
      for (const Alphas& w : weights) all = all && id(w, x0);
    if (all) ++exact;
  }
  v.pass = exact == 7;
  v.detail = std::to_string(exact) + "/7 identities bit-exact over 50 steps and 3 starts";
  return v;
}

Verdict rate_direction() {
  Verdict v;
  const auto p = standard_problem();
  const auto cr = exact_errors(p, SchemeId::CR, kHalf, 0.0, 80);
  const auto ko = exact_errors(p, SchemeId::KO, kHalf, 0.0, 80);
  const auto rep = compare_rates(cr, ko);
  // The floating comparison for context: both errors bottom out near 4e-16.
  const auto fcr = run_scheme(p, SchemeId::CR, kHalf, VectorPoint{0.0}, {80, std::nullopt});
  const auto fko = run_scheme(p, SchemeId::KO, kHalf, VectorPoint{0.0}, {80, std::nullopt});
  const auto frep = compare_rates(fcr.errors, fko.errors);
  v.pass = rep.classification == RateClass::first_faster && rep.estimated_limit <= 0.01;
  v.detail = "exact errors: " + std::string(to_string(rep.classification)) + ", limit " +
             num(rep.estimated_limit) + " (floating errors: " +
             std::string(to_string(frep.classification)) + ", limit " + num(frep.estimated_limit) + ")";
  return v;
}

}  // namespace

int main() {
  using Check = Verdict (*)();
  const Check checks[] = {convergence, exponential_bound, tightness, theta, equivalence,
                          data_dependence, oracle, reductions, rate_direction};

  const auto harness = harness::verify_builtin();
  bool all = true;
  for (int k = 1; k <= 9; ++k) {
    Verdict direct;
    try {
      direct = checks[k - 1]();
    } catch (const std::exception& e) {
      direct = {false, std::string("error: ") + e.what()};
    }
    const auto& h = harness[static_cast<std::size_t>(k - 1)];
    const bool pass = direct.pass && h.pass;
    all = all && pass;
    std::printf("criterion %d [%s]: %s | direct: %s | harness (%s): %s\n", k, h.title.c_str(),
                pass ? "PASS" : "FAIL", direct.detail.c_str(), h.config.c_str(), h.detail.c_str());
  }
  std::printf("%s\n", all ? "acceptance: all 9 criteria pass" : "acceptance: FAILED");
  return all ? 0 : 1;
}
