#include "fpi/data_dependence.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fpi/error.hpp"
#include "fpi/rng.hpp"

namespace fpi {

namespace {

constexpr double kPerturbedTolerance = 1e-12;
constexpr double kRecurrenceSlack = 1e-12;

std::vector<double> random_unit(StreamRng& rng, std::size_t d) {
  if (d == 1) return {rng.uniform() < 0.5 ? -1.0 : 1.0};
  std::vector<double> v(d);
  double s = 0.0;
  do {
    s = 0.0;
    for (double& c : v) {
      c = rng.uniform(-1.0, 1.0);
      s += c * c;
    }
  } while (s < 1e-6);
  const double inv = 1.0 / std::sqrt(s);
  for (double& c : v) c *= inv;
  return v;
}

struct SmoothOffset {
  std::vector<double> direction;  // u
  std::vector<double> wave;       // w
  double amplitude = 0.0;         // eps * s
  double omega = 0.0;
  double phase = 0.0;

  [[nodiscard]] VectorPoint add_to(const VectorPoint& tx, const VectorPoint& x) const {
    double arg = 0.0;
    for (std::size_t i = 0; i < x.dimension(); ++i) arg += wave[i] * x[i];
    const double k = amplitude * std::sin(omega * arg + phase);
    std::vector<double> out(tx.dimension());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = tx[i] + k * direction[i];
    return VectorPoint(std::move(out));
  }
};

}  // namespace

std::string_view to_string(PerturbationMode m) {
  return m == PerturbationMode::constant_shift ? "constant_shift" : "seeded_bounded";
}

PerturbationSpec PerturbationSpec::constant_shift(VectorPoint c, double epsilon) {
  PerturbationSpec s;
  s.epsilon = epsilon;
  s.mode = PerturbationMode::constant_shift;
  s.shift = std::move(c);
  return s;
}

PerturbationSpec PerturbationSpec::seeded_bounded(std::uint64_t seed, double epsilon) {
  PerturbationSpec s;
  s.epsilon = epsilon;
  s.mode = PerturbationMode::seeded_bounded;
  s.seed = seed;
  return s;
}

double data_dependence_bound(double epsilon, double delta) {
  return 5.0 * epsilon / (1.0 - delta);
}

ContractionProblem make_approximate_operator(const ContractionProblem& problem,
                                             const PerturbationSpec& spec) {
  if (!(spec.epsilon >= 0.0) || !std::isfinite(spec.epsilon))
    throw Error(ErrorKind::invalid_argument,
                "perturbation epsilon must be >= 0, got " + std::to_string(spec.epsilon));
  const std::size_t d = problem.dimension();
  const double delta = problem.lipschitz();

  if (spec.mode == PerturbationMode::constant_shift) {
    if (!spec.shift)
      throw Error(ErrorKind::invalid_argument, "constant_shift perturbation needs a shift vector");
    const VectorPoint& c = *spec.shift;
    if (c.dimension() != d)
      throw Error(ErrorKind::dimension_mismatch, "shift dimension differs from problem");
    if (norm(c) > spec.epsilon)
      throw Error(ErrorKind::invalid_argument,
                  "shift norm " + std::to_string(norm(c)) + " exceeds epsilon " +
                      std::to_string(spec.epsilon));
    const std::string name = problem.name() + "~shift";
    if (const auto& affine = problem.affine_form()) {
      std::vector<double> b(d);
      for (std::size_t i = 0; i < d; ++i) b[i] = affine->offset[i] + c[i];
      return ContractionProblem::affine(name, AffineContraction{affine->matrix, VectorPoint(b)});
    }
    return ContractionProblem::from_rule(
        name, d, delta,
        [problem, c](const VectorPoint& x) {
          const VectorPoint tx = problem.apply(x);
          std::vector<double> out(tx.dimension());
          for (std::size_t i = 0; i < out.size(); ++i) out[i] = tx[i] + c[i];
          return VectorPoint(std::move(out));
        },
        std::nullopt);
  }

  if (spec.epsilon == 0.0) {
    return ContractionProblem::from_rule(
        problem.name() + "~seeded", d, delta,
        [problem](const VectorPoint& x) { return problem.apply(x); }, problem.fixed_point());
  }

  StreamRng rng(spec.seed, 0x5eed);
  SmoothOffset off;
  off.direction = random_unit(rng, d);
  off.wave = random_unit(rng, d);
  off.amplitude = spec.epsilon * rng.uniform(0.5, 0.95);
  off.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  // Lipschitz constant of the offset is amplitude * omega <= (1 - delta) / 2.
  off.omega = rng.uniform(0.1, 0.5) * (1.0 - delta) / spec.epsilon;
  const double lipschitz = delta + off.amplitude * off.omega;

  return ContractionProblem::from_rule(
      problem.name() + "~seeded", d, lipschitz,
      [problem, off](const VectorPoint& x) { return off.add_to(problem.apply(x), x); },
      std::nullopt);
}

DataDependenceReport data_dependence_experiment(const ContractionProblem& problem,
                                                const PerturbationSpec& spec,
                                                const ControlSchedule& schedule,
                                                const VectorPoint& x0, const StopRule& stop) {
  const auto& x_star = problem.fixed_point();
  if (!x_star)
    throw Error(ErrorKind::invalid_argument, "data dependence needs a known fixed point");
  if (!schedule.admits_data_dependence())
    throw Error(ErrorKind::inadmissible_schedule,
                "data dependence needs 1/2 <= alpha_n^1 for all n and a divergent alpha^1 "
                "series; schedule " + schedule.describe() + " violates this");

  const ContractionProblem approx = make_approximate_operator(problem, spec);
  const double delta = problem.lipschitz();

  const IterationTrace perturbed = run_scheme(approx, SchemeId::KOPerturbed, schedule, x0,
                                              StopRule{stop.max_n, kPerturbedTolerance});
  if (perturbed.termination != Termination::reached_tolerance)
    throw Error(ErrorKind::numeric_fault,
                "perturbed KO run did not reach 1e-12 within " + std::to_string(stop.max_n) +
                    " steps");
  const IterationTrace base =
      run_scheme(problem, SchemeId::KO, schedule, x0, StopRule{perturbed.steps(), std::nullopt});

  DataDependenceReport rep;
  rep.epsilon = spec.epsilon;
  rep.delta = delta;
  rep.bound = data_dependence_bound(spec.epsilon, delta);
  rep.observed_gap = distance(*x_star, perturbed.last());
  rep.margin = rep.bound - rep.observed_gap;
  rep.steps = perturbed.steps();

  if (spec.mode == PerturbationMode::constant_shift && problem.affine_form()) {
    rep.analytic_gap = norm(affine_fixed_point(problem.affine_form()->matrix, *spec.shift));
  }

  const std::size_t n = base.iterates.size();
  rep.lemma2_data.kind = LemmaKind::lemma2;
  for (std::size_t i = 0; i < n; ++i) {
    const double a1 = schedule.at(i).a1;
    const double mu = a1 * (1.0 - delta);
    rep.lemma2_data.a.push_back(distance(base.iterates[i], perturbed.iterates[i]));
    rep.lemma2_data.coeff.push_back(mu);
    rep.lemma2_data.forcing.push_back(rep.bound);
  }
  const auto& gaps = rep.lemma2_data.a;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double mu = rep.lemma2_data.coeff[i];
    if (gaps[i + 1] > (1.0 - mu) * gaps[i] + mu * rep.bound + kRecurrenceSlack) {
      rep.recurrence_holds = false;
      rep.first_recurrence_failure = i;
      break;
    }
  }
  return rep;
}

}  // namespace fpi
