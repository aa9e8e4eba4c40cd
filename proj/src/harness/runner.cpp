#include "fpi/harness/runner.hpp"

#include <cmath>
#include <cstdlib>
#include <deque>
#include <map>

#include "fpi/analysis.hpp"
#include "fpi/exact.hpp"
#include "fpi/harness/report.hpp"
#include "fpi/rng.hpp"

namespace fpi::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kBoundSlack = 1e-12;
constexpr double kGapThreshold = 1e-10;
constexpr double kLemmaTolerance = 1e-10;
constexpr double kThetaTarget = 1e-6;
constexpr std::size_t kThetaHorizon = 200;
constexpr std::size_t kTightnessSteps = 50;

/// One (problem, schedule) pair of the config.
struct Case {
  std::string name;
  std::size_t problem_index = 0;
  std::size_t schedule_index = 0;
  ControlSchedule schedule;
  VectorPoint start;
};

struct Run {
  std::string id;
  const Case* c = nullptr;
  SchemeId scheme{};
  const ContractionProblem* problem = nullptr;  // the operator actually iterated
};

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json optional_index(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index) {
  StreamRng rng(seed, index);
  return static_cast<std::uint64_t>(rng.uniform() * 0x1.0p53);
}

/// Affine, scalar, A >= 0: every inequality of the bound chain is an equality.
bool tightness_eligible(const ContractionProblem& p, const ControlSchedule& s) {
  const auto& a = p.affine_form();
  return a && p.dimension() == 1 && a->matrix(0, 0) >= 0.0 && s.is_constant() && p.fixed_point();
}

bool oracle_eligible(const ContractionProblem& p, const ControlSchedule& s) {
  return p.affine_form().has_value() && s.is_constant();
}

/// Exact errors of `steps` iterations, rounded to double.
std::vector<double> exact_error_sequence(const ContractionProblem& p, SchemeId scheme,
                                         const ControlSchedule& s, const VectorPoint& x0,
                                         std::size_t steps) {
  const auto map = exact::RationalAffine::from(*p.affine_form());
  const auto trace = exact::exact_run(map, scheme, s, exact::to_rational(x0), steps);
  return exact::exact_errors(trace, exact::exact_fixed_point(map));
}

TraceTable make_table(const Run& run, const IterationTrace& trace, bool with_bounds) {
  TraceTable t;
  t.id = run.id;
  t.scheme = std::string(to_string(run.scheme));
  const std::size_t d = run.problem->dimension();
  t.columns.push_back("n");
  if (d == 1) t.columns.push_back("x");
  else
    for (std::size_t i = 0; i < d; ++i) t.columns.push_back("x" + std::to_string(i + 1));
  const bool has_error = !trace.errors.empty();
  if (has_error) t.columns.push_back("error");
  t.columns.push_back("residual");

  std::optional<BoundSequences> bounds;
  if (with_bounds && has_error && trace.steps() > 0)
    bounds = theoretical_bounds(trace.errors[0], run.problem->lipschitz(), trace.schedule,
                                trace.steps());
  if (bounds)
    for (const char* c : {"exp_bound", "a_n", "b_n", "theta_n"}) t.columns.emplace_back(c);

  for (std::size_t n = 0; n < trace.iterates.size(); ++n) {
    std::vector<double> row{static_cast<double>(n)};
    for (double x : trace.iterates[n].coords()) row.push_back(x);
    if (has_error) row.push_back(trace.errors[n]);
    row.push_back(trace.residuals[n]);
    if (bounds) {
      // Row n carries the bound on e_n; the sequences are indexed by the step
      // that produced e_{k+1}.
      const double e0 = trace.errors[0];
      row.push_back(n == 0 ? e0 : bounds->exp_bound[n - 1]);
      row.push_back(n == 0 ? e0 : bounds->a_n[n - 1]);
      row.push_back(n == 0 ? e0 : bounds->b_n[n - 1]);
      row.push_back(n == 0 ? 1.0 : bounds->theta_n[n - 1]);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

class Experiment {
 public:
  Experiment(const ExperimentConfig& config, const RunOptions& options)
      : cfg_(config), opt_(options), seed_(options.seed_override.value_or(config.seed)) {}

  RunOutcome execute();

 private:
  void build_problems();
  void build_cases_and_runs();
  json bounds_analysis();
  json rates_analysis();
  json equivalence_analysis();
  json datadep_analysis();
  json oracle_analysis();
  json reductions_analysis();
  json theta_grid_analysis();
  void violate(std::string what) { out_.violations.push_back(std::move(what)); }

  const ExperimentConfig& cfg_;
  const RunOptions& opt_;
  std::uint64_t seed_;
  std::deque<ContractionProblem> problems_;    // indexed like cfg_.problems
  std::deque<ContractionProblem> perturbed_;   // KOPerturbed operators, one per problem
  std::deque<Case> cases_;
  std::vector<Run> runs_;
  std::vector<IterationTrace> traces_;
  RunOutcome out_;
};

void Experiment::build_problems() {
  for (const auto& spec : cfg_.problems) {
    try {
      problems_.push_back(build_problem(spec));
    } catch (const Error& e) {
      throw Error(ErrorKind::config, "problem '" + spec.id + "': " + e.what());
    }
    const ContractionProblem& p = problems_.back();
    if (cfg_.perturbation) {
      const auto spec_shift = PerturbationSpec::constant_shift(VectorPoint(cfg_.perturbation->shift),
                                                               cfg_.perturbation->epsilon);
      try {
        perturbed_.push_back(make_approximate_operator(p, spec_shift));
      } catch (const Error& e) {
        throw Error(ErrorKind::config, std::string("perturbation: ") + e.what());
      }
    } else {
      perturbed_.push_back(p);
    }
  }
}

void Experiment::build_cases_and_runs() {
  for (std::size_t pi = 0; pi < cfg_.problems.size(); ++pi) {
    for (std::size_t si = 0; si < cfg_.schedules.size(); ++si) {
      Case c{cfg_.problems[pi].id + ".s" + std::to_string(si), pi, si,
             to_schedule(cfg_.schedules[si]), start_for(cfg_, cfg_.problems[pi])};
      cases_.push_back(std::move(c));
    }
  }
  for (const Case& c : cases_) {
    for (SchemeId id : cfg_.schemes) {
      const ContractionProblem* p = id == SchemeId::KOPerturbed ? &perturbed_[c.problem_index]
                                                                : &problems_[c.problem_index];
      runs_.push_back({c.name + "." + std::string(to_string(id)), &c, id, p});
    }
  }
}

json Experiment::bounds_analysis() {
  json runs = json::array();
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    const Run& r = runs_[i];
    const IterationTrace& t = traces_[i];
    if (r.scheme != SchemeId::KO && r.scheme != SchemeId::CR && r.scheme != SchemeId::KOPerturbed) continue;
    if (t.errors.empty() || t.steps() == 0) continue;
    json entry{{"run", r.id}, {"scheme", to_string(r.scheme)}};
    const double delta = r.problem->lipschitz();
    const auto b = theoretical_bounds(t.errors[0], delta, t.schedule, t.steps());

    if (r.scheme != SchemeId::CR) {
      double max_excess = -std::numeric_limits<double>::infinity();
      std::optional<std::size_t> first_fail;
      for (std::size_t n = 0; n + 1 < t.errors.size(); ++n) {
        const double excess = t.errors[n + 1] - b.exp_bound[n];
        max_excess = std::max(max_excess, excess);
        if (!first_fail && excess > kBoundSlack) first_fail = n;
      }
      entry["exp_bound"] = {{"checked_steps", t.steps()},
                            {"holds", !first_fail},
                            {"max_excess", max_excess},
                            {"first_failure", optional_index(first_fail)}};
      if (first_fail)
        violate("exponential bound fails for " + r.id + " at n = " + std::to_string(*first_fail));
    }

    json tight{{"eligible", false}};
    if (r.scheme != SchemeId::KOPerturbed && tightness_eligible(*r.problem, t.schedule) &&
        t.errors[0] > 0.0) {
      const auto exact_errs = exact_error_sequence(*r.problem, r.scheme, t.schedule,
                                                   t.iterates[0], kTightnessSteps + 1);
      const auto closed = theoretical_bounds(exact_errs[0], delta, t.schedule, kTightnessSteps + 1);
      const auto& target = r.scheme == SchemeId::KO ? closed.b_n : closed.a_n;
      double worst = 0.0;
      for (std::size_t n = 0; n <= kTightnessSteps; ++n)
        worst = std::max(worst, std::abs(exact_errs[n + 1] - target[n]) / target[n]);
      tight = {{"eligible", true},
               {"error_source", "exact"},
               {"compared_with", r.scheme == SchemeId::KO ? "b_n" : "a_n"},
               {"steps", kTightnessSteps},
               {"max_rel_error", worst}};
    }
    entry["tightness"] = tight;
    runs.push_back(std::move(entry));
  }

  json cases = json::array();
  for (const Case& c : cases_) {
    const ContractionProblem& p = problems_[c.problem_index];
    const auto b = theoretical_bounds(1.0, p.lipschitz(), c.schedule, kThetaHorizon + 1);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t n = 0; n + 1 < b.theta_n.size(); ++n) {
      const double q = b.theta_n[n + 1] / b.theta_n[n];
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    const auto below = first_below(b.theta_n, kThetaTarget);
    cases.push_back({{"case", c.name},
                     {"delta", p.lipschitz()},
                     {"lower_bounds", {c.schedule.lower_bounds().a1, c.schedule.lower_bounds().a2,
                                       c.schedule.lower_bounds().a3}},
                     {"theta_step_ratio", b.theta_step_ratio},
                     {"theta_consecutive_ratio_min", lo},
                     {"theta_consecutive_ratio_max", hi},
                     {"theta_first_below_1e-6", optional_index(below)},
                     {"theta_horizon", kThetaHorizon}});
  }
  return {{"runs", runs}, {"theta", cases}};
}

json Experiment::rates_analysis() {
  json out = json::array();
  for (const Case& c : cases_) {
    const ContractionProblem& p = problems_[c.problem_index];
    if (!p.fixed_point()) continue;
    const std::size_t h = cfg_.rates.horizon;
    std::vector<double> ea, eb;
    std::string source;
    if (oracle_eligible(p, c.schedule)) {
      ea = exact_error_sequence(p, cfg_.rates.first, c.schedule, c.start, h);
      eb = exact_error_sequence(p, cfg_.rates.second, c.schedule, c.start, h);
      source = "exact";
    } else {
      ea = run_scheme(p, cfg_.rates.first, c.schedule, c.start, {h, std::nullopt}).errors;
      eb = run_scheme(p, cfg_.rates.second, c.schedule, c.start, {h, std::nullopt}).errors;
      source = "floating";
    }
    const RateReport rep = compare_rates(ea, eb);

    json bound = nullptr;
    const bool cr_ko = cfg_.rates.first == SchemeId::CR && cfg_.rates.second == SchemeId::KO;
    const bool ko_cr = cfg_.rates.first == SchemeId::KO && cfg_.rates.second == SchemeId::CR;
    if (cr_ko || ko_cr) {
      const auto b = theoretical_bounds(1.0, p.lipschitz(), c.schedule, h);
      const double theta_last = b.theta_n.back();
      // theta_n is a_n / b_n = CR bound / KO bound.
      const double ratio_last = cr_ko ? theta_last : 1.0 / theta_last;
      bound = {{"theta_step_ratio", b.theta_step_ratio},
               {"theta_n_at_horizon", theta_last},
               {"first_over_second_bound_ratio_at_horizon", ratio_last},
               {"bound_direction", b.theta_step_ratio < 1.0 ? "CR bound decays faster" : "no strict order"}};
    }
    std::string measured;
    switch (rep.classification) {
      case RateClass::first_faster: measured = std::string(to_string(cfg_.rates.first)) + " faster"; break;
      case RateClass::second_faster: measured = std::string(to_string(cfg_.rates.second)) + " faster"; break;
      case RateClass::same_rate: measured = "same rate"; break;
      case RateClass::inconclusive: measured = "inconclusive"; break;
    }
    out.push_back({{"case", c.name},
                   {"first", to_string(cfg_.rates.first)},
                   {"second", to_string(cfg_.rates.second)},
                   {"horizon", h},
                   {"error_source", source},
                   {"empirical_ratios", rep.ratios},
                   {"estimated_limit", rep.estimated_limit},
                   {"classification", to_string(rep.classification)},
                   {"measured_direction", measured},
                   {"bound_ratio", bound},
                   {"notes", kRateDirectionNote}});
  }
  return out;
}

json Experiment::equivalence_analysis() {
  json out = json::array();
  for (const Case& c : cases_) {
    const ContractionProblem& p = problems_[c.problem_index];
    if (!p.fixed_point()) continue;
    const StopRule fixed{cfg_.stop.max_n, std::nullopt};
    const auto ko = run_scheme(p, SchemeId::KO, c.schedule, c.start, fixed);
    const auto cr = run_scheme(p, SchemeId::CR, c.schedule, c.start, fixed);
    const EquivalenceReport rep = equivalence_gap(ko, cr, p);
    // Both runs share x0, so the gap at n = 0 is zero and does not count.
    const auto below = first_below(rep.gaps, kGapThreshold, 1);
    json entry{{"case", c.name},
               {"steps", ko.steps()},
               {"gap_1", rep.gaps.size() > 1 ? json(rep.gaps[1]) : json(nullptr)},
               {"gap_first_below_1e-10", optional_index(below)},
               {"ko_side_recurrence_holds", rep.ko_side_recurrence_holds},
               {"ko_side_first_failure", optional_index(rep.ko_side_first_failure)},
               {"cr_side_recurrence_holds", rep.cr_side_recurrence_holds},
               {"cr_side_first_failure", optional_index(rep.cr_side_first_failure)}};
    if (!rep.ko_side_recurrence_holds) violate("KO-side equivalence recurrence fails on " + c.name);
    if (!rep.cr_side_recurrence_holds) violate("CR-side equivalence recurrence fails on " + c.name);
    if (cfg_.wants(Analysis::lemmas)) {
      const LemmaVerdict v = lemma_recurrence_check(rep.lemma1_data, kLemmaTolerance);
      entry["lemma1"] = {{"hypotheses_hold", v.hypotheses_hold},
                         {"conclusion_holds", v.conclusion_holds},
                         {"coeff_partial_sum", v.coeff_partial_sum},
                         {"tail_max_gap", v.tail_statistic},
                         {"tolerance", kLemmaTolerance},
                         {"kind", "numeric evidence from a finite tail, not a proof"}};
    }
    out.push_back(std::move(entry));
  }
  return out;
}

json Experiment::datadep_analysis() {
  struct Meta {
    std::string c;
    PerturbationMode mode;
    std::uint64_t seed;
  };
  std::vector<DataDependenceRequest> reqs;
  std::vector<Meta> meta;
  std::uint64_t k = 0;
  for (const Case& c : cases_) {
    const ContractionProblem& p = problems_[c.problem_index];
    if (!p.fixed_point())
      throw Error(ErrorKind::config, "datadep needs a known fixed point; problem " + p.name() + " has none");
    for (double eps : cfg_.datadep.epsilons)
      for (PerturbationMode mode : cfg_.datadep.modes)
        for (std::size_t s = 0; s < cfg_.datadep.seeds; ++s, ++k) {
          const std::uint64_t seed = sub_seed(seed_, k);
          DataDependenceRequest r;
          r.problem = &p;
          r.schedule = c.schedule;
          r.x0 = c.start;
          r.stop = {cfg_.datadep.max_n, std::nullopt};
          if (mode == PerturbationMode::seeded_bounded) {
            r.spec = PerturbationSpec::seeded_bounded(seed, eps);
          } else if (cfg_.datadep.shift) {
            r.spec = PerturbationSpec::constant_shift(VectorPoint(*cfg_.datadep.shift), eps);
          } else {
            StreamRng rng(seed, 1);
            std::vector<double> v(p.dimension());
            double sq = 0.0;
            for (double& x : v) {
              x = rng.uniform(-1.0, 1.0);
              sq += x * x;
            }
            const double scale = sq > 0.0 ? eps * rng.uniform(0.5, 1.0) / std::sqrt(sq) : 0.0;
            for (double& x : v) x *= scale;
            // Rounding may push the norm a hair past eps; pull it back.
            VectorPoint shift(v);
            while (norm(shift) > eps) {
              for (double& x : v) x = std::nextafter(x, 0.0);
              shift = VectorPoint(v);
            }
            r.spec = PerturbationSpec::constant_shift(shift, eps);
          }
          reqs.push_back(std::move(r));
          meta.push_back({c.name, mode, seed});
        }
  }

  std::vector<DataDependenceReport> reps;
  try {
    reps = data_dependence_batch(reqs, opt_.execution);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::invalid_argument) throw Error(ErrorKind::config, std::string("datadep: ") + e.what());
    throw;
  }

  json experiments = json::array();
  double min_margin = std::numeric_limits<double>::infinity();
  bool all_recurrence = true;
  bool all_analytic = true;
  bool all_lemma = true;
  std::size_t analytic_count = 0;
  double worst_sharp = 0.0;
  std::set<double> eps_seen, delta_seen;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const auto& r = reps[i];
    json e{{"case", meta[i].c},
           {"mode", to_string(meta[i].mode)},
           {"seed", meta[i].seed},
           {"epsilon", r.epsilon},
           {"delta", r.delta},
           {"bound", r.bound},
           {"observed_gap", r.observed_gap},
           {"margin", r.margin},
           {"steps", r.steps},
           {"recurrence_holds", r.recurrence_holds},
           {"first_recurrence_failure", optional_index(r.first_recurrence_failure)},
           {"analytic_gap", optional_number(r.analytic_gap)}};
    if (r.analytic_gap) {
      const bool match = std::abs(*r.analytic_gap - r.observed_gap) <= 1e-12;
      e["analytic_match"] = match;
      all_analytic = all_analytic && match;
      ++analytic_count;
    }
    if (cfg_.wants(Analysis::lemmas) && r.lemma2_data.a.size() >= 16) {
      const LemmaVerdict v = lemma_recurrence_check(r.lemma2_data, kLemmaTolerance);
      e["lemma2"] = {{"hypotheses_hold", v.hypotheses_hold}, {"conclusion_holds", v.conclusion_holds}};
      all_lemma = all_lemma && v.hypotheses_hold && v.conclusion_holds;
    }
    min_margin = std::min(min_margin, r.margin);
    all_recurrence = all_recurrence && r.recurrence_holds;
    if (r.epsilon > 0.0) worst_sharp = std::max(worst_sharp, r.observed_gap * (1.0 - r.delta) / r.epsilon);
    eps_seen.insert(r.epsilon);
    delta_seen.insert(r.delta);
    if (r.margin < 0.0)
      violate("data dependence bound fails for " + meta[i].c + " seed " + std::to_string(meta[i].seed));
    if (!r.recurrence_holds)
      violate("data dependence recurrence fails for " + meta[i].c + " seed " + std::to_string(meta[i].seed));
    experiments.push_back(std::move(e));
  }
  json agg{{"count", reps.size()},
           {"epsilons", eps_seen},
           {"deltas", delta_seen},
           {"min_margin", reps.empty() ? json(nullptr) : json(min_margin)},
           {"all_recurrences_hold", all_recurrence},
           {"constant_shift_affine_count", analytic_count},
           {"all_analytic_gaps_match", all_analytic},
           {"max_gap_over_eps_div_one_minus_delta", worst_sharp},
           {"sharper_fact", "for constant shifts of affine maps the gap is at most eps/(1-delta), "
                            "so the factor-5 bound is not tight on this family"}};
  if (cfg_.wants(Analysis::lemmas)) agg["all_lemma2_checks_hold"] = all_lemma;
  return {{"aggregate", agg}, {"experiments", experiments}};
}

json Experiment::oracle_analysis() {
  json out = json::array();
  for (const Case& c : cases_) {
    for (SchemeId id : cfg_.schemes) {
      const ContractionProblem& p =
          id == SchemeId::KOPerturbed ? perturbed_[c.problem_index] : problems_[c.problem_index];
      if (!oracle_eligible(p, c.schedule)) continue;
      const auto f = run_scheme(p, id, c.schedule, c.start, {cfg_.oracle.steps, std::nullopt});
      const auto map = exact::RationalAffine::from(*p.affine_form());
      const auto e = exact::exact_run(map, id, c.schedule, exact::to_rational(c.start), cfg_.oracle.steps);
      const auto cmp = exact::compare_traces(f, e, cfg_.oracle.tolerance);
      if (!cmp.pass)
        violate("oracle mismatch for " + c.name + "." + std::string(to_string(id)) + " at step " +
                std::to_string(cmp.worst_step));
      out.push_back({{"case", c.name},
                     {"scheme", to_string(id)},
                     {"steps", cfg_.oracle.steps},
                     {"tolerance", cfg_.oracle.tolerance},
                     {"max_abs_gap", cmp.max_abs_gap},
                     {"worst_step", cmp.worst_step},
                     {"pass", cmp.pass}});
    }
  }
  return out;
}

json Experiment::reductions_analysis() {
  struct Identity {
    const char* name;
    SchemeId lhs;
    SchemeId rhs;
    // Weights fed to each side, given the configured (a1, a2, a3).
    Alphas (*lhs_w)(Alphas);
    Alphas (*rhs_w)(Alphas);
  };
  static const Identity kIdentities[] = {
      {"Noor(a2=a3=0) == Mann", SchemeId::Noor, SchemeId::Mann,
       [](Alphas a) { return Alphas{a.a1, 0.0, 0.0}; }, [](Alphas a) { return a; }},
      {"Noor(a3=0) == Ishikawa", SchemeId::Noor, SchemeId::Ishikawa,
       [](Alphas a) { return Alphas{a.a1, a.a2, 0.0}; }, [](Alphas a) { return a; }},
      {"SP(a3=0) == TwoStepMann", SchemeId::SP, SchemeId::TwoStepMann,
       [](Alphas a) { return Alphas{a.a1, a.a2, 0.0}; }, [](Alphas a) { return a; }},
      {"S(a2=0) == Picard", SchemeId::S, SchemeId::Picard,
       [](Alphas a) { return Alphas{a.a1, 0.0, a.a3}; }, [](Alphas a) { return a; }},
      {"CR(a1=a2=a3=0) == Picard", SchemeId::CR, SchemeId::Picard,
       [](Alphas) { return Alphas{0.0, 0.0, 0.0}; }, [](Alphas a) { return a; }},
      {"KO(a1=0) == Picard", SchemeId::KO, SchemeId::Picard,
       [](Alphas a) { return Alphas{0.0, a.a2, a.a3}; }, [](Alphas a) { return a; }},
      {"KO(a1=a2=a3=1) == T o T o T", SchemeId::KO, SchemeId::Picard,
       [](Alphas) { return Alphas{1.0, 1.0, 1.0}; }, [](Alphas a) { return a; }},
  };

  json out = json::array();
  for (std::size_t pi = 0; pi < problems_.size(); ++pi) {
    const ContractionProblem& p = problems_[pi];
    for (const Identity& id : kIdentities) {
      std::size_t comparisons = 0;
      bool all_equal = true;
      for (const auto& s : cfg_.reductions.starts) {
        const VectorPoint x0(s);
        for (const Alphas& w : cfg_.reductions.weights) {
          const Alphas lw = id.lhs_w(w);
          const Alphas rw = id.rhs_w(w);
          const auto lhs = run_scheme(p, id.lhs, ControlSchedule::constant(lw.a1, lw.a2, lw.a3), x0,
                                      {cfg_.reductions.steps, std::nullopt});
          bool equal = true;
          if (id.lhs == SchemeId::KO && lw == Alphas{1.0, 1.0, 1.0}) {
            // One KO step against three applications of T, step by step.
            for (std::size_t n = 0; n + 1 < lhs.iterates.size(); ++n)
              equal = equal && lhs.iterates[n + 1] == p.apply(p.apply(p.apply(lhs.iterates[n])));
          } else {
            const auto rhs = run_scheme(p, id.rhs, ControlSchedule::constant(rw.a1, rw.a2, rw.a3),
                                        x0, {cfg_.reductions.steps, std::nullopt});
            equal = lhs.iterates == rhs.iterates;
          }
          all_equal = all_equal && equal;
          ++comparisons;
        }
      }
      if (!all_equal) violate(std::string("reduction identity fails: ") + id.name + " on " + p.name());
      out.push_back({{"problem", cfg_.problems[pi].id},
                     {"identity", id.name},
                     {"starts", cfg_.reductions.starts.size()},
                     {"steps", cfg_.reductions.steps},
                     {"comparisons", comparisons},
                     {"bit_exact", all_equal}});
    }
  }
  return out;
}

json Experiment::theta_grid_analysis() {
  json cells = json::array();
  std::size_t interior = 0, interior_pass = 0, boundary = 0, boundary_exact = 0;
  for (double d : cfg_.theta_grid.deltas)
    for (double a1 : cfg_.theta_grid.alpha1)
      for (auto [a2, a3] : cfg_.theta_grid.alpha23) {
        const ThetaRatio t = theta_ratio_test(d, {a1, a2, a3});
        const bool at_boundary = a1 == 1.0;
        if (at_boundary) {
          ++boundary;
          if (t.ratio == 1.0) ++boundary_exact;
        } else {
          ++interior;
          if (t.passes) ++interior_pass;
        }
        cells.push_back({{"delta", d}, {"alpha", {a1, a2, a3}}, {"ratio", t.ratio}, {"passes", t.passes}});
      }
  return {{"interior_cells", interior},
          {"interior_below_one", interior_pass},
          {"boundary_cells", boundary},
          {"boundary_exactly_one", boundary_exact},
          {"cells", cells}};
}

RunOutcome Experiment::execute() {
  build_problems();
  build_cases_and_runs();

  std::vector<RunRequest> reqs;
  reqs.reserve(runs_.size());
  for (const Run& r : runs_) reqs.push_back({r.problem, r.scheme, r.c->schedule, r.c->start, cfg_.stop});
  traces_ = run_batch(reqs, opt_.execution);

  const bool with_bounds = cfg_.wants(Analysis::bounds);
  json runs = json::array();
  std::vector<TraceTable> tables;
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    const Run& r = runs_[i];
    const IterationTrace& t = traces_[i];
    tables.push_back(make_table(r, t, with_bounds));
    runs.push_back({{"id", r.id},
                    {"case", r.c->name},
                    {"problem", cfg_.problems[r.c->problem_index].id},
                    {"schedule", r.c->schedule_index},
                    {"schedule_description", r.c->schedule.describe()},
                    {"scheme", to_string(r.scheme)},
                    {"delta", r.problem->lipschitz()},
                    {"steps", t.steps()},
                    {"termination", to_string(t.termination)},
                    {"final_error", t.errors.empty() ? json(nullptr) : json(t.errors.back())},
                    {"final_residual", t.residuals.back()},
                    {"csv", "runs/" + r.id + ".csv"}});
  }

  json analyses = json::object();
  if (cfg_.wants(Analysis::bounds)) analyses["bounds"] = bounds_analysis();
  if (cfg_.wants(Analysis::rates)) analyses["rates"] = rates_analysis();
  if (cfg_.wants(Analysis::equivalence)) analyses["equivalence"] = equivalence_analysis();
  if (cfg_.wants(Analysis::datadep)) analyses["datadep"] = datadep_analysis();
  if (cfg_.wants(Analysis::oracle)) analyses["oracle"] = oracle_analysis();
  if (cfg_.wants(Analysis::reductions)) analyses["reductions"] = reductions_analysis();
  if (cfg_.wants(Analysis::theta_grid)) analyses["theta_grid"] = theta_grid_analysis();

  json requested = json::array();
  for (Analysis a : cfg_.analyses) requested.push_back(to_string(a));
  out_.summary = {{"config", cfg_.name},
                  {"seed", seed_},
                  {"analyses_requested", requested},
                  {"runs", runs},
                  {"analyses", analyses},
                  {"violations", out_.violations}};

  out_.bundle_dir = opt_.output_root / cfg_.output_dir;
  if (!opt_.write_outputs) return std::move(out_);

  std::map<std::string, std::string> files;  // sorted by path
  for (const auto& t : tables) files["runs/" + t.id + ".csv"] = to_csv(t);
  std::map<std::string, std::vector<TraceTable>> by_case;
  for (std::size_t i = 0; i < runs_.size(); ++i) by_case[runs_[i].c->name].push_back(tables[i]);
  for (const auto& [name, group] : by_case) files["plots/" + name + ".svg"] = render_svg(name, group);
  files["summary.json"] = out_.summary.dump(2) + "\n";

  json listing = json::array();
  for (const auto& [rel, data] : files) {
    write_file(out_.bundle_dir, rel, data);
    listing.push_back({{"path", rel}, {"sha256", sha256_hex(data)}, {"bytes", data.size()}});
  }
  const json manifest{{"config", cfg_.name}, {"seed", seed_}, {"files", listing}};
  write_file(out_.bundle_dir, "manifest.json", manifest.dump(2) + "\n");
  return std::move(out_);
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::invalid_argument:
    case ErrorKind::dimension_mismatch:
    case ErrorKind::not_contractive:
      return exit_malformed_config;
    case ErrorKind::inadmissible_schedule: return exit_inadmissible_schedule;
    case ErrorKind::bound_violation: return exit_bound_violation;
    case ErrorKind::non_finite:
    case ErrorKind::numeric_fault: return exit_numeric_fault;
    case ErrorKind::io: return exit_io;
  }
  return exit_failure;
}

fs::path output_root_from_env() {
  const char* env = std::getenv("FPI_OUTPUT_ROOT");
  if (env != nullptr && *env != '\0') return env;
  return "fpi-out";
}

RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  Experiment e(config, options);
  return e.execute();
}

}  // namespace fpi::harness
