#include "fpi/schemes.hpp"

#include <string>

#include "fpi/error.hpp"

namespace fpi {

namespace {

void require_weight(double a, const char* name) {
  if (!(a >= 0.0 && a <= 1.0)) {
    throw Error(ErrorKind::invalid_argument,
                std::string("weight ") + name + " = " + std::to_string(a) +
                    " outside [0, 1]");
  }
}

void require_weights(Alphas a) {
  require_weight(a.a1, "alpha1");
  require_weight(a.a2, "alpha2");
  require_weight(a.a3, "alpha3");
}

Error non_finite_at(SchemeId scheme, std::size_t step) {
  return Error(ErrorKind::numeric_fault,
               std::string(to_string(scheme)) + ": non-finite iterate at step " +
                   std::to_string(step) + " (is the map really a contraction?)");
}

/// T(x_n) for the residual. Overflow here is the same overflow the next
/// step would hit, so it is reported against that step.
VectorPoint apply_checked(const ContractionProblem& problem, const VectorPoint& x,
                          SchemeId scheme, std::size_t step) {
  try {
    return problem.apply(x);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::non_finite) throw;
    throw non_finite_at(scheme, step);
  }
}

}  // namespace

std::string_view to_string(SchemeId id) {
  switch (id) {
    case SchemeId::Picard: return "Picard";
    case SchemeId::Mann: return "Mann";
    case SchemeId::Ishikawa: return "Ishikawa";
    case SchemeId::Noor: return "Noor";
    case SchemeId::SP: return "SP";
    case SchemeId::TwoStepMann: return "TwoStepMann";
    case SchemeId::S: return "S";
    case SchemeId::CR: return "CR";
    case SchemeId::KO: return "KO";
    case SchemeId::KOPerturbed: return "KOPerturbed";
  }
  return "?";
}

std::optional<SchemeId> parse_scheme(std::string_view tag) {
  for (SchemeId id : kAllSchemes)
    if (to_string(id) == tag) return id;
  return std::nullopt;
}

int scheme_arity(SchemeId id) {
  switch (id) {
    case SchemeId::Picard: return 0;
    case SchemeId::Mann: return 1;
    case SchemeId::Ishikawa:
    case SchemeId::TwoStepMann:
    case SchemeId::S: return 2;
    default: return 3;
  }
}

std::string_view to_string(Termination t) {
  return t == Termination::reached_tolerance ? "reached_tolerance" : "reached_max_n";
}

VectorPoint step_picard(const ContractionProblem& p, const VectorPoint& x) {
  return p.apply(x);
}

VectorPoint step_mann(const ContractionProblem& p, const VectorPoint& x, double a1) {
  require_weight(a1, "alpha1");
  return blend(x, p.apply(x), a1);
}

VectorPoint step_ishikawa(const ContractionProblem& p, const VectorPoint& x, double a1,
                          double a2) {
  require_weight(a1, "alpha1");
  require_weight(a2, "alpha2");
  const VectorPoint y = blend(x, p.apply(x), a2);
  return blend(x, p.apply(y), a1);
}

VectorPoint step_two_step_mann(const ContractionProblem& p, const VectorPoint& x, double a1,
                               double a2) {
  require_weight(a1, "alpha1");
  require_weight(a2, "alpha2");
  const VectorPoint y = blend(x, p.apply(x), a2);
  return blend(y, p.apply(y), a1);
}

VectorPoint step_noor_family(const ContractionProblem& p, const VectorPoint& x, Alphas a) {
  require_weights(a);
  const VectorPoint z = blend(x, p.apply(x), a.a3);
  const VectorPoint y = blend(x, p.apply(z), a.a2);
  return blend(x, p.apply(y), a.a1);
}

VectorPoint step_sp_family(const ContractionProblem& p, const VectorPoint& x, Alphas a) {
  require_weights(a);
  const VectorPoint z = blend(x, p.apply(x), a.a3);
  const VectorPoint y = blend(z, p.apply(z), a.a2);
  return blend(y, p.apply(y), a.a1);
}

VectorPoint step_s(const ContractionProblem& p, const VectorPoint& s, double a1, double a2) {
  require_weight(a1, "alpha1");
  require_weight(a2, "alpha2");
  const VectorPoint ts = p.apply(s);
  const VectorPoint t = blend(s, ts, a2);
  return blend(ts, p.apply(t), a1);
}

VectorPoint step_cr(const ContractionProblem& p, const VectorPoint& u, Alphas a) {
  require_weights(a);
  const VectorPoint tu = p.apply(u);
  const VectorPoint y = blend(u, tu, a.a3);
  const VectorPoint v = blend(tu, p.apply(y), a.a2);
  return blend(v, p.apply(v), a.a1);
}

VectorPoint step_ko(const ContractionProblem& p, const VectorPoint& x, Alphas a) {
  require_weights(a);
  const VectorPoint tp = p.apply(x);
  const VectorPoint r = blend(x, tp, a.a3);
  const VectorPoint q = blend(tp, p.apply(r), a.a2);
  return blend(tp, p.apply(q), a.a1);
}

VectorPoint step_ko_perturbed(const ContractionProblem& approx, const VectorPoint& x,
                              Alphas a) {
  return step_ko(approx, x, a);
}

VectorPoint step(SchemeId id, const ContractionProblem& p, const VectorPoint& x, Alphas a) {
  switch (id) {
    case SchemeId::Picard: return step_picard(p, x);
    case SchemeId::Mann: return step_mann(p, x, a.a1);
    case SchemeId::Ishikawa: return step_ishikawa(p, x, a.a1, a.a2);
    case SchemeId::Noor: return step_noor_family(p, x, a);
    case SchemeId::SP: return step_sp_family(p, x, a);
    case SchemeId::TwoStepMann: return step_two_step_mann(p, x, a.a1, a.a2);
    case SchemeId::S: return step_s(p, x, a.a1, a.a2);
    case SchemeId::CR: return step_cr(p, x, a);
    case SchemeId::KO: return step_ko(p, x, a);
    case SchemeId::KOPerturbed: return step_ko_perturbed(p, x, a);
  }
  throw Error(ErrorKind::invalid_argument, "unknown scheme");
}

IterationTrace run_scheme(const ContractionProblem& problem, SchemeId scheme,
                          const ControlSchedule& schedule, const VectorPoint& x0,
                          const StopRule& stop) {
  if (x0.dimension() != problem.dimension()) {
    throw Error(ErrorKind::dimension_mismatch,
                "run_scheme: x0 has dimension " + std::to_string(x0.dimension()) +
                    ", problem has " + std::to_string(problem.dimension()));
  }
  const auto& x_star = problem.fixed_point();

  IterationTrace trace{scheme, schedule, {}, {}, {}, Termination::reached_max_n};
  trace.iterates.reserve(stop.max_n + 1);
  trace.residuals.reserve(stop.max_n + 1);
  if (x_star) trace.errors.reserve(stop.max_n + 1);

  VectorPoint x = x0;
  for (std::size_t n = 0;; ++n) {
    const double residual = distance(x, apply_checked(problem, x, scheme, n + 1));
    trace.residuals.push_back(residual);
    double metric = residual;
    if (x_star) {
      metric = distance(x, *x_star);
      trace.errors.push_back(metric);
    }
    trace.iterates.push_back(x);

    if (stop.tolerance && metric <= *stop.tolerance) {
      trace.termination = Termination::reached_tolerance;
      break;
    }
    if (n == stop.max_n) break;

    try {
      x = step(scheme, problem, x, schedule.at(n));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::non_finite) throw;
      throw non_finite_at(scheme, n + 1);
    }
  }
  return trace;
}

}  // namespace fpi
