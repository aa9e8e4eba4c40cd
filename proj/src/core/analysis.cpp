#include "fpi/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fpi/error.hpp"

namespace fpi {

namespace {

constexpr double kUnderflowFloor = 1e-300;
constexpr double kRecurrenceSlack = 1e-12;

void require_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw Error(ErrorKind::invalid_argument,
                "delta must lie in (0, 1), got " + std::to_string(delta));
}

void require_open_closed_unit(Alphas a) {
  for (double v : {a.a1, a.a2, a.a3}) {
    if (!(v > 0.0 && v <= 1.0))
      throw Error(ErrorKind::invalid_argument,
                  "bound weights must lie in (0, 1], got " + std::to_string(v));
  }
}

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return lo + (hi - lo) / 2.0;
}

std::size_t tail_start(std::size_t n, double fraction) {
  const auto len = std::max<std::size_t>(1, static_cast<std::size_t>(static_cast<double>(n) * fraction));
  return n - std::min(len, n);
}

}  // namespace

std::vector<double> error_sequence(const IterationTrace& trace, const VectorPoint& x_star) {
  std::vector<double> out;
  out.reserve(trace.iterates.size());
  for (const auto& x : trace.iterates) out.push_back(distance(x, x_star));
  return out;
}

std::optional<std::size_t> first_below(std::span<const double> values, double threshold,
                                       std::size_t from) {
  for (std::size_t n = from; n < values.size(); ++n)
    if (values[n] < threshold) return n;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

std::string_view to_string(RateClass c) {
  switch (c) {
    case RateClass::first_faster: return "first_faster";
    case RateClass::same_rate: return "same_rate";
    case RateClass::second_faster: return "second_faster";
    case RateClass::inconclusive: return "inconclusive";
  }
  return "?";
}

RateReport compare_rates(std::span<const double> err_a, std::span<const double> err_b,
                         RateThresholds thresholds) {
  if (err_a.size() != err_b.size())
    throw Error(ErrorKind::invalid_argument, "compare_rates: sequences differ in length");
  if (err_a.size() < 8)
    throw Error(ErrorKind::invalid_argument, "compare_rates: need at least 8 entries");

  RateReport report;
  for (std::size_t n = 0; n < err_a.size(); ++n) {
    const double den = std::abs(err_b[n]);
    if (!(den >= kUnderflowFloor)) break;
    report.ratios.push_back(std::abs(err_a[n]) / den);
  }
  if (report.ratios.empty()) {
    report.estimated_limit = std::numeric_limits<double>::quiet_NaN();
    report.classification = RateClass::inconclusive;
    return report;
  }

  const std::size_t start = tail_start(report.ratios.size(), 0.25);
  report.estimated_limit =
      median({report.ratios.begin() + static_cast<std::ptrdiff_t>(start), report.ratios.end()});
  const double l = report.estimated_limit;
  if (std::isnan(l))
    report.classification = RateClass::inconclusive;
  else if (l < thresholds.lower)
    report.classification = RateClass::first_faster;
  else if (l > thresholds.upper)
    report.classification = RateClass::second_faster;
  else
    report.classification = RateClass::same_rate;
  return report;
}

// ---------------------------------------------------------------------------

ThetaRatio theta_ratio_test(double delta, Alphas alphas) {
  require_delta(delta);
  require_open_closed_unit(alphas);
  const double c = 1.0 - delta;
  const double den = 1.0 - alphas.a1 * (1.0 - delta * (1.0 - alphas.a2 * alphas.a3 * c));
  if (!(den > 0.0))
    throw Error(ErrorKind::numeric_fault,
                "theta ratio denominator is not positive: " + std::to_string(den));
  // denominator - numerator = a2 a3 (1-d)(1-a1)
  const double gap = alphas.a2 * alphas.a3 * c * (1.0 - alphas.a1);
  ThetaRatio out;
  out.ratio = 1.0 - gap / den;
  out.passes = out.ratio < 1.0;
  return out;
}

namespace {

BoundSequences closed_forms(double e0, double delta, Alphas lo, std::size_t count) {
  const double c = 1.0 - delta;
  const double ko_factor = delta * (1.0 - lo.a1 * (1.0 - delta * (1.0 - lo.a2 * lo.a3 * c)));
  const double cr_factor = delta * (1.0 - lo.a1 * c) * (1.0 - lo.a2 * lo.a3 * c);

  BoundSequences s;
  s.theta_step_ratio = theta_ratio_test(delta, lo).ratio;
  s.b_n.reserve(count);
  s.a_n.reserve(count);
  s.theta_n.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const double k = static_cast<double>(n + 1);
    s.b_n.push_back(e0 * std::pow(ko_factor, k));
    s.a_n.push_back(e0 * std::pow(cr_factor, k));
    s.theta_n.push_back(std::pow(s.theta_step_ratio, k));
  }
  return s;
}

}  // namespace

BoundSequences theoretical_bounds(double e0, double delta, Alphas alphas, std::size_t count) {
  require_delta(delta);
  require_open_closed_unit(alphas);
  BoundSequences s = closed_forms(e0, delta, alphas, count);
  s.exp_bound.reserve(count);
  for (std::size_t n = 0; n < count; ++n)
    s.exp_bound.push_back(e0 / std::exp((1.0 - delta) * static_cast<double>(n + 1) * alphas.a1));
  return s;
}

BoundSequences theoretical_bounds(double e0, double delta, const ControlSchedule& schedule,
                                  std::size_t count) {
  require_delta(delta);
  if (!schedule.bounded_below())
    throw Error(ErrorKind::inadmissible_schedule,
                "closed-form bounds need every weight bounded below by a positive constant; "
                "schedule " + schedule.describe() + " is not");
  BoundSequences s = closed_forms(e0, delta, schedule.lower_bounds(), count);
  s.exp_bound.reserve(count);
  for (std::size_t n = 0; n < count; ++n)
    s.exp_bound.push_back(e0 / std::exp((1.0 - delta) * schedule.component(0).partial_sum(n)));
  return s;
}

// ---------------------------------------------------------------------------

LemmaVerdict lemma_recurrence_check(const LemmaRecurrence& r, double tolerance,
                                    LemmaCheckOptions options) {
  const std::size_t n = r.a.size();
  if (r.coeff.size() != n || r.forcing.size() != n)
    throw Error(ErrorKind::invalid_argument, "lemma check: sequences differ in length");
  if (n < 16) throw Error(ErrorKind::invalid_argument, "lemma check: need at least 16 entries");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(r.a[i] >= 0.0) || !(r.forcing[i] >= 0.0))
      throw Error(ErrorKind::invalid_argument,
                  "lemma check: negative entry at index " + std::to_string(i));
    if (!(r.coeff[i] > 0.0 && r.coeff[i] < 1.0))
      throw Error(ErrorKind::invalid_argument,
                  "lemma check: coefficient outside (0, 1) at index " + std::to_string(i));
  }

  LemmaVerdict v;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double forcing =
        r.kind == LemmaKind::lemma1 ? r.forcing[i] : r.coeff[i] * r.forcing[i];
    const double rhs = (1.0 - r.coeff[i]) * r.a[i] + forcing;
    if (r.a[i + 1] > rhs + options.slack) {
      v.first_recurrence_failure = i;
      break;
    }
  }
  for (double c : r.coeff) v.coeff_partial_sum += c;
  const bool recurrence_ok = !v.first_recurrence_failure;
  const bool diverging = v.coeff_partial_sum > options.partial_sum_threshold;

  const std::size_t start = tail_start(n, options.tail_fraction);
  double tail_a = 0.0;
  double tail_other = 0.0;
  for (std::size_t i = start; i < n; ++i) {
    tail_a = std::max(tail_a, r.a[i]);
    const double other =
        r.kind == LemmaKind::lemma1 ? r.forcing[i] / r.coeff[i] : r.forcing[i];
    tail_other = std::max(tail_other, other);
  }

  if (r.kind == LemmaKind::lemma1) {
    v.hypotheses_hold = recurrence_ok && diverging && tail_other <= tolerance;
    v.tail_statistic = tail_a;
    v.conclusion_holds = tail_a <= tolerance;
  } else {
    v.hypotheses_hold = recurrence_ok && diverging;
    v.tail_statistic = tail_a - tail_other;
    v.conclusion_holds = tail_a <= tail_other + tolerance;
  }
  return v;
}

// ---------------------------------------------------------------------------

EquivalenceReport equivalence_gap(const IterationTrace& ko, const IterationTrace& cr,
                                  const ContractionProblem& problem) {
  if (ko.scheme != SchemeId::KO || cr.scheme != SchemeId::CR)
    throw Error(ErrorKind::invalid_argument, "equivalence_gap: expects a KO and a CR trace");
  if (ko.iterates.size() != cr.iterates.size())
    throw Error(ErrorKind::invalid_argument, "equivalence_gap: traces differ in length");
  if (!(ko.schedule == cr.schedule))
    throw Error(ErrorKind::invalid_argument, "equivalence_gap: traces use different schedules");
  if (!(ko.iterates.front() == cr.iterates.front()))
    throw Error(ErrorKind::invalid_argument, "equivalence_gap: traces start at different points");
  const auto& x_star = problem.fixed_point();
  if (!x_star)
    throw Error(ErrorKind::invalid_argument, "equivalence_gap: problem has no known fixed point");

  const double delta = problem.lipschitz();
  const std::size_t n = ko.iterates.size();
  EquivalenceReport rep;
  rep.gaps.reserve(n);
  for (std::size_t i = 0; i < n; ++i) rep.gaps.push_back(distance(ko.iterates[i], cr.iterates[i]));

  rep.lemma1_data.kind = LemmaKind::lemma1;
  rep.lemma1_data.a = rep.gaps;
  for (std::size_t i = 0; i < n; ++i) {
    const Alphas a = ko.schedule.at(i);
    const double ko_err = distance(ko.iterates[i], *x_star);
    const double cr_err = distance(cr.iterates[i], *x_star);
    const double contraction = 1.0 - a.a1 * (1.0 - delta);
    const double ko_forcing = (1.0 - a.a1) * (2.0 + a.a2 * delta * a.a3) * (1.0 + delta) * ko_err;
    const double cr_forcing = (1.0 - a.a1) * a.a2 * delta * a.a3 * (1.0 + delta) * cr_err;

    rep.lemma1_data.coeff.push_back(a.a1 * (1.0 - delta));
    rep.lemma1_data.forcing.push_back(ko_forcing);

    if (i + 1 == n) break;
    const double next = rep.gaps[i + 1];
    if (rep.ko_side_recurrence_holds &&
        next > contraction * rep.gaps[i] + ko_forcing + kRecurrenceSlack) {
      rep.ko_side_recurrence_holds = false;
      rep.ko_side_first_failure = i;
    }
    if (rep.cr_side_recurrence_holds &&
        next > contraction * rep.gaps[i] + cr_forcing + kRecurrenceSlack) {
      rep.cr_side_recurrence_holds = false;
      rep.cr_side_first_failure = i;
    }
  }
  return rep;
}

}  // namespace fpi
