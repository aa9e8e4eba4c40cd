#include "fpi/harness/acceptance.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "fpi/error.hpp"
#include "fpi/schemes.hpp"

namespace fpi::harness {

namespace {

using nlohmann::json;

struct Criterion {
  int number;
  const char* title;
  const char* config;
};

constexpr Criterion kCriteria[] = {
    {1, "convergence of all ten schemes", "c1-convergence"},
    {2, "exponential bound on KO errors", "c2-exp-bound"},
    {3, "bound tightness for KO and CR", "c3-tightness"},
    {4, "theta ratio test", "c4-theta"},
    {5, "KO/CR equivalence", "c5-equivalence"},
    {6, "data dependence bound", "c6-datadep"},
    {7, "oracle equivalence", "c7-oracle"},
    {8, "reduction identities", "c8-reductions"},
    {9, "rate direction report", "standard-ko-vs-cr"},
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const json& analysis(const json& summary, const char* name) {
  const auto& a = summary.at("analyses");
  if (!a.contains(name)) throw Error(ErrorKind::config, std::string("summary lacks analysis ") + name);
  return a.at(name);
}

CriterionResult judge1(const json& s) {
  std::set<std::string> converged;
  long long ko_steps = -1;
  for (const auto& r : s.at("runs")) {
    const std::string scheme = r.at("scheme");
    if (!r.at("final_error").is_null() && r.at("final_error").get<double>() < 1e-10 &&
        r.at("steps").get<long long>() <= 200)
      converged.insert(scheme);
    if (scheme == "KO") ko_steps = r.at("steps").get<long long>();
  }
  const bool pass = converged.size() == kAllSchemes.size() && ko_steps == 24;
  return {1, "", "", pass,
          std::to_string(converged.size()) + "/10 schemes below 1e-10 within 200 steps; KO stops at n = " +
              std::to_string(ko_steps)};
}

CriterionResult judge2(const json& s) {
  std::size_t checked = 0;
  bool all = true;
  double worst = -INFINITY;
  std::set<double> deltas;
  std::map<std::string, double> delta_of;
  for (const auto& r : s.at("runs")) delta_of[r.at("id")] = r.at("delta").get<double>();
  for (const auto& b : analysis(s, "bounds").at("runs")) {
    if (b.at("scheme") != "KO") continue;
    const auto& e = b.at("exp_bound");
    ++checked;
    all = all && e.at("holds").get<bool>() && e.at("checked_steps").get<long long>() >= 101;
    worst = std::max(worst, e.at("max_excess").get<double>());
    deltas.insert(delta_of.at(b.at("run")));
  }
  const bool pass = all && checked >= 3 && deltas.contains(0.3) && deltas.contains(0.5) &&
                    deltas.contains(0.9);
  return {2, "", "", pass,
          std::to_string(checked) + " KO runs, n <= 100, max(e_{n+1} - exp_bound_n) = " + num(worst)};
}

CriterionResult judge3(const json& s) {
  std::size_t ko = 0, cr = 0;
  bool all = true;
  double worst = 0.0;
  for (const auto& b : analysis(s, "bounds").at("runs")) {
    const auto& t = b.at("tightness");
    if (!t.at("eligible").get<bool>()) {
      all = false;
      continue;
    }
    const double e = t.at("max_rel_error").get<double>();
    worst = std::max(worst, e);
    all = all && e <= 1e-12 && t.at("steps").get<long long>() >= 50;
    (b.at("scheme") == "KO" ? ko : cr) += 1;
  }
  return {3, "", "", all && ko > 0 && cr > 0,
          std::to_string(ko) + " KO and " + std::to_string(cr) +
              " CR runs against b_n / a_n for n <= 50, max relative error " + num(worst)};
}

CriterionResult judge4(const json& s) {
  const double target = 21.0 / 23.0;
  bool std_ok = false;
  std::string detail;
  for (const auto& c : analysis(s, "bounds").at("theta")) {
    const double lo = c.at("theta_consecutive_ratio_min");
    const double hi = c.at("theta_consecutive_ratio_max");
    const auto& below = c.at("theta_first_below_1e-6");
    const bool ok = std::abs(lo - target) <= 1e-12 && std::abs(hi - target) <= 1e-12 &&
                    !below.is_null() && below.get<long long>() <= 200;
    std_ok = std_ok || ok;
    detail = "theta ratio in [" + num(lo) + ", " + num(hi) + "], theta_n < 1e-6 at n = " +
             (below.is_null() ? std::string("never") : std::to_string(below.get<long long>()));
  }
  const auto& g = analysis(s, "theta_grid");
  const auto interior = g.at("interior_cells").get<long long>();
  const bool grid_ok = interior >= 27 && g.at("interior_below_one") == interior &&
                       g.at("boundary_cells").get<long long>() > 0 &&
                       g.at("boundary_exactly_one") == g.at("boundary_cells");
  return {4, "", "", std_ok && grid_ok,
          detail + "; grid " + std::to_string(g.at("interior_below_one").get<long long>()) + "/" +
              std::to_string(interior) + " below 1, boundary " +
              std::to_string(g.at("boundary_exactly_one").get<long long>()) + "/" +
              std::to_string(g.at("boundary_cells").get<long long>()) + " exactly 1"};
}

CriterionResult judge5(const json& s) {
  bool all = true;
  std::string detail;
  for (const auto& e : analysis(s, "equivalence")) {
    const auto& below = e.at("gap_first_below_1e-10");
    const bool lemma = e.contains("lemma1") && e["lemma1"].at("hypotheses_hold").get<bool>() &&
                       e["lemma1"].at("conclusion_holds").get<bool>();
    all = all && !below.is_null() && below.get<long long>() <= 200 &&
          e.at("ko_side_recurrence_holds").get<bool>() && lemma;
    detail = "gap < 1e-10 at n = " + (below.is_null() ? std::string("never") : std::to_string(below.get<long long>())) +
             ", KO-side recurrence " + (e.at("ko_side_recurrence_holds").get<bool>() ? "holds" : "fails") +
             ", lemma-1 check " + (lemma ? "satisfied" : "not satisfied");
  }
  return {5, "", "", all && !analysis(s, "equivalence").empty(), detail};
}

CriterionResult judge6(const json& s) {
  const auto& agg = analysis(s, "datadep").at("aggregate");
  const auto count = agg.at("count").get<long long>();
  std::set<double> eps = agg.at("epsilons").get<std::set<double>>();
  std::set<double> deltas = agg.at("deltas").get<std::set<double>>();
  const bool coverage = eps.contains(0.01) && eps.contains(0.1) && deltas.contains(0.3) &&
                        deltas.contains(0.5) && deltas.contains(0.9);
  const double margin = agg.at("min_margin").is_null() ? -INFINITY : agg.at("min_margin").get<double>();
  const bool pass = count >= 100 && coverage && margin >= 0.0 &&
                    agg.at("all_recurrences_hold").get<bool>() &&
                    agg.at("constant_shift_affine_count").get<long long>() > 0 &&
                    agg.at("all_analytic_gaps_match").get<bool>();
  return {6, "", "", pass,
          std::to_string(count) + " experiments, min margin " + num(margin) + ", recurrence " +
              (agg.at("all_recurrences_hold").get<bool>() ? "holds" : "fails") + ", " +
              std::to_string(agg.at("constant_shift_affine_count").get<long long>()) +
              " analytic gaps " + (agg.at("all_analytic_gaps_match").get<bool>() ? "match" : "differ")};
}

CriterionResult judge7(const json& s) {
  std::set<std::string> passed;
  double worst = 0.0;
  for (const auto& o : analysis(s, "oracle")) {
    worst = std::max(worst, o.at("max_abs_gap").get<double>());
    if (o.at("pass").get<bool>() && o.at("steps").get<long long>() >= 50 &&
        o.at("tolerance").get<double>() <= 1e-12)
      passed.insert(o.at("scheme"));
  }
  return {7, "", "", passed.size() == kAllSchemes.size(),
          std::to_string(passed.size()) + "/10 schemes within 1e-12 over 50 steps, max gap " + num(worst)};
}

CriterionResult judge8(const json& s) {
  std::set<std::string> exact;
  std::size_t total = 0;
  for (const auto& r : analysis(s, "reductions")) {
    ++total;
    if (r.at("bit_exact").get<bool>() && r.at("starts").get<long long>() >= 3 &&
        r.at("steps").get<long long>() >= 50)
      exact.insert(r.at("identity"));
  }
  std::set<std::string> all;
  for (const auto& r : analysis(s, "reductions")) all.insert(r.at("identity"));
  bool every = true;
  for (const auto& r : analysis(s, "reductions")) every = every && r.at("bit_exact").get<bool>();
  return {8, "", "", every && exact.size() == 7 && all.size() == 7,
          std::to_string(exact.size()) + "/7 identities bit-exact over 50 steps and >= 3 starts"};
}

CriterionResult judge9(const json& s) {
  bool pass = false;
  std::string detail = "no CR-vs-KO rate report";
  for (const auto& r : analysis(s, "rates")) {
    if (r.at("first") != "CR" || r.at("second") != "KO") continue;
    const double l = r.at("estimated_limit").is_null() ? NAN : r.at("estimated_limit").get<double>();
    const bool fields = !r.at("empirical_ratios").empty() && !r.at("bound_ratio").is_null() &&
                        r.at("bound_ratio").contains("theta_step_ratio") &&
                        r.at("notes").get<std::string>().find("wording conflict") != std::string::npos;
    pass = r.at("classification") == "first_faster" && l <= 0.01 && fields;
    detail = "classification " + r.at("classification").get<std::string>() + ", limit " + num(l) +
             ", theta step ratio " + num(r.at("bound_ratio").at("theta_step_ratio").get<double>()) +
             (fields ? ", notes present" : ", report fields missing");
  }
  return {9, "", "", pass, detail};
}

}  // namespace

std::string criterion_config(int number) {
  for (const auto& c : kCriteria)
    if (c.number == number) return c.config;
  throw Error(ErrorKind::invalid_argument, "no criterion " + std::to_string(number));
}

CriterionResult judge_criterion(int number, const json& summary) {
  CriterionResult r;
  switch (number) {
    case 1: r = judge1(summary); break;
    case 2: r = judge2(summary); break;
    case 3: r = judge3(summary); break;
    case 4: r = judge4(summary); break;
    case 5: r = judge5(summary); break;
    case 6: r = judge6(summary); break;
    case 7: r = judge7(summary); break;
    case 8: r = judge8(summary); break;
    case 9: r = judge9(summary); break;
    default: throw Error(ErrorKind::invalid_argument, "no criterion " + std::to_string(number));
  }
  for (const auto& c : kCriteria)
    if (c.number == number) {
      r.title = c.title;
      r.config = c.config;
    }
  // Any recorded violation fails the criterion regardless of its own checks.
  if (summary.contains("violations") && !summary["violations"].empty()) {
    r.pass = false;
    r.detail += "; violations: " + summary["violations"][0].get<std::string>();
  }
  return r;
}

std::vector<CriterionResult> verify_builtin(Execution exec) {
  std::vector<CriterionResult> out;
  for (const auto& c : kCriteria) {
    try {
      const auto text = builtin_config_text(c.config);
      if (!text) throw Error(ErrorKind::config, std::string("missing built-in config ") + c.config);
      RunOptions opt;
      opt.write_outputs = false;
      opt.execution = exec;
      const RunOutcome o = run_experiment(parse_config(*text), opt);
      out.push_back(judge_criterion(c.number, o.summary));
    } catch (const std::exception& e) {
      out.push_back({c.number, c.title, c.config, false, std::string("error: ") + e.what()});
    }
  }
  return out;
}

}  // namespace fpi::harness
