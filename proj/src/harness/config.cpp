#include "fpi/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fpi/error.hpp"

namespace fpi::harness {

namespace {

using nlohmann::json;

struct BuiltinConfig {
  std::string_view name;
  std::string_view text;
};

constexpr BuiltinConfig kBuiltins[] = {
#include "fpi_builtin_configs.inc"
};

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::config, where + ": " + what);
}

/// Wraps one JSON object and remembers which keys were read, so leftovers can
/// be reported as unknown fields.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(where_, "expected an object");
  }

  [[nodiscard]] const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  [[nodiscard]] const json& require(const std::string& key) {
    const json* v = find(key);
    if (v == nullptr) fail(where_, "missing field '" + key + "'");
    return *v;
  }

  [[nodiscard]] std::string path(const std::string& key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.contains(key)) fail(where_, "unknown field '" + key + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(where, "expected a finite number");
  return d;
}

std::size_t count(const json& v, const std::string& where) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    fail(where, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

std::string text(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<double> nonempty_numbers(const json& v, const std::string& where) {
  auto out = numbers(v, where);
  if (out.empty()) fail(where, "must not be empty");
  return out;
}

Alphas weights(const json& v, const std::string& where) {
  const auto w = numbers(v, where);
  if (w.size() != 3) fail(where, "expected three weights");
  for (double x : w)
    if (x < 0.0 || x > 1.0) fail(where, "weights must lie in [0, 1]");
  return {w[0], w[1], w[2]};
}

ProblemSpec parse_problem(const json& j, const std::string& where) {
  Fields f(j, where);
  ProblemSpec p;
  p.id = text(f.require("id"), f.path("id"));
  if (p.id.empty() || p.id.find_first_of("/\\ .") != std::string::npos)
    fail(f.path("id"), "must be a non-empty name without '/', '\\', '.' or spaces");
  p.kind = text(f.require("kind"), f.path("kind"));
  if (p.kind == "affine") {
    const json& m = f.require("matrix");
    if (!m.is_array() || m.empty()) fail(f.path("matrix"), "expected a non-empty array of rows");
    for (std::size_t i = 0; i < m.size(); ++i) {
      p.matrix.push_back(numbers(m[i], f.path("matrix") + "[" + std::to_string(i) + "]"));
      if (p.matrix.back().size() != m.size()) fail(f.path("matrix"), "matrix must be square");
    }
    p.offset = numbers(f.require("offset"), f.path("offset"));
    if (p.offset.size() != p.matrix.size())
      fail(f.path("offset"), "offset length differs from matrix size");
  } else if (p.kind == "nonlinear") {
    p.builtin = text(f.require("name"), f.path("name"));
    if (p.builtin != "half_cosine") fail(f.path("name"), "unknown nonlinear map '" + p.builtin + "'");
  } else {
    fail(f.path("kind"), "expected 'affine' or 'nonlinear'");
  }
  if (const json* x0 = f.find("x0")) p.x0 = nonempty_numbers(*x0, f.path("x0"));
  f.finish();
  return p;
}

ScheduleSpec parse_schedule(const json& j, const std::string& where) {
  Fields f(j, where);
  ScheduleSpec s;
  s.family = text(f.require("family"), f.path("family"));
  if (s.family == "constant") {
    const Alphas w = weights(f.require("values"), f.path("values"));
    s.values = {w.a1, w.a2, w.a3};
  } else if (s.family != "harmonic" && s.family != "harmonic_complement") {
    fail(f.path("family"), "expected constant, harmonic or harmonic_complement");
  }
  f.finish();
  return s;
}

Analysis parse_analysis(const std::string& tag, const std::string& where) {
  for (Analysis a : {Analysis::bounds, Analysis::rates, Analysis::equivalence, Analysis::datadep,
                     Analysis::lemmas, Analysis::oracle, Analysis::reductions, Analysis::theta_grid})
    if (to_string(a) == tag) return a;
  fail(where, "unknown analysis '" + tag + "'");
}

SchemeId scheme(const json& v, const std::string& where) {
  const auto id = parse_scheme(text(v, where));
  if (!id) fail(where, "unknown scheme '" + v.get<std::string>() + "'");
  return *id;
}

void parse_sections(Fields& f, ExperimentConfig& c) {
  if (const json* j = f.find("rates")) {
    Fields r(*j, f.path("rates"));
    if (const json* v = r.find("first")) c.rates.first = scheme(*v, r.path("first"));
    if (const json* v = r.find("second")) c.rates.second = scheme(*v, r.path("second"));
    if (const json* v = r.find("horizon")) c.rates.horizon = count(*v, r.path("horizon"));
    if (c.rates.horizon < 8) fail(r.path("horizon"), "need at least 8 steps");
    r.finish();
  }
  if (const json* j = f.find("datadep")) {
    Fields d(*j, f.path("datadep"));
    if (const json* v = d.find("epsilons")) c.datadep.epsilons = nonempty_numbers(*v, d.path("epsilons"));
    for (double e : c.datadep.epsilons)
      if (e < 0.0) fail(d.path("epsilons"), "epsilon must be >= 0");
    if (const json* v = d.find("seeds")) c.datadep.seeds = count(*v, d.path("seeds"));
    if (c.datadep.seeds == 0) fail(d.path("seeds"), "must be positive");
    if (const json* v = d.find("modes")) {
      if (!v->is_array() || v->empty()) fail(d.path("modes"), "expected a non-empty array");
      c.datadep.modes.clear();
      for (const auto& m : *v) {
        const std::string tag = text(m, d.path("modes"));
        if (tag == "constant_shift") c.datadep.modes.push_back(PerturbationMode::constant_shift);
        else if (tag == "seeded_bounded") c.datadep.modes.push_back(PerturbationMode::seeded_bounded);
        else fail(d.path("modes"), "unknown perturbation mode '" + tag + "'");
      }
    }
    if (const json* v = d.find("max_n")) c.datadep.max_n = count(*v, d.path("max_n"));
    if (const json* v = d.find("shift")) c.datadep.shift = nonempty_numbers(*v, d.path("shift"));
    d.finish();
  }
  if (const json* j = f.find("oracle")) {
    Fields o(*j, f.path("oracle"));
    if (const json* v = o.find("steps")) c.oracle.steps = count(*v, o.path("steps"));
    if (const json* v = o.find("tolerance")) c.oracle.tolerance = number(*v, o.path("tolerance"));
    o.finish();
  }
  if (const json* j = f.find("reductions")) {
    Fields r(*j, f.path("reductions"));
    if (const json* v = r.find("steps")) c.reductions.steps = count(*v, r.path("steps"));
    const json& starts = r.require("starts");
    if (!starts.is_array() || starts.empty()) fail(r.path("starts"), "expected a non-empty array");
    for (std::size_t i = 0; i < starts.size(); ++i)
      c.reductions.starts.push_back(
          nonempty_numbers(starts[i], r.path("starts") + "[" + std::to_string(i) + "]"));
    const json& ws = r.require("weights");
    if (!ws.is_array() || ws.empty()) fail(r.path("weights"), "expected a non-empty array");
    for (std::size_t i = 0; i < ws.size(); ++i)
      c.reductions.weights.push_back(weights(ws[i], r.path("weights") + "[" + std::to_string(i) + "]"));
    r.finish();
  }
  if (const json* j = f.find("theta_grid")) {
    Fields t(*j, f.path("theta_grid"));
    c.theta_grid.deltas = nonempty_numbers(t.require("deltas"), t.path("deltas"));
    c.theta_grid.alpha1 = nonempty_numbers(t.require("alpha1"), t.path("alpha1"));
    const json& pairs = t.require("alpha23");
    if (!pairs.is_array() || pairs.empty()) fail(t.path("alpha23"), "expected a non-empty array");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto p = numbers(pairs[i], t.path("alpha23") + "[" + std::to_string(i) + "]");
      if (p.size() != 2) fail(t.path("alpha23"), "expected [alpha2, alpha3] pairs");
      c.theta_grid.alpha23.emplace_back(p[0], p[1]);
    }
    for (double d : c.theta_grid.deltas)
      if (!(d > 0.0 && d < 1.0)) fail(t.path("deltas"), "delta must lie in (0, 1)");
    for (double a : c.theta_grid.alpha1)
      if (!(a > 0.0 && a <= 1.0)) fail(t.path("alpha1"), "weights must lie in (0, 1]");
    for (auto [a2, a3] : c.theta_grid.alpha23)
      if (!(a2 > 0.0 && a2 <= 1.0 && a3 > 0.0 && a3 <= 1.0))
        fail(t.path("alpha23"), "weights must lie in (0, 1]");
    t.finish();
  }
  if (const json* j = f.find("perturbation")) {
    Fields p(*j, f.path("perturbation"));
    PerturbationConfig pc;
    pc.epsilon = number(p.require("epsilon"), p.path("epsilon"));
    pc.shift = nonempty_numbers(p.require("shift"), p.path("shift"));
    p.finish();
    c.perturbation = pc;
  }
}

/// Cross-field checks that need the whole document.
void validate(const ExperimentConfig& c) {
  std::size_t dim = 0;
  for (const auto& p : c.problems) {
    const std::size_t d = p.kind == "affine" ? p.matrix.size() : 1;
    const auto& start = p.x0 ? *p.x0 : c.x0;
    if (start.size() != d)
      fail("config.problems." + p.id, "start point has dimension " + std::to_string(start.size()) +
                                          ", problem has " + std::to_string(d));
    if (c.wants(Analysis::reductions))
      for (const auto& s : c.reductions.starts)
        if (s.size() != d) fail("config.reductions.starts", "dimension differs from problem " + p.id);
    if (c.perturbation && c.perturbation->shift.size() != d)
      fail("config.perturbation.shift", "dimension differs from problem " + p.id);
    if (c.datadep.shift && c.datadep.shift->size() != d)
      fail("config.datadep.shift", "dimension differs from problem " + p.id);
    dim = d;
  }
  (void)dim;
  std::set<std::string> ids;
  for (const auto& p : c.problems)
    if (!ids.insert(p.id).second) fail("config.problems", "duplicate id '" + p.id + "'");

  if (c.wants(Analysis::rates)) {
    const auto has = [&](SchemeId id) {
      return std::find(c.schemes.begin(), c.schemes.end(), id) != c.schemes.end();
    };
    if (!has(c.rates.first) || !has(c.rates.second))
      fail("config.rates", "compared schemes must appear in config.schemes");
  }

  for (const auto& s : c.schedules) {
    const ControlSchedule sched = to_schedule(s);
    if (c.wants(Analysis::datadep) && !sched.admits_data_dependence())
      throw Error(ErrorKind::inadmissible_schedule,
                  "datadep requires 1/2 <= alpha_n^1 for every n and a divergent alpha^1 series; "
                  "schedule " + sched.describe() + " violates this");
    if ((c.wants(Analysis::bounds) || c.wants(Analysis::rates)) && !sched.bounded_below())
      throw Error(ErrorKind::inadmissible_schedule,
                  "closed-form bounds require weights bounded below by a positive constant; "
                  "schedule " + sched.describe() + " is not");
    if ((c.wants(Analysis::oracle) || c.wants(Analysis::rates)) && !sched.is_constant())
      throw Error(ErrorKind::inadmissible_schedule,
                  "the exact oracle supports constant schedules only; got " + sched.describe());
    if (c.wants(Analysis::equivalence) && !sched.alpha1_diverges())
      throw Error(ErrorKind::inadmissible_schedule,
                  "equivalence needs a divergent alpha^1 series; schedule " + sched.describe() +
                      " has a convergent one");
  }
}

}  // namespace

std::string_view to_string(Analysis a) {
  switch (a) {
    case Analysis::bounds: return "bounds";
    case Analysis::rates: return "rates";
    case Analysis::equivalence: return "equivalence";
    case Analysis::datadep: return "datadep";
    case Analysis::lemmas: return "lemmas";
    case Analysis::oracle: return "oracle";
    case Analysis::reductions: return "reductions";
    case Analysis::theta_grid: return "theta_grid";
  }
  return "?";
}

ExperimentConfig parse_config(std::string_view source) {
  json doc;
  try {
    doc = json::parse(source);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::config, std::string("config is not valid JSON: ") + e.what());
  }

  Fields f(doc, "config");
  ExperimentConfig c;
  c.name = text(f.require("name"), f.path("name"));
  if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos)
    fail(f.path("name"), "must be a non-empty name without path separators");
  if (const json* v = f.find("seed")) c.seed = count(*v, f.path("seed"));

  const json& problems = f.require("problems");
  if (!problems.is_array() || problems.empty()) fail(f.path("problems"), "expected a non-empty array");
  for (std::size_t i = 0; i < problems.size(); ++i)
    c.problems.push_back(parse_problem(problems[i], f.path("problems") + "[" + std::to_string(i) + "]"));

  const json& schemes = f.require("schemes");
  if (!schemes.is_array()) fail(f.path("schemes"), "expected an array");
  if (schemes.empty()) fail(f.path("schemes"), "scheme list is empty");
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    const SchemeId id = scheme(schemes[i], f.path("schemes") + "[" + std::to_string(i) + "]");
    if (std::find(c.schemes.begin(), c.schemes.end(), id) != c.schemes.end())
      fail(f.path("schemes"), "duplicate scheme '" + std::string(to_string(id)) + "'");
    c.schemes.push_back(id);
  }

  const json& sched = f.require("schedule");
  if (sched.is_array()) {
    if (sched.empty()) fail(f.path("schedule"), "expected at least one schedule");
    for (std::size_t i = 0; i < sched.size(); ++i)
      c.schedules.push_back(parse_schedule(sched[i], f.path("schedule") + "[" + std::to_string(i) + "]"));
  } else {
    c.schedules.push_back(parse_schedule(sched, f.path("schedule")));
  }

  if (const json* v = f.find("x0")) c.x0 = nonempty_numbers(*v, f.path("x0"));
  else c.x0 = {0.0};

  if (const json* v = f.find("stop")) {
    Fields s(*v, f.path("stop"));
    if (const json* m = s.find("max_n")) c.stop.max_n = count(*m, s.path("max_n"));
    if (const json* t = s.find("tolerance")) {
      if (t->is_null()) c.stop.tolerance.reset();
      else {
        c.stop.tolerance = number(*t, s.path("tolerance"));
        if (*c.stop.tolerance < 0.0) fail(s.path("tolerance"), "must be >= 0");
      }
    }
    s.finish();
  }

  if (const json* v = f.find("analyses")) {
    if (!v->is_array()) fail(f.path("analyses"), "expected an array");
    for (const auto& a : *v) c.analyses.insert(parse_analysis(text(a, f.path("analyses")), f.path("analyses")));
  }
  if (c.wants(Analysis::reductions) && !doc.contains("reductions"))
    fail(f.path("reductions"), "required when the reductions analysis is requested");
  if (c.wants(Analysis::theta_grid) && !doc.contains("theta_grid"))
    fail(f.path("theta_grid"), "required when the theta_grid analysis is requested");

  parse_sections(f, c);
  if (const json* v = f.find("output_dir")) c.output_dir = text(*v, f.path("output_dir"));
  else c.output_dir = c.name;
  f.finish();

  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& source) {
  const std::filesystem::path path(source);
  std::error_code ec;
  if (std::filesystem::is_regular_file(path, ec)) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot read config " + source);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
  }
  if (const auto text = builtin_config_text(source)) return parse_config(*text);
  throw Error(ErrorKind::io, "no config file or built-in config named '" + source + "'");
}

std::vector<std::string_view> builtin_config_names() {
  std::vector<std::string_view> out;
  for (const auto& b : kBuiltins) out.push_back(b.name);
  return out;
}

std::optional<std::string_view> builtin_config_text(std::string_view name) {
  for (const auto& b : kBuiltins)
    if (b.name == name) return b.text;
  return std::nullopt;
}

ControlSchedule to_schedule(const ScheduleSpec& spec) {
  if (spec.family == "harmonic") return ControlSchedule::harmonic();
  if (spec.family == "harmonic_complement") return ControlSchedule::harmonic_complement();
  return ControlSchedule::constant(spec.values[0], spec.values[1], spec.values[2]);
}

ContractionProblem build_problem(const ProblemSpec& spec) {
  if (spec.kind == "nonlinear") return half_cosine_problem();
  const std::size_t d = spec.matrix.size();
  SquareMatrix a(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) a(i, j) = spec.matrix[i][j];
  return make_affine_contraction(a, VectorPoint(spec.offset), spec.id);
}

VectorPoint start_for(const ExperimentConfig& config, const ProblemSpec& spec) {
  return VectorPoint(spec.x0 ? *spec.x0 : config.x0);
}

}  // namespace fpi::harness
