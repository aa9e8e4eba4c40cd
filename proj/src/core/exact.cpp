#include "fpi/exact.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "fpi/error.hpp"

namespace fpi::exact {

namespace {

RationalVector mix(const RationalVector& x, const RationalVector& y, const Rational& t) {
  RationalVector out(x.size());
  const Rational s = 1 - t;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = s * x[i] + t * y[i];
  return out;
}

RationalVector exact_step(const RationalAffine& m, SchemeId scheme, const RationalVector& x,
                          const std::array<Rational, 3>& a) {
  auto T = [&m](const RationalVector& v) { return m.apply(v); };
  switch (scheme) {
    case SchemeId::Picard:
      return T(x);
    case SchemeId::Mann:
      return mix(x, T(x), a[0]);
    case SchemeId::Ishikawa: {
      const auto y = mix(x, T(x), a[1]);
      return mix(x, T(y), a[0]);
    }
    case SchemeId::TwoStepMann: {
      const auto y = mix(x, T(x), a[1]);
      return mix(y, T(y), a[0]);
    }
    case SchemeId::Noor: {
      const auto z = mix(x, T(x), a[2]);
      const auto y = mix(x, T(z), a[1]);
      return mix(x, T(y), a[0]);
    }
    case SchemeId::SP: {
      const auto z = mix(x, T(x), a[2]);
      const auto y = mix(z, T(z), a[1]);
      return mix(y, T(y), a[0]);
    }
    case SchemeId::S: {
      const auto ts = T(x);
      const auto t = mix(x, ts, a[1]);
      return mix(ts, T(t), a[0]);
    }
    case SchemeId::CR: {
      const auto tu = T(x);
      const auto y = mix(x, tu, a[2]);
      const auto v = mix(tu, T(y), a[1]);
      return mix(v, T(v), a[0]);
    }
    case SchemeId::KO:
    case SchemeId::KOPerturbed: {
      const auto tp = T(x);
      const auto r = mix(x, tp, a[2]);
      const auto q = mix(tp, T(r), a[1]);
      return mix(tp, T(q), a[0]);
    }
  }
  throw Error(ErrorKind::invalid_argument, "exact_step: unknown scheme");
}

}  // namespace

Rational to_rational(double x) {
  if (!std::isfinite(x)) throw Error(ErrorKind::non_finite, "to_rational: non-finite value");
  return Rational(x);
}

double to_nearest_double(const Rational& q) {
  const double toward_zero = q.get_d();
  const Rational here(toward_zero);
  if (here == q) return toward_zero;
  const double away = std::nextafter(toward_zero, sgn(q) > 0
                                                      ? std::numeric_limits<double>::infinity()
                                                      : -std::numeric_limits<double>::infinity());
  if (!std::isfinite(away)) return toward_zero;
  const Rational d_here = abs(q - here);
  const Rational d_away = abs(Rational(away) - q);
  if (d_here < d_away) return toward_zero;
  if (d_away < d_here) return away;
  return (std::bit_cast<std::uint64_t>(toward_zero) & 1U) == 0 ? toward_zero : away;
}

RationalVector to_rational(const VectorPoint& x) {
  RationalVector out;
  out.reserve(x.dimension());
  for (double v : x.coords()) out.push_back(to_rational(v));
  return out;
}

RationalAffine RationalAffine::from(const AffineContraction& map) {
  RationalAffine r;
  r.dim = map.matrix.size();
  r.matrix.reserve(r.dim * r.dim);
  for (std::size_t i = 0; i < r.dim; ++i)
    for (std::size_t j = 0; j < r.dim; ++j) r.matrix.push_back(to_rational(map.matrix(i, j)));
  r.offset = to_rational(map.offset);
  return r;
}

RationalVector RationalAffine::apply(const RationalVector& x) const {
  RationalVector out(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    Rational s = 0;
    for (std::size_t j = 0; j < dim; ++j) s += matrix[i * dim + j] * x[j];
    out[i] = s + offset[i];
  }
  return out;
}

RationalVector exact_fixed_point(const RationalAffine& map) {
  const std::size_t n = map.dim;
  // Augmented system [(I - A) | b].
  std::vector<RationalVector> m(n, RationalVector(n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m[i][j] = (i == j ? 1 : 0) - map.matrix[i * n + j];
    m[i][n] = map.offset[i];
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && m[pivot][col] == 0) ++pivot;
    if (pivot == n) throw Error(ErrorKind::numeric_fault, "exact_fixed_point: I - A is singular");
    std::swap(m[col], m[pivot]);
    for (std::size_t row = 0; row < n; ++row) {
      if (row == col || m[row][col] == 0) continue;
      const Rational f = m[row][col] / m[col][col];
      for (std::size_t k = col; k <= n; ++k) m[row][k] -= f * m[col][k];
    }
  }
  RationalVector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = m[i][n] / m[i][i];
  return x;
}

ExactTrace exact_run(const RationalAffine& map, SchemeId scheme,
                     const ControlSchedule& schedule, const RationalVector& x0,
                     std::size_t n_steps) {
  if (!schedule.is_constant())
    throw Error(ErrorKind::invalid_argument,
                "exact_run: only constant schedules are supported, got " + schedule.describe());
  if (x0.size() != map.dim) throw Error(ErrorKind::dimension_mismatch, "exact_run: x0 size");

  ExactTrace t{scheme,
               {to_rational(schedule.component(0).value), to_rational(schedule.component(1).value),
                to_rational(schedule.component(2).value)},
               {}};
  t.iterates.reserve(n_steps + 1);
  t.iterates.push_back(x0);
  for (std::size_t n = 0; n < n_steps; ++n)
    t.iterates.push_back(exact_step(map, scheme, t.iterates.back(), t.alphas));
  return t;
}

std::vector<double> exact_errors(const ExactTrace& trace, const RationalVector& x_star) {
  std::vector<double> out;
  out.reserve(trace.iterates.size());
  for (const auto& x : trace.iterates) {
    if (x.size() != x_star.size())
      throw Error(ErrorKind::dimension_mismatch, "exact_errors: dimension mismatch");
    if (x.size() == 1) {
      out.push_back(to_nearest_double(abs(x[0] - x_star[0])));
      continue;
    }
    Rational s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const Rational d = x[i] - x_star[i];
      s += d * d;
    }
    out.push_back(std::sqrt(to_nearest_double(s)));
  }
  return out;
}

TraceComparison compare_traces(const IterationTrace& floating, const ExactTrace& exact,
                               double abs_tol) {
  if (floating.iterates.size() != exact.iterates.size())
    throw Error(ErrorKind::invalid_argument,
                "compare_traces: lengths differ (" + std::to_string(floating.iterates.size()) +
                    " vs " + std::to_string(exact.iterates.size()) + ")");
  if (floating.scheme != exact.scheme)
    throw Error(ErrorKind::invalid_argument, "compare_traces: schemes differ");

  TraceComparison c;
  for (std::size_t n = 0; n < exact.iterates.size(); ++n) {
    const auto& fx = floating.iterates[n];
    const auto& ex = exact.iterates[n];
    if (fx.dimension() != ex.size())
      throw Error(ErrorKind::dimension_mismatch, "compare_traces: dimension mismatch");
    for (std::size_t i = 0; i < ex.size(); ++i) {
      const double gap = std::abs(fx[i] - to_nearest_double(ex[i]));
      if (gap > c.max_abs_gap) {
        c.max_abs_gap = gap;
        c.worst_step = n;
        c.worst_coord = i;
      }
    }
  }
  c.pass = c.max_abs_gap <= abs_tol;
  return c;
}

}  // namespace fpi::exact
