#include "fpi/batch.hpp"

#include <algorithm>
#include <exception>
#include <optional>

#include <omp.h>

#include "fpi/error.hpp"
#include "fpi/rng.hpp"

namespace fpi {

namespace {

// Runs body(i) for i in [0, n), serially or on the OpenMP pool. Exceptions
// are parked per index and the lowest one is rethrown afterwards.
template <typename Body>
void for_each_index(std::size_t n, Execution exec, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

VectorPoint sample_point(StreamRng& rng, const VectorPoint& center, double radius) {
  std::vector<double> v(center.dimension());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = center[i] + rng.uniform(-radius, radius);
  return VectorPoint(std::move(v));
}

VectorPoint sampling_center(const ContractionProblem& p) {
  return p.fixed_point().value_or(VectorPoint::zeros(p.dimension()));
}

}  // namespace

std::vector<IterationTrace> run_batch(std::span<const RunRequest> requests, Execution exec) {
  std::vector<std::optional<IterationTrace>> slots(requests.size());
  for_each_index(requests.size(), exec, [&](std::size_t i) {
    const RunRequest& r = requests[i];
    if (r.problem == nullptr) throw Error(ErrorKind::invalid_argument, "run request without problem");
    slots[i].emplace(run_scheme(*r.problem, r.scheme, r.schedule, r.x0, r.stop));
  });
  std::vector<IterationTrace> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<DataDependenceReport> data_dependence_batch(
    std::span<const DataDependenceRequest> requests, Execution exec) {
  std::vector<DataDependenceReport> out(requests.size());
  for_each_index(requests.size(), exec, [&](std::size_t i) {
    const DataDependenceRequest& r = requests[i];
    if (r.problem == nullptr) throw Error(ErrorKind::invalid_argument, "request without problem");
    out[i] = data_dependence_experiment(*r.problem, r.spec, r.schedule, r.x0, r.stop);
  });
  return out;
}

ContractionSample sample_contraction(const ContractionProblem& problem, std::size_t pairs,
                                     std::uint64_t seed, double radius, Execution exec) {
  const VectorPoint center = sampling_center(problem);
  const double delta = problem.lipschitz();
  std::vector<double> excess(pairs);
  for_each_index(pairs, exec, [&](std::size_t i) {
    StreamRng rng(seed, i);
    const VectorPoint x = sample_point(rng, center, radius);
    const VectorPoint y = sample_point(rng, center, radius);
    excess[i] = distance(problem.apply(x), problem.apply(y)) - delta * distance(x, y);
  });
  ContractionSample s;
  s.pairs = pairs;
  s.max_excess = pairs == 0 ? 0.0 : *std::max_element(excess.begin(), excess.end());
  s.holds = s.max_excess <= 1e-12;
  return s;
}

double sample_perturbation_sup(const ContractionProblem& base, const ContractionProblem& approx,
                               std::size_t points, std::uint64_t seed, double radius,
                               Execution exec) {
  const VectorPoint center = sampling_center(base);
  std::vector<double> gaps(points);
  for_each_index(points, exec, [&](std::size_t i) {
    StreamRng rng(seed, i);
    const VectorPoint x = sample_point(rng, center, radius);
    gaps[i] = distance(base.apply(x), approx.apply(x));
  });
  return points == 0 ? 0.0 : *std::max_element(gaps.begin(), gaps.end());
}

}  // namespace fpi
