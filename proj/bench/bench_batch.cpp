// Serial reference against the OpenMP path for the batch kernels.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "fpi/batch.hpp"

namespace {

using namespace fpi;

std::vector<ContractionProblem> make_problems(std::size_t count, std::size_t dim) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<ContractionProblem> out;
  for (std::size_t k = 0; k < count; ++k) {
    SquareMatrix a(dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) a(i, j) = u(rng);
    const double scale = 0.9 / operator_norm(a);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) a(i, j) *= scale;
    std::vector<double> b(dim);
    for (double& x : b) x = u(rng);
    out.push_back(make_affine_contraction(a, VectorPoint(b)));
  }
  return out;
}

void BM_RunBatch(benchmark::State& state) {
  const auto exec = state.range(0) == 0 ? Execution::serial : Execution::parallel;
  const auto problems = make_problems(64, 16);
  std::vector<RunRequest> reqs;
  for (const auto& p : problems)
    for (SchemeId id : {SchemeId::KO, SchemeId::CR, SchemeId::SP, SchemeId::Noor}) {
      RunRequest r;
      r.problem = &p;
      r.scheme = id;
      r.x0 = VectorPoint::zeros(16);
      r.stop = {400, std::nullopt};
      reqs.push_back(r);
    }
  for (auto _ : state) benchmark::DoNotOptimize(run_batch(reqs, exec));
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(reqs.size()));
}

void BM_DataDependenceBatch(benchmark::State& state) {
  const auto exec = state.range(0) == 0 ? Execution::serial : Execution::parallel;
  const std::vector<ContractionProblem> problems{scalar_affine(0.3, 1.0), scalar_affine(0.5, 1.0),
                                                 scalar_affine(0.9, 1.0)};
  std::vector<DataDependenceRequest> reqs;
  for (std::uint64_t seed = 0; seed < 240; ++seed) {
    DataDependenceRequest r;
    r.problem = &problems[seed % 3];
    r.spec = PerturbationSpec::seeded_bounded(seed, seed % 2 == 0 ? 0.01 : 0.1);
    r.stop = {5000, std::nullopt};
    reqs.push_back(r);
  }
  for (auto _ : state) benchmark::DoNotOptimize(data_dependence_batch(reqs, exec));
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(reqs.size()));
}

void BM_SampleContraction(benchmark::State& state) {
  const auto exec = state.range(0) == 0 ? Execution::serial : Execution::parallel;
  const auto problems = make_problems(1, 32);
  for (auto _ : state) benchmark::DoNotOptimize(sample_contraction(problems[0], 20000, 1, 10.0, exec));
  state.SetItemsProcessed(state.iterations() * 20000);
}

// Argument 0 is the serial reference, 1 the OpenMP path.
BENCHMARK(BM_RunBatch)->Arg(0)->Arg(1)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DataDependenceBatch)->Arg(0)->Arg(1)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampleContraction)->Arg(0)->Arg(1)->UseRealTime()->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
