// Serial reference vs OpenMP kernels: covariance table, Cholesky and the
// replication runner. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <vector>

#include "sve/gaussian.hpp"
#include "sve/kernel.hpp"
#include "sve/linalg.hpp"
#include "sve/models.hpp"
#include "sve/runner.hpp"
#include "sve/scheme.hpp"

namespace {

const sve::kernel::KernelParams& params() {
  static const auto p = sve::kernel::KernelParams::make(0.25, 1.0);
  return p;
}

void BM_CovarianceSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sve::gaussian::build_covariance_serial(params(), n));
}

void BM_CovarianceOmp(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sve::gaussian::build_covariance(params(), n));
}

template <bool Parallel>
void BM_Cholesky(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto table = sve::gaussian::build_covariance(params(), n);
  const std::size_t dim = table.dim();
  for (auto _ : state) {
    state.PauseTiming();
    std::vector<double> a(table.entries().begin(), table.entries().end());
    const double jitter = 1e-10 * table.trace() / static_cast<double>(dim);
    for (std::size_t i = 0; i < dim; ++i) a[i * dim + i] += jitter;
    state.ResumeTiming();
    auto out = Parallel ? sve::linalg::cholesky_omp(a, dim) : sve::linalg::cholesky_serial(a, dim);
    benchmark::DoNotOptimize(out);
  }
}

template <bool Parallel>
void BM_Ensemble(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto model = sve::models::make("trig");
  const auto factor = sve::gaussian::factorize(sve::gaussian::build_covariance(params(), n));
  for (auto _ : state) {
    auto out = sve::runner::map<double>(64, Parallel, [&](std::size_t r) {
      const auto draws = sve::scheme::draw_steps(factor, n, model.m, sve::StreamKey{7, r, 0, 0});
      const auto path = sve::scheme::simulate_hat_X(model, params(), n, draws);
      return path.values.back();
    });
    benchmark::DoNotOptimize(out);
  }
}

}  // namespace

BENCHMARK(BM_CovarianceSerial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CovarianceOmp)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Cholesky<false>)->Name("BM_CholeskySerial")->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Cholesky<true>)->Name("BM_CholeskyOmp")->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ensemble<false>)->Name("BM_EnsembleSerial")->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ensemble<true>)->Name("BM_EnsembleOmp")->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
