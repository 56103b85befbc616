#include "wgcs/pde.hpp"
#include "wgcs/sensing.hpp"
#include "wgcs/solver.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace wgcs;

namespace {

void BM_SolveExactRecovery(benchmark::State& state) {
  const auto blocks = static_cast<std::size_t>(state.range(0));
  const Index m = static_cast<Index>(blocks) * 5 / 2;
  const auto rows = BlockStructure::uniform(blocks, 4);
  const auto w = WeightSequence::ones(blocks);
  const Eigen::MatrixXd a = random_matrix(RandomEnsemble::gaussian, m, static_cast<Index>(blocks) * 4, 1).entries;
  std::mt19937_64 gen(2);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(a.cols(), 1);
  for (Index i = 0; i < 12; ++i) x(i * static_cast<Index>(blocks / 3), 0) = nd(gen);
  const Eigen::MatrixXd y = a * x;
  for (auto _ : state) {
    auto r = solve_wg_bpdn(a, y, rows, w, 0.0);
    benchmark::DoNotOptimize(r.z.data());
  }
}
BENCHMARK(BM_SolveExactRecovery)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_EmpiricalWbrip(benchmark::State& state) {
  const auto n = static_cast<Index>(state.range(0));
  const auto a = random_matrix(RandomEnsemble::gaussian, 12, n, 3);
  const auto st = BlockStructure::uniform(static_cast<std::size_t>(n), 1);
  const auto w = WeightSequence::ones(static_cast<std::size_t>(n));
  for (auto _ : state) {
    auto est = empirical_wbrip(a, st, w, 3.0);
    benchmark::DoNotOptimize(est.delta);
  }
}
BENCHMARK(BM_EmpiricalWbrip)->Arg(12)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_Snapshot(benchmark::State& state) {
  const auto op = AffineDiffusion::constant_mean(1.0, AmplitudeRule::algebraic(0.1, 3.0), 64);
  const FemMesh mesh(static_cast<std::size_t>(state.range(0)));
  const auto load = assemble_load(mesh, [](double) { return 1.0; });
  std::vector<double> y(20, 0.5);
  for (auto _ : state) {
    auto s = solve_snapshot(op, y, mesh, load);
    benchmark::DoNotOptimize(s.transformed.data());
  }
}
BENCHMARK(BM_Snapshot)->Arg(255)->Arg(1023)->Arg(4095);

}  // namespace
BENCHMARK_MAIN();
