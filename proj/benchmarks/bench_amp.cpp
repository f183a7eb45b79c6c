#include <benchmark/benchmark.h>

#include "mvamp/amp.hpp"
#include "mvamp/state_evolution.hpp"

using namespace mvamp;

static void GraphMatvec(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  const auto pop = sample_population(PriorSpec::multilayer(1, 0.1), n, 1);
  const auto g = sample_graphs(pop, {rates_from_snr(20.0, 1.5, n)}, 2);
  const auto rg = rescale_graph(g);
  const GraphViewSet views(rg);
  std::vector<double> v(n, 0.5), out(n);
  for (auto _ : state) {
    views.matvec(0, v, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * (2 * g.layers[0].edge_count + n));
}
BENCHMARK(GraphMatvec)->Arg(1000)->Arg(10000)->Arg(100000);

static void DenseMatvec(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  const auto pop = sample_population(PriorSpec::multilayer(1, 0.1), n, 3);
  const auto sv = sample_spiked(pop, {1.5}, 4);
  const SpikedViewSet views(sv);
  std::vector<double> v(n, 0.5), out(n);
  for (auto _ : state) {
    views.matvec(0, v, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(DenseMatvec)->Arg(1000)->Arg(2000)->Arg(4000);

static void AmpIterationSparse(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  const auto prior = PriorSpec::multilayer(2, 0.1);
  const auto pop = sample_population(prior, n, 5);
  const auto g = sample_graphs(pop, {rates_from_snr(20.0, 1.5, n), rates_from_snr(30.0, 1.5, n)}, 6);
  const auto denoiser = bayes_denoiser(prior);
  const auto m0 = warm_init(pop, 0.1, 7);
  AmpConfig cfg;
  cfg.iterations = 1;
  for (auto _ : state) {
    auto traj = run_amp_on_graph(g, pop, *denoiser, cfg, m0);
    benchmark::DoNotOptimize(traj.final_m.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(AmpIterationSparse)->Arg(10000)->Arg(50000);

static void SeMapMonteCarlo(benchmark::State& state) {
  const auto prior = PriorSpec::dynamic(4, 0.2);
  const Eigen::VectorXd gamma = Eigen::VectorXd::Constant(4, 0.8);
  QuadratureSpec quad = QuadratureSpec::mc(state.range(0), 9);
  for (auto _ : state) {
    auto t = se_map(prior, gamma, quad);
    benchmark::DoNotOptimize(t.value.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(SeMapMonteCarlo)->Arg(10000)->Arg(100000);
