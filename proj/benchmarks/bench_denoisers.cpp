#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mvamp/denoisers.hpp"

using namespace mvamp;

namespace {

std::vector<double> random_rows(std::int64_t rows, int L, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  std::vector<double> m(rows * L);
  for (auto& v : m) v = u(gen);
  return m;
}

}  // namespace

static void MultilayerRows(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const std::int64_t rows = 4096;
  const auto m = random_rows(rows, L, 1);
  const MultilayerDenoiser d(L, 0.1);
  std::vector<double> e(L), de(L);
  for (auto _ : state) {
    for (std::int64_t i = 0; i < rows; ++i) {
      d.denoise_row({m.data() + i * L, static_cast<std::size_t>(L)}, kStar, e, de);
      benchmark::DoNotOptimize(e.data());
    }
  }
  state.SetItemsProcessed(state.iterations() * rows);
}
BENCHMARK(MultilayerRows)->Arg(2)->Arg(4)->Arg(8);

static void DynamicRows(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const std::int64_t rows = 4096;
  const auto m = random_rows(rows, L, 2);
  const DynamicDenoiser d(L, 0.2);
  std::vector<double> e(L), de(L);
  for (auto _ : state) {
    for (std::int64_t i = 0; i < rows; ++i) {
      d.denoise_row({m.data() + i * L, static_cast<std::size_t>(L)}, kStar, e, de);
      benchmark::DoNotOptimize(e.data());
    }
  }
  state.SetItemsProcessed(state.iterations() * rows);
}
BENCHMARK(DynamicRows)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

static void BruteforceRows(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const auto m = random_rows(256, L, 3);
  const auto prior = PriorSpec::dynamic(L, 0.2);
  for (auto _ : state) {
    for (std::int64_t i = 0; i < 256; ++i) {
      auto e = denoise_bruteforce(prior, {m.data() + i * L, static_cast<std::size_t>(L)});
      benchmark::DoNotOptimize(e.data());
    }
  }
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BruteforceRows)->Arg(4)->Arg(8)->Arg(12);
