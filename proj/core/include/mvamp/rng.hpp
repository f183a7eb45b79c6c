#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mvamp {

// splitmix64 finalizer, used to derive independent stream keys.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream purposes; combined with layer / chunk indices when deriving keys.
namespace stream {
constexpr std::uint64_t population = 0x01;
constexpr std::uint64_t graph = 0x02;
constexpr std::uint64_t spike = 0x03;
constexpr std::uint64_t warm_init = 0x04;
constexpr std::uint64_t se_mc = 0x05;
constexpr std::uint64_t harness_cell = 0x06;
}  // namespace stream

// One independent, reproducible random stream. Streams are derived from a
// root seed plus a key path, e.g. {stream::graph, layer}; distinct paths give
// statistically independent streams, identical paths give identical output.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t k = mix64(seed ^ 0x6a09e667f3bcc908ULL);
    for (std::uint64_t p : path) k = mix64(k ^ mix64(p));
    engine_.seed(k);
  }

  double uniform() { return unif_(engine_); }          // [0, 1)
  double normal() { return norm_(engine_); }           // N(0, 1)
  std::uint64_t bits() { return engine_(); }
  bool bernoulli(double p) { return unif_(engine_) < p; }
  int rademacher() { return unif_(engine_) < 0.5 ? 1 : -1; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
};

}  // namespace mvamp
