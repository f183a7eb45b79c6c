#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "mvamp/prior.hpp"

namespace mvamp {

// Per-layer edge rates. a/n and b/n are the within / across community edge
// probabilities; lambda_n is the effective SNR (a-b)^2 / (4 d (1 - d/n)).
struct LayerRates {
  double a = 0.0;
  double b = 0.0;
  double degree() const { return 0.5 * (a + b); }
  double lambda_n(std::int64_t n) const;
  bool visible() const { return a > 0.0 || b > 0.0; }
};

// Inverts the SNR parametrization: a = d + sqrt(lambda d (1 - d/n)),
// b = d - sqrt(...). Throws InfeasibleError when b < 0 or a > n.
LayerRates rates_from_snr(double d, double lambda, std::int64_t n, int layer = -1);

// Sampled latent matrix X (n x L, +-1), implicit labels Y (Multilayer), side
// info Z (Semi). Row-major X. Immutable after sampling.
struct LatentPopulation {
  PriorSpec prior;
  std::int64_t n = 0;
  std::vector<std::int8_t> x;  // n * L, row-major
  std::vector<std::int8_t> y;  // n (Multilayer) or empty
  std::vector<Side> z;         // n (Semi) or empty

  int layers() const { return prior.num_layers; }
  std::int8_t x_at(std::int64_t i, int l) const { return x[i * prior.num_layers + l]; }
  Side z_at(std::int64_t i) const { return z.empty() ? kStar : z[i]; }
  std::span<const std::int8_t> row(std::int64_t i) const {
    return {x.data() + i * prior.num_layers, static_cast<std::size_t>(prior.num_layers)};
  }
};

LatentPopulation sample_population(const PriorSpec& prior, std::int64_t n, std::uint64_t seed);

// One undirected simple graph in CSR form with both half-edges stored.
struct LayerGraph {
  std::vector<std::int64_t> offsets;  // n + 1
  std::vector<std::int32_t> neighbors;
  std::int64_t edge_count = 0;  // undirected edges (half-edges / 2)
};

struct MultiViewGraph {
  std::int64_t n = 0;
  std::vector<LayerGraph> layers;
  std::vector<LayerRates> rates;

  int num_layers() const { return static_cast<int>(layers.size()); }
};

// Edge in layer l present w.p. a/n if X_i = X_j else b/n, independently over
// i < j. Layer streams are independent. Throws InfeasibleError when a/n > 1.
MultiViewGraph sample_graphs(const LatentPopulation& pop, const std::vector<LayerRates>& rates,
                             std::uint64_t seed);

// L dense symmetric spiked matrices A = sqrt(lambda/n) X X^T + W, W from the
// GOE convention (off-diagonal variance 1, diagonal variance 2).
struct SpikedViews {
  std::int64_t n = 0;
  std::vector<double> lambdas;
  std::vector<Eigen::MatrixXd> views;
};

SpikedViews sample_spiked(const LatentPopulation& pop, const std::vector<double>& lambdas,
                          std::uint64_t seed, std::int64_t dense_node_cap = 8000);

// Centered/rescaled graph view Gbar = (G - d/n) / sqrt(d (1 - d/n) / n),
// kept in split form: materialized edges carry `edge_value`, every other
// off-diagonal pair carries `offset`. Matrix-vector products use
//   Gbar v = (edge_value - offset) * (Adj v) + offset * (sum(v) - v_i),
// which costs O(edges + n).
struct LayerScale {
  double edge_value = 0.0;  // (1 - d/n) / s
  double offset = 0.0;      // -(d/n) / s
  double lambda_n = 0.0;
  bool visible = false;
};

struct RescaledGraph {
  const MultiViewGraph* graph = nullptr;
  std::vector<LayerScale> scales;

  std::int64_t n() const { return graph->n; }
  int num_layers() const { return graph->num_layers(); }
};

RescaledGraph rescale_graph(const MultiViewGraph& g);

// out = Gbar^(l) * v via the split representation.
void rescaled_matvec(const RescaledGraph& rg, int layer, std::span<const double> v,
                     std::span<double> out);

// Dense materialization (tests & small n diagnostics only).
Eigen::MatrixXd densify_rescaled(const RescaledGraph& rg, int layer);

}  // namespace mvamp
