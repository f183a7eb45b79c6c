#include "mvamp/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mvamp {

double LayerRates::lambda_n(std::int64_t n) const {
  const double d = degree();
  const double denom = 4.0 * d * (1.0 - d / static_cast<double>(n));
  if (denom <= 0.0) return 0.0;
  const double diff = a - b;
  return diff * diff / denom;
}

LayerRates rates_from_snr(double d, double lambda, std::int64_t n, int layer) {
  if (d <= 0.0) throw ParameterError("rates_from_snr: d must be > 0");
  if (lambda < 0.0) throw ParameterError("rates_from_snr: lambda must be >= 0");
  const double half_gap = std::sqrt(lambda * d * (1.0 - d / static_cast<double>(n)));
  LayerRates r{d + half_gap, d - half_gap};
  const std::string which = layer >= 0 ? " (layer " + std::to_string(layer) + ")" : "";
  if (r.b < 0.0)
    throw InfeasibleError("rates_from_snr: b < 0 for d=" + std::to_string(d) +
                          ", lambda=" + std::to_string(lambda) + which);
  if (r.a > static_cast<double>(n))
    throw InfeasibleError("rates_from_snr: a > n for d=" + std::to_string(d) +
                          ", lambda=" + std::to_string(lambda) + which);
  return r;
}

LatentPopulation sample_population(const PriorSpec& prior, std::int64_t n, std::uint64_t seed) {
  prior.validate();
  if (n < 1) throw ParameterError("sample_population: n must be >= 1");

  LatentPopulation pop;
  pop.prior = prior;
  pop.n = n;
  pop.x.resize(n * prior.num_layers);
  if (prior.implicit_layers() > 0) pop.y.resize(n);
  if (prior.has_side_info()) pop.z.resize(n);

  RngStream rng(seed, {stream::population});
  PriorDraw draw;
  for (std::int64_t i = 0; i < n; ++i) {
    sample_prior_row(prior, rng, draw);
    std::copy(draw.x.begin(), draw.x.end(), pop.x.begin() + i * prior.num_layers);
    if (!pop.y.empty()) pop.y[i] = draw.y;
    if (!pop.z.empty()) pop.z[i] = draw.z;
  }
  return pop;
}

namespace {

// Upper-triangle Bernoulli sampling with geometric skips at the max rate and
// thinning down to the pair's own rate; O(n max(a,b)) expected.
void sample_layer_edges(const LatentPopulation& pop, int layer, const LayerRates& rates,
                        RngStream& rng, std::vector<std::pair<std::int32_t, std::int32_t>>& edges) {
  const std::int64_t n = pop.n;
  const double pa = rates.a / static_cast<double>(n);
  const double pb = rates.b / static_cast<double>(n);
  if (pa > 1.0 || pb > 1.0)
    throw InfeasibleError("sample_graphs: edge probability exceeds 1 in layer " + std::to_string(layer));
  const double pmax = std::max(pa, pb);
  if (pmax <= 0.0) return;

  const std::int64_t total_pairs = n * (n - 1) / 2;
  const double log1mp = pmax >= 1.0 ? 0.0 : std::log1p(-pmax);

  std::int64_t idx = -1;
  while (true) {
    if (pmax >= 1.0) {
      idx += 1;
    } else {
      const double u = 1.0 - rng.uniform();  // (0, 1]
      idx += 1 + static_cast<std::int64_t>(std::floor(std::log(u) / log1mp));
    }
    if (idx >= total_pairs || idx < 0) break;
    // invert the row-major strict upper triangle linearization
    std::int64_t i = 0;
    std::int64_t rem = idx;
    std::int64_t row_len = n - 1;
    while (rem >= row_len) {
      rem -= row_len;
      row_len -= 1;
      i += 1;
    }
    const std::int64_t j = i + 1 + rem;
    const double pij = pop.x_at(i, layer) == pop.x_at(j, layer) ? pa : pb;
    if (pij >= pmax || rng.uniform() * pmax < pij)
      edges.emplace_back(static_cast<std::int32_t>(i), static_cast<std::int32_t>(j));
  }
}

}  // namespace

MultiViewGraph sample_graphs(const LatentPopulation& pop, const std::vector<LayerRates>& rates,
                             std::uint64_t seed) {
  if (static_cast<int>(rates.size()) != pop.layers())
    throw ParameterError("sample_graphs: rates length must equal the number of layers");

  MultiViewGraph g;
  g.n = pop.n;
  g.rates = rates;
  g.layers.resize(rates.size());

  for (int l = 0; l < pop.layers(); ++l) {
    RngStream rng(seed, {stream::graph, static_cast<std::uint64_t>(l)});
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;
    sample_layer_edges(pop, l, rates[l], rng, edges);

    LayerGraph& lg = g.layers[l];
    lg.edge_count = static_cast<std::int64_t>(edges.size());
    lg.offsets.assign(pop.n + 1, 0);
    for (const auto& [i, j] : edges) {
      lg.offsets[i + 1] += 1;
      lg.offsets[j + 1] += 1;
    }
    for (std::int64_t i = 0; i < pop.n; ++i) lg.offsets[i + 1] += lg.offsets[i];
    lg.neighbors.resize(2 * edges.size());
    std::vector<std::int64_t> cursor(lg.offsets.begin(), lg.offsets.end() - 1);
    for (const auto& [i, j] : edges) {
      lg.neighbors[cursor[i]++] = j;
      lg.neighbors[cursor[j]++] = i;
    }
  }
  return g;
}

SpikedViews sample_spiked(const LatentPopulation& pop, const std::vector<double>& lambdas,
                          std::uint64_t seed, std::int64_t dense_node_cap) {
  if (static_cast<int>(lambdas.size()) != pop.layers())
    throw ParameterError("sample_spiked: lambdas length must equal the number of layers");
  for (double lam : lambdas)
    if (lam < 0.0) throw ParameterError("sample_spiked: lambdas must be >= 0");
  if (pop.n > dense_node_cap)
    throw ParameterError("sample_spiked: n=" + std::to_string(pop.n) +
                         " exceeds the dense node cap " + std::to_string(dense_node_cap));

  SpikedViews sv;
  sv.n = pop.n;
  sv.lambdas = lambdas;
  sv.views.reserve(lambdas.size());

  const std::int64_t n = pop.n;
  for (int l = 0; l < pop.layers(); ++l) {
    RngStream rng(seed, {stream::spike, static_cast<std::uint64_t>(l)});
    Eigen::MatrixXd a(n, n);
    const double snr = std::sqrt(lambdas[l] / static_cast<double>(n));
    for (std::int64_t i = 0; i < n; ++i) {
      const double xi = pop.x_at(i, l);
      for (std::int64_t j = i; j < n; ++j) {
        const double w = i == j ? std::sqrt(2.0) * rng.normal() : rng.normal();
        const double v = snr * xi * pop.x_at(j, l) + w;
        a(i, j) = v;
        a(j, i) = v;
      }
    }
    sv.views.push_back(std::move(a));
  }
  return sv;
}

RescaledGraph rescale_graph(const MultiViewGraph& g) {
  RescaledGraph rg;
  rg.graph = &g;
  rg.scales.resize(g.layers.size());
  for (int l = 0; l < g.num_layers(); ++l) {
    const LayerRates& r = g.rates[l];
    LayerScale& s = rg.scales[l];
    if (!r.visible()) continue;  // invisible layer, marker stays default
    const double d = r.degree();
    const double dn = d / static_cast<double>(g.n);
    const double var = d * (1.0 - dn) / static_cast<double>(g.n);
    if (var <= 0.0)
      throw InfeasibleError("rescale_graph: d (1 - d/n) <= 0 in layer " + std::to_string(l));
    const double scale = std::sqrt(var);
    s.edge_value = (1.0 - dn) / scale;
    s.offset = -dn / scale;
    s.lambda_n = r.lambda_n(g.n);
    s.visible = true;
  }
  return rg;
}

void rescaled_matvec(const RescaledGraph& rg, int layer, std::span<const double> v,
                     std::span<double> out) {
  const LayerScale& s = rg.scales[layer];
  const LayerGraph& lg = rg.graph->layers[layer];
  const std::int64_t n = rg.n();
  double total = 0.0;
  for (std::int64_t k = 0; k < n; ++k) total += v[k];
  const double edge_coeff = s.edge_value - s.offset;  // = 1 / s
  for (std::int64_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::int64_t e = lg.offsets[i]; e < lg.offsets[i + 1]; ++e) acc += v[lg.neighbors[e]];
    out[i] = edge_coeff * acc + s.offset * (total - v[i]);
  }
}

Eigen::MatrixXd densify_rescaled(const RescaledGraph& rg, int layer) {
  const LayerScale& s = rg.scales[layer];
  const LayerGraph& lg = rg.graph->layers[layer];
  const std::int64_t n = rg.n();
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, s.offset);
  m.diagonal().setZero();
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t e = lg.offsets[i]; e < lg.offsets[i + 1]; ++e)
      m(i, lg.neighbors[e]) = s.edge_value;
  return m;
}

}  // namespace mvamp
