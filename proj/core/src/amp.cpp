#include "mvamp/amp.hpp"

#include <cmath>

#include "mvamp/metrics.hpp"
#include "mvamp/parallel.hpp"

namespace mvamp {

void SpikedViewSet::matvec(int layer, std::span<const double> v, std::span<double> out) const {
  const Eigen::MatrixXd& a = views_->views[layer];
  const std::int64_t n = a.rows();
  parallel_for(n, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      // column i is row i by symmetry; contiguous access
      const double* col = a.data() + i * n;
      double acc = 0.0;
      for (std::int64_t k = 0; k < n; ++k) acc += col[k] * v[k];
      out[i] = acc;
    }
  });
}

void GraphViewSet::matvec(int layer, std::span<const double> v, std::span<double> out) const {
  const LayerScale& s = rg_->scales[layer];
  const LayerGraph& lg = rg_->graph->layers[layer];
  const std::int64_t n = rg_->n();
  double total = 0.0;
  for (std::int64_t k = 0; k < n; ++k) total += v[k];
  const double edge_coeff = s.edge_value - s.offset;
  parallel_for(n, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      double acc = 0.0;
      for (std::int64_t e = lg.offsets[i]; e < lg.offsets[i + 1]; ++e) acc += v[lg.neighbors[e]];
      out[i] = edge_coeff * acc + s.offset * (total - v[i]);
    }
  });
}

void DenseViewSet::matvec(int layer, std::span<const double> v, std::span<double> out) const {
  const Eigen::MatrixXd& a = mats_[layer];
  const std::int64_t n = a.rows();
  parallel_for(n, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      double acc = 0.0;
      for (std::int64_t k = 0; k < n; ++k) acc += a(k, i) * v[k];
      out[i] = acc;
    }
  });
}

std::vector<double> warm_init(const LatentPopulation& pop, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw ParameterError("warm_init: fraction must be in [0, 1]");
  const int L = pop.layers();
  std::vector<double> m0(pop.n * L, 0.0);
  RngStream rng(seed, {stream::warm_init});
  for (std::int64_t i = 0; i < pop.n; ++i)
    for (int l = 0; l < L; ++l)
      if (rng.bernoulli(fraction)) m0[i * L + l] = static_cast<double>(pop.x_at(i, l));
  return m0;
}

namespace {

Eigen::VectorXd column_overlaps(const std::vector<double>& m, const LatentPopulation& pop) {
  const int L = pop.layers();
  Eigen::VectorXd o = Eigen::VectorXd::Zero(L);
  for (std::int64_t i = 0; i < pop.n; ++i)
    for (int l = 0; l < L; ++l) o(l) += m[i * L + l] * pop.x_at(i, l);
  return o / static_cast<double>(pop.n);
}

}  // namespace

AmpTrajectory run_amp(const ViewSet& views, const LatentPopulation& pop, const Denoiser& denoiser,
                      const AmpConfig& cfg, std::span<const double> m0) {
  const std::int64_t n = views.n();
  const int L = views.num_layers();
  if (pop.n != n || pop.layers() != L)
    throw ParameterError("run_amp: views and population dimensions disagree");
  if (denoiser.layers() != L) throw ParameterError("run_amp: denoiser layer count mismatch");
  if (static_cast<std::int64_t>(m0.size()) != n * L)
    throw ParameterError("run_amp: m0 must be n x L");
  if (static_cast<int>(cfg.lambdas.size()) != L)
    throw ParameterError("run_amp: cfg.lambdas must have one entry per layer");
  if (cfg.iterations < 1) throw ParameterError("run_amp: iterations must be >= 1");
  for (double lam : cfg.lambdas)
    if (!(lam >= 0.0)) throw ParameterError("run_amp: lambdas must be >= 0");

  double lambda_sum = 0.0;
  for (double lam : cfg.lambdas) lambda_sum += lam;
  const double divergence_cap = 1e3 * (1.0 + lambda_sum * L);

  AmpTrajectory traj;
  traj.n = n;
  traj.layers = L;

  std::vector<double> m(m0.begin(), m0.end());
  std::vector<double> m_prev = m;          // last finite iterate, for the diverged report
  std::vector<double> e(n * L, 0.0);       // E(m^t)
  std::vector<double> e_prev(n * L, 0.0);  // E(m^{t-1}); zero at t = 0
  std::vector<double> col_in(n), col_out(n);

  traj.overlaps.push_back(column_overlaps(m, pop));
  if (cfg.record_every > 0) traj.snapshots.emplace_back(0, m);

  for (int t = 0; t < cfg.iterations; ++t) {
    // denoise all rows; accumulate the Onsager coefficients per layer
    std::vector<Eigen::VectorXd> partial_d;
    {
      const int chunks = 64;
      partial_d.assign(chunks, Eigen::VectorXd::Zero(L));
      const std::int64_t chunk = (n + chunks - 1) / chunks;
      parallel_for(chunks, [&](std::int64_t c0, std::int64_t c1) {
        for (std::int64_t c = c0; c < c1; ++c) {
          thread_local std::vector<double> de;
          de.resize(L);
          const std::int64_t lo = c * chunk;
          const std::int64_t hi = std::min<std::int64_t>(n, lo + chunk);
          for (std::int64_t i = lo; i < hi; ++i) {
            denoiser.denoise_row({m.data() + i * L, static_cast<std::size_t>(L)}, pop.z_at(i),
                                 {e.data() + i * L, static_cast<std::size_t>(L)}, de);
            for (int l = 0; l < L; ++l) partial_d[c](l) += de[l];
          }
        }
      });
    }
    Eigen::VectorXd d = Eigen::VectorXd::Zero(L);
    for (const auto& p : partial_d) d += p;
    d /= static_cast<double>(n);
    traj.onsager.push_back(d);
    traj.overlaps.push_back(column_overlaps(e, pop));

    // m^{t+1} per layer
    m_prev = m;
    for (int l = 0; l < L; ++l) {
      const double lam = cfg.lambdas[l];
      if (!views.visible(l) || lam == 0.0) {
        for (std::int64_t i = 0; i < n; ++i) m[i * L + l] = 0.0;
        continue;
      }
      for (std::int64_t i = 0; i < n; ++i) col_in[i] = e[i * L + l];
      views.matvec(l, col_in, col_out);
      const double coeff = std::sqrt(lam / static_cast<double>(n));
      const double onsager_coeff = lam * d(l);
      for (std::int64_t i = 0; i < n; ++i)
        m[i * L + l] = coeff * col_out[i] - onsager_coeff * e_prev[i * L + l];
    }
    std::swap(e, e_prev);  // e_prev now holds E(m^t); e is scratch

    double max_abs = 0.0;
    for (double v : m) {
      if (!std::isfinite(v)) max_abs = std::numeric_limits<double>::infinity();
      max_abs = std::max(max_abs, std::fabs(v));
    }
    if (!(max_abs <= divergence_cap)) {
      throw DivergedError("run_amp: iterate exceeded the divergence guard at step " +
                              std::to_string(t + 1),
                          t + 1, m_prev);
    }

    traj.steps_run = t + 1;
    if (cfg.record_every > 0 && (t + 1) % cfg.record_every == 0)
      traj.snapshots.emplace_back(t + 1, m);

    // truth-free stopping rule: successive denoised iterates agree
    if (cfg.early_stop && t >= 1) {
      double diff = 0.0;
      for (std::int64_t k = 0; k < n * L; ++k)
        diff = std::max(diff, std::fabs(e_prev[k] - e[k]));
      if (diff < cfg.early_stop_tol) {
        traj.early_stopped = true;
        break;
      }
    }
  }

  // final output x-hat = E(m^T)
  traj.final_m = m;
  traj.final_estimate.resize(n * L);
  parallel_for(n, [&](std::int64_t lo, std::int64_t hi) {
    thread_local std::vector<double> de;
    de.resize(L);
    for (std::int64_t i = lo; i < hi; ++i)
      denoiser.denoise_row({m.data() + i * L, static_cast<std::size_t>(L)}, pop.z_at(i),
                           {traj.final_estimate.data() + i * L, static_cast<std::size_t>(L)}, de);
  });
  traj.final_overlap = column_overlaps(traj.final_estimate, pop);
  return traj;
}

AmpTrajectory run_amp_on_graph(const MultiViewGraph& g, const LatentPopulation& pop,
                               const Denoiser& denoiser, const AmpConfig& cfg,
                               std::span<const double> m0) {
  const RescaledGraph rg = rescale_graph(g);
  AmpConfig effective = cfg;
  if (effective.lambdas.empty()) {
    effective.lambdas.resize(g.num_layers());
    for (int l = 0; l < g.num_layers(); ++l) effective.lambdas[l] = rg.scales[l].lambda_n;
  }
  for (int l = 0; l < g.num_layers(); ++l)
    if (!rg.scales[l].visible) effective.lambdas[l] = 0.0;
  const GraphViewSet views(rg);
  return run_amp(views, pop, denoiser, effective, m0);
}

LabelEstimates estimate_labels(const AmpTrajectory& traj, const LatentPopulation& pop,
                               const PriorSpec& prior) {
  const std::int64_t n = traj.n;
  const int L = traj.layers;
  LabelEstimates est;
  est.per_layer.assign(L, std::vector<std::int8_t>(n));
  for (std::int64_t i = 0; i < n; ++i)
    for (int l = 0; l < L; ++l)
      est.per_layer[l][i] = static_cast<std::int8_t>(sign_pm1(traj.final_estimate[i * L + l]));

  if (prior.family == Family::Multilayer) {
    const MultilayerDenoiser global(L, prior.rho, /*clamp_rho=*/true);
    est.global.resize(n);
    for (std::int64_t i = 0; i < n; ++i) {
      const double y = global.global_mean({traj.final_m.data() + i * L, static_cast<std::size_t>(L)});
      est.global[i] = static_cast<std::int8_t>(sign_pm1(y));
    }
  }
  (void)pop;
  return est;
}

RecoveryScore score_recovery(const AmpTrajectory& traj, const LabelEstimates& est,
                             const LatentPopulation& pop) {
  const int L = traj.layers;
  RecoveryScore score;
  score.overlap_per_layer.resize(L);
  score.accuracy_per_layer.resize(L);
  std::vector<std::int8_t> truth(pop.n);
  for (int l = 0; l < L; ++l) {
    for (std::int64_t i = 0; i < pop.n; ++i) truth[i] = pop.x_at(i, l);
    score.overlap_per_layer(l) = overlap(est.per_layer[l], truth);
    score.accuracy_per_layer(l) = accuracy(est.per_layer[l], truth);
  }
  if (!est.global.empty() && !pop.y.empty()) score.global_accuracy = accuracy(est.global, pop.y);

  std::vector<double> u(pop.n);
  for (std::int64_t i = 0; i < pop.n; ++i) {
    u[i] = traj.final_estimate[i * L];
    truth[i] = pop.x_at(i, 0);
  }
  score.mse_est = comembership_mse(u, truth);
  return score;
}

}  // namespace mvamp
