#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "mvamp/denoisers.hpp"
#include "mvamp/models.hpp"

namespace mvamp {

// L symmetric operators of a shared dimension; the AMP engine runs the same
// recursion against spiked matrices, rescaled graphs, or any dense stand-in.
// matvec must be deterministic: rows are accumulated sequentially, only the
// row partition may run in parallel.
class ViewSet {
 public:
  virtual ~ViewSet() = default;
  virtual std::int64_t n() const = 0;
  virtual int num_layers() const = 0;
  virtual bool visible(int layer) const = 0;
  virtual void matvec(int layer, std::span<const double> v, std::span<double> out) const = 0;
};

class SpikedViewSet final : public ViewSet {
 public:
  explicit SpikedViewSet(const SpikedViews& views) : views_(&views) {}
  std::int64_t n() const override { return views_->n; }
  int num_layers() const override { return static_cast<int>(views_->views.size()); }
  bool visible(int) const override { return true; }
  void matvec(int layer, std::span<const double> v, std::span<double> out) const override;

 private:
  const SpikedViews* views_;
};

class GraphViewSet final : public ViewSet {
 public:
  explicit GraphViewSet(const RescaledGraph& rg) : rg_(&rg) {}
  std::int64_t n() const override { return rg_->n(); }
  int num_layers() const override { return rg_->num_layers(); }
  bool visible(int layer) const override { return rg_->scales[layer].visible; }
  void matvec(int layer, std::span<const double> v, std::span<double> out) const override;

 private:
  const RescaledGraph* rg_;
};

// Arbitrary dense symmetric matrices (test oracles).
class DenseViewSet final : public ViewSet {
 public:
  explicit DenseViewSet(std::vector<Eigen::MatrixXd> mats) : mats_(std::move(mats)) {}
  std::int64_t n() const override { return mats_.empty() ? 0 : mats_[0].rows(); }
  int num_layers() const override { return static_cast<int>(mats_.size()); }
  bool visible(int) const override { return true; }
  void matvec(int layer, std::span<const double> v, std::span<double> out) const override;

 private:
  std::vector<Eigen::MatrixXd> mats_;
};

struct AmpConfig {
  int iterations = 100;
  std::vector<double> lambdas;  // per-layer SNR in the update; empty on graphs = use lambda_n
  int record_every = 0;         // m snapshot period; 0 = none
  bool early_stop = false;      // stop when successive overlaps move < early_stop_tol
  double early_stop_tol = 1e-6;
};

struct AmpTrajectory {
  std::int64_t n = 0;
  int layers = 0;
  int steps_run = 0;
  bool early_stopped = false;

  // overlaps[t]: t = 0 is the raw init overlap (1/n) <m^0, X>; for t >= 1 it
  // is (1/n) <E(m^{t-1}), X> per layer, the quantity tracked by the SE
  // iterate q^t.
  std::vector<Eigen::VectorXd> overlaps;
  // onsager[s]: the per-layer Onsager coefficient d_s used in the update
  // producing m^{s+1}; always in [0, 1].
  std::vector<Eigen::VectorXd> onsager;
  std::vector<std::pair<int, std::vector<double>>> snapshots;  // (t, m^t row-major)

  std::vector<double> final_m;         // m^T, row-major n x L
  std::vector<double> final_estimate;  // E(m^T), row-major n x L
  Eigen::VectorXd final_overlap;       // (1/n) <E(m^T), X>
};

// Each entry of m^0 equals X_i^(l) with probability `fraction`, else 0.
std::vector<double> warm_init(const LatentPopulation& pop, double fraction, std::uint64_t seed);

// Algorithm: m^{t+1}_{i,l} = sqrt(lambda_l / n) sum_k A^(l)_{ik} E_l(m^t_k, Z_k)
//            - lambda_l d_t^(l) E_l(m^{t-1}_i, Z_i),
// d_t^(l) = (1/n) sum_k dE_l(m^t_k, Z_k), with E(m^{-1}) := 0. The truth in
// `pop` is used only to log overlaps, never in the update.
AmpTrajectory run_amp(const ViewSet& views, const LatentPopulation& pop, const Denoiser& denoiser,
                      const AmpConfig& cfg, std::span<const double> m0);

// Same recursion on rescaled adjacency views; empty cfg.lambdas defaults to
// the per-layer effective SNR lambda_n. Invisible layers are skipped.
AmpTrajectory run_amp_on_graph(const MultiViewGraph& g, const LatentPopulation& pop,
                               const Denoiser& denoiser, const AmpConfig& cfg,
                               std::span<const double> m0);

struct LabelEstimates {
  std::vector<std::vector<std::int8_t>> per_layer;  // sign(E_l(m^T)), sign(0) = +1
  std::vector<std::int8_t> global;                  // Multilayer: sign of the global-label mean
};

LabelEstimates estimate_labels(const AmpTrajectory& traj, const LatentPopulation& pop,
                               const PriorSpec& prior);

struct RecoveryScore {
  Eigen::VectorXd overlap_per_layer;   // |<xhat, x>| / n
  Eigen::VectorXd accuracy_per_layer;  // best-sign agreement
  double global_accuracy = std::numeric_limits<double>::quiet_NaN();  // Multilayer only
  double mse_est = std::numeric_limits<double>::quiet_NaN();  // co-membership MSE, layer 0
};

RecoveryScore score_recovery(const AmpTrajectory& traj, const LabelEstimates& est,
                             const LatentPopulation& pop);

}  // namespace mvamp
