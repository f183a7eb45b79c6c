#pragma once

#include <memory>
#include <span>
#include <vector>

#include "mvamp/prior.hpp"

namespace mvamp {

struct DenoiserOutput {
  std::vector<double> e;   // posterior means, in [-1, 1]
  std::vector<double> de;  // own-coordinate derivatives, = 1 - e^2 here
};

// Scalar-channel posterior-mean denoiser bound to a prior. Pure and
// reentrant; safe to call concurrently across rows.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual int layers() const = 0;
  // m has `layers()` entries; z is ignored unless the prior carries side
  // info. e and de must have `layers()` entries.
  virtual void denoise_row(std::span<const double> m, Side z, std::span<double> e,
                           std::span<double> de) const = 0;

  DenoiserOutput denoise(std::span<const double> m, Side z = kStar) const {
    DenoiserOutput out;
    out.e.resize(layers());
    out.de.resize(layers());
    denoise_row(m, z, out.e, out.de);
    return out;
  }
};

// Multilayer prior: all products of cosh are carried as sums of log cosh and
// combined through a sigmoid of their difference, so inputs of order
// lambda * L stay finite. Requires rho in (0, 1); with clamp_rho the rate is
// clamped into [rho_min, 1 - rho_min] instead (the tilt rho_bar diverges at
// the endpoints).
class MultilayerDenoiser final : public Denoiser {
 public:
  MultilayerDenoiser(int L, double rho, bool clamp_rho = false, double rho_min = 1e-8);
  int layers() const override { return num_layers_; }
  void denoise_row(std::span<const double> m, Side z, std::span<double> e,
                   std::span<double> de) const override;
  // Posterior mean of the global label y given a pseudo-observation row.
  double global_mean(std::span<const double> m) const;
  double rho() const { return rho_; }

 private:
  int num_layers_;
  double rho_;
  double rho_bar_;
};

// Dynamic (hidden Markov chain) prior, forward filter plus backward
// smoothing, O(L) per row. The forward table lives in the log domain;
// rho = 0 and rho = 1 are valid chain limits.
class DynamicDenoiser final : public Denoiser {
 public:
  DynamicDenoiser(int L, double rho);
  int layers() const override { return num_layers_; }
  void denoise_row(std::span<const double> m, Side z, std::span<double> e,
                   std::span<double> de) const override;

 private:
  int num_layers_;
  double rho_;
  double log_stay_;
  double log_flip_;
};

// Semi-supervised prior, L = 1. Revealed labels are returned verbatim with
// zero derivative.
class SemiDenoiser final : public Denoiser {
 public:
  explicit SemiDenoiser(double delta);
  int layers() const override { return 1; }
  void denoise_row(std::span<const double> m, Side z, std::span<double> e,
                   std::span<double> de) const override;

 private:
  double delta_;
};

// Bayes-optimal denoiser for a prior; Multilayer gets the default rho clamp
// so the rho = 0 and rho = 1/2 limits work.
std::unique_ptr<Denoiser> bayes_denoiser(const PriorSpec& prior);

// Single-call convenience entry points.
DenoiserOutput denoise_ml(std::span<const double> m, double rho, bool clamp_rho = false);
double denoise_ml_global(std::span<const double> m, double rho, bool clamp_rho = false);
DenoiserOutput denoise_dyn(std::span<const double> m, double rho);
DenoiserOutput denoise_semi(double m, Side z, double delta);

// Exhaustive-enumeration posterior mean over all 2^(L+L1) latent states.
// Test oracle; refuses beyond the enumeration budget.
std::vector<double> denoise_bruteforce(const PriorSpec& prior, std::span<const double> m,
                                       Side z = kStar);

}  // namespace mvamp
