#include "mvamp/denoisers.hpp"

#include <algorithm>
#include <cmath>

namespace mvamp {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

MultilayerDenoiser::MultilayerDenoiser(int L, double rho, bool clamp_rho, double rho_min)
    : num_layers_(L), rho_(rho) {
  if (L < 1) throw ParameterError("MultilayerDenoiser: L must be >= 1");
  if (clamp_rho) rho_ = std::clamp(rho, rho_min, 1.0 - rho_min);
  if (!(rho_ > 0.0 && rho_ < 1.0))
    throw ParameterError("MultilayerDenoiser: rho must lie in (0, 1); pass clamp_rho for the endpoints");
  rho_bar_ = 0.5 * std::log((1.0 - rho_) / rho_);
}

void MultilayerDenoiser::denoise_row(std::span<const double> m, Side, std::span<double> e,
                                     std::span<double> de) const {
  double sp = 0.0, sm = 0.0;  // sum log cosh(m +- rho_bar)
  for (int l = 0; l < num_layers_; ++l) {
    sp += log_cosh(m[l] + rho_bar_);
    sm += log_cosh(m[l] - rho_bar_);
  }
  // weight of the y = +1 branch
  const double w = 1.0 / (1.0 + std::exp(sm - sp));
  for (int l = 0; l < num_layers_; ++l) {
    const double v = w * std::tanh(m[l] + rho_bar_) + (1.0 - w) * std::tanh(m[l] - rho_bar_);
    e[l] = v;
    de[l] = 1.0 - v * v;
  }
}

double MultilayerDenoiser::global_mean(std::span<const double> m) const {
  double sp = 0.0, sm = 0.0;
  for (int l = 0; l < num_layers_; ++l) {
    sp += log_cosh(m[l] + rho_bar_);
    sm += log_cosh(m[l] - rho_bar_);
  }
  return std::tanh(0.5 * (sp - sm));
}

DynamicDenoiser::DynamicDenoiser(int L, double rho) : num_layers_(L), rho_(rho) {
  if (L < 1) throw ParameterError("DynamicDenoiser: L must be >= 1");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ParameterError("DynamicDenoiser: rho must be in [0, 1]");
  log_stay_ = rho < 1.0 ? std::log1p(-rho) : kNegInf;
  log_flip_ = rho > 0.0 ? std::log(rho) : kNegInf;
}

void DynamicDenoiser::denoise_row(std::span<const double> m, Side, std::span<double> e,
                                  std::span<double> de) const {
  const int L = num_layers_;
  if (L == 1) {
    e[0] = std::tanh(m[0]);
    de[0] = 1.0 - e[0] * e[0];
    return;
  }

  // forward filter, log domain; lg[l] = (log g_l(+1), log g_l(-1)) up to a
  // common constant
  thread_local std::vector<double> lgp, lgm;
  lgp.resize(L);
  lgm.resize(L);
  lgp[0] = m[0];
  lgm[0] = -m[0];
  for (int l = 1; l < L; ++l) {
    lgp[l] = m[l] + log_sum_exp2(log_stay_ + lgp[l - 1], log_flip_ + lgm[l - 1]);
    lgm[l] = -m[l] + log_sum_exp2(log_flip_ + lgp[l - 1], log_stay_ + lgm[l - 1]);
  }

  // backward smoothing through the filtered marginals
  e[L - 1] = std::tanh(0.5 * (lgp[L - 1] - lgm[L - 1]));
  for (int l = L - 2; l >= 0; --l) {
    // E[x_l | x_{l+1} = +-1, m_{1:l+1}]; the e^{m_{l+1}} factors cancel
    const double r_plus = std::tanh(0.5 * ((lgp[l] + log_stay_) - (lgm[l] + log_flip_)));
    const double r_minus = std::tanh(0.5 * ((lgp[l] + log_flip_) - (lgm[l] + log_stay_)));
    const double p_plus = 0.5 * (1.0 + e[l + 1]);
    e[l] = p_plus * r_plus + (1.0 - p_plus) * r_minus;
  }
  for (int l = 0; l < L; ++l) de[l] = 1.0 - e[l] * e[l];
}

SemiDenoiser::SemiDenoiser(double delta) : delta_(delta) {
  if (!(std::fabs(delta) <= 1.0)) throw ParameterError("SemiDenoiser: |delta| must be <= 1");
}

void SemiDenoiser::denoise_row(std::span<const double> m, Side z, std::span<double> e,
                               std::span<double> de) const {
  if (z != kStar) {
    e[0] = static_cast<double>(z);
    de[0] = 0.0;
    return;
  }
  if (std::fabs(delta_) >= 1.0) {
    // the unlabeled conditional is a point mass; avoids 0/0 at saturated m
    e[0] = delta_ >= 1.0 ? 1.0 : -1.0;
    de[0] = 0.0;
    return;
  }
  const double t = std::tanh(m[0]);
  e[0] = (t + delta_) / (1.0 + delta_ * t);
  de[0] = 1.0 - e[0] * e[0];
}

std::unique_ptr<Denoiser> bayes_denoiser(const PriorSpec& prior) {
  prior.validate();
  switch (prior.family) {
    case Family::Multilayer:
      return std::make_unique<MultilayerDenoiser>(prior.num_layers, prior.rho, /*clamp_rho=*/true);
    case Family::Dynamic:
      return std::make_unique<DynamicDenoiser>(prior.num_layers, prior.rho);
    case Family::Semi:
      return std::make_unique<SemiDenoiser>(prior.delta());
  }
  throw ParameterError("bayes_denoiser: unknown family");
}

DenoiserOutput denoise_ml(std::span<const double> m, double rho, bool clamp_rho) {
  MultilayerDenoiser d(static_cast<int>(m.size()), rho, clamp_rho);
  return d.denoise(m);
}

double denoise_ml_global(std::span<const double> m, double rho, bool clamp_rho) {
  MultilayerDenoiser d(static_cast<int>(m.size()), rho, clamp_rho);
  return d.global_mean(m);
}

DenoiserOutput denoise_dyn(std::span<const double> m, double rho) {
  DynamicDenoiser d(static_cast<int>(m.size()), rho);
  return d.denoise(m);
}

DenoiserOutput denoise_semi(double m, Side z, double delta) {
  SemiDenoiser d(delta);
  const double mv[1] = {m};
  return d.denoise(std::span<const double>(mv, 1), z);
}

std::vector<double> denoise_bruteforce(const PriorSpec& prior, std::span<const double> m, Side z) {
  const auto states = enumerate_prior_states(prior, z);
  const int L = prior.num_layers;

  double max_lw = kNegInf;
  std::vector<double> lw(states.size(), kNegInf);
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (states[s].weight <= 0.0) continue;
    double v = std::log(states[s].weight);
    for (int l = 0; l < L; ++l) v += m[l] * states[s].x[l];
    lw[s] = v;
    max_lw = std::max(max_lw, v);
  }
  if (max_lw == kNegInf) throw NumericalError("denoise_bruteforce: all states have zero weight");

  std::vector<double> num(L, 0.0);
  double den = 0.0;
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (lw[s] == kNegInf) continue;
    const double w = std::exp(lw[s] - max_lw);
    den += w;
    for (int l = 0; l < L; ++l) num[l] += w * states[s].x[l];
  }
  for (int l = 0; l < L; ++l) num[l] /= den;
  return num;
}

}  // namespace mvamp
