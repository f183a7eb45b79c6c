#pragma once

#include <cstdint>
#include <vector>

#include "mvamp/common.hpp"
#include "mvamp/rng.hpp"

namespace mvamp {

enum class Family { Multilayer, Dynamic, Semi };

// Side-information symbol: +1 / -1 revealed, 0 = unrevealed (the "star").
using Side = std::int8_t;
constexpr Side kStar = 0;

// Per-node joint law p(x, y, z). Multilayer: y uniform global label, each
// x^(l) = y flipped w.p. rho. Dynamic: x^(1) uniform, Markov flips w.p. rho.
// Semi: L=1, x uniform, z reveals x with class-dependent rates eps_plus /
// eps_minus.
struct PriorSpec {
  Family family = Family::Multilayer;
  int num_layers = 1;
  double rho = 0.0;       // flip rate (Multilayer, Dynamic)
  double eps_plus = 0.0;  // reveal rate for x = +1 (Semi)
  double eps_minus = 0.0; // reveal rate for x = -1 (Semi)

  static PriorSpec multilayer(int L, double rho);
  static PriorSpec dynamic(int L, double rho);
  static PriorSpec semi(double eps_plus, double eps_minus);
  // Semi from the (eps, delta) reparametrization.
  static PriorSpec semi_mean_skew(double eps, double delta);

  // Throws ParameterError on out-of-domain parameters.
  void validate() const;

  int implicit_layers() const { return family == Family::Multilayer ? 1 : 0; }
  bool has_side_info() const { return family == Family::Semi; }

  double eps() const { return 0.5 * (eps_plus + eps_minus); }
  // delta = (eps_minus - eps_plus) / (2 - 2 eps); requires eps < 1.
  double delta() const;

  // Mutual information i_p(x, y; z) under the prior; 0 when z is absent.
  double side_information_mi() const;
  // Dummy co-membership MSE achievable from side information alone.
  double dummy_mse() const;
};

// One sampled row (x, y, z) of the prior.
struct PriorDraw {
  std::vector<std::int8_t> x;  // length L, +-1
  std::int8_t y = 0;           // +-1 for Multilayer, 0 otherwise
  Side z = kStar;              // Semi only
};

void sample_prior_row(const PriorSpec& prior, RngStream& rng, PriorDraw& out);

// Exhaustive enumeration of the latent states (x, y) with prior weights
// p(x, y | z). Backs the brute-force denoiser and the exact small-L
// quadrature oracles. Zero-weight states are kept (weight 0.0).
struct PriorState {
  std::vector<std::int8_t> x;
  std::int8_t y;
  double weight;
};

// Throws ParameterError when L + L1 exceeds max_bits.
std::vector<PriorState> enumerate_prior_states(const PriorSpec& prior, Side z, int max_bits = 20);

// Joint enumeration of (x, y, z) with weights p(x, y, z); z = star with
// weight 1 when the prior carries no side information.
struct JointState {
  std::vector<std::int8_t> x;
  std::int8_t y;
  Side z;
  double weight;
};

std::vector<JointState> enumerate_joint_states(const PriorSpec& prior, int max_bits = 20);

}  // namespace mvamp
