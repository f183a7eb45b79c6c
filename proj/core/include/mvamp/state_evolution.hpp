#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "mvamp/denoisers.hpp"
#include "mvamp/prior.hpp"
#include "mvamp/quadrature.hpp"

namespace mvamp {

// Vector estimate with per-coordinate Monte Carlo standard errors (zero for
// quadrature methods).
struct McEstimate {
  Eigen::VectorXd value;
  Eigen::VectorXd std_error;
};

// Chunked Monte Carlo mean of a vector statistic over (prior draw, W row),
// W ~ N(0,1)^L. Chunks are independently seeded and reduced in a fixed
// order, so results do not depend on the thread count. With antithetic
// sampling fn is evaluated at W and -W and the pair average is one sample.
McEstimate mc_prior_expect(const PriorSpec& prior, int dim, const QuadratureSpec& quad,
                           const std::function<void(const PriorDraw&, const std::vector<double>&,
                                                    std::vector<double>&)>& fn);

// Scalar-channel overlap profile; mu = kappa = q for Bayes denoisers.
struct SEProfile {
  Eigen::VectorXd q;
  Eigen::VectorXd mu;
  Eigen::VectorXd kappa;
  int t = 0;
};

// The SE mapping T(gamma): T_l = E[X^(l) E_l(gamma o X + sqrt(gamma) o W', Z)],
// which equals E[<x^(l)>^2] for the Bayes denoiser.
McEstimate se_map(const PriorSpec& prior, const Eigen::VectorXd& gamma, const QuadratureSpec& quad);

struct FixedPointResult {
  Eigen::VectorXd q;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;   // Monte Carlo noise floor reached before tol
  double residual = 0.0;  // ||T(lambda o q) - q||_inf at exit
  bool at_zero = false;
  std::vector<Eigen::VectorXd> history;  // q^0, q^1, ...
};

// Iterates q <- T(lambda o q) from q0 until the sup-norm step falls below
// tol or the budget runs out (reported, not thrown). Monte Carlo evaluation
// reuses quad.seed on every call, so the iteration is a deterministic
// sample-average map; a stall of the step sequence (noise floor) is also
// reported rather than burning the budget.
FixedPointResult se_fixed_point(const PriorSpec& prior, const Eigen::VectorXd& lambdas,
                                const Eigen::VectorXd& q0, double tol, int max_iter,
                                const QuadratureSpec& quad);

// One (mu, kappa) step for an arbitrary denoiser:
//   mtilde_l ~ N(lambda_l mu_l X^(l), lambda_l kappa_l),
//   mu'_l = E[X^(l) E_l(mtilde, Z)], kappa'_l = E[E_l(mtilde, Z)^2].
struct GeneralStepResult {
  McEstimate mu;
  McEstimate kappa;
  McEstimate nishimori_gap;  // E[X e - e^2] from the same samples
};

GeneralStepResult se_general_step(const PriorSpec& prior, const Denoiser& denoiser,
                                  const Eigen::VectorXd& mu, const Eigen::VectorXd& kappa,
                                  const Eigen::VectorXd& lambdas, const QuadratureSpec& quad);

// T_l(t gamma) along a ray, with discrete second differences and flags for
// grid intervals whose second difference exceeds +3 standard errors
// (candidate violations of ray concavity).
struct RayScan {
  Eigen::VectorXd t_grid;
  Eigen::MatrixXd values;       // grid x L
  Eigen::MatrixXd std_errors;   // grid x L
  Eigen::MatrixXd second_diff;  // (grid-2) x L, divided-difference estimate
  Eigen::MatrixXd second_diff_sd;
  std::vector<std::pair<int, int>> violations;  // (interior grid index, layer)
};

RayScan ray_concavity_scan(const PriorSpec& prior, const Eigen::VectorXd& gamma_dir,
                           const Eigen::VectorXd& t_grid, const QuadratureSpec& quad);

}  // namespace mvamp
