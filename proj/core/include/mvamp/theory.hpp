#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mvamp/prior.hpp"
#include "mvamp/quadrature.hpp"
#include "mvamp/state_evolution.hpp"

namespace mvamp {

// Scalar-channel free energy F(lambda, q) = E log sum_{x,y} p(x,y|Z)
// exp(sum_l lambda_l q_l X_l x_l + sqrt(lambda_l q_l) W'_l x_l).
// Multilayer and Semi use their closed forms under the Gaussian expectation;
// Dynamic runs the log-domain chain recursion (never the 2^L sum).
McEstimate scalar_free_energy(const PriorSpec& prior, const Eigen::VectorXd& lambdas,
                              const Eigen::VectorXd& q, const QuadratureSpec& quad);

// G(q) = F(lambda, q) - sum_l lambda_l (q_l^2 + 2 q_l) / 4.
McEstimate g_objective(const PriorSpec& prior, const Eigen::VectorXd& lambdas,
                       const Eigen::VectorXd& q, const QuadratureSpec& quad);

// grad_l G = (lambda_l / 2) (T_l(lambda o q) - q_l)
McEstimate g_gradient(const PriorSpec& prior, const Eigen::VectorXd& lambdas,
                      const Eigen::VectorXd& q, const QuadratureSpec& quad);

// Posterior-covariance-squared Hessian, evaluated by enumeration over the
// latent states per sample; limited to small L.
Eigen::MatrixXd g_hessian(const PriorSpec& prior, const Eigen::VectorXd& lambdas,
                          const Eigen::VectorXd& q, const QuadratureSpec& quad);

struct FixedPointCandidate {
  Eigen::VectorXd q;
  double g_value = 0.0;
  bool converged = false;
};

struct FreeEnergyResult {
  Eigen::VectorXd q_star;
  double g_star = 0.0;
  double mi_limit = 0.0;
  Eigen::VectorXd mmse_layers;
  double mmse_implicit = std::numeric_limits<double>::quiet_NaN();  // Multilayer only
  double dmse = 1.0;
  bool near_degenerate = false;  // two fixed points with |dG| below MC resolution
  std::vector<FixedPointCandidate> fixed_points_examined;
};

// Runs se_fixed_point from the standard starts {1, 0.5, 1e-3} * ones,
// evaluates G at every distinct fixed point and at 0, and returns the argmax
// together with the limiting MI / MMSE package.
FreeEnergyResult maximize_g(const PriorSpec& prior, const Eigen::VectorXd& lambdas,
                            const QuadratureSpec& quad, double tol = 1e-6, int max_iter = 10000);

FreeEnergyResult limiting_quantities(const PriorSpec& prior, const Eigen::VectorXd& lambdas,
                                     const QuadratureSpec& quad, double tol = 1e-6,
                                     int max_iter = 10000);

struct ThresholdReport {
  bool feasible = false;
  double criterion_value = std::numeric_limits<double>::quiet_NaN();
  double critical_lambda = std::numeric_limits<double>::quiet_NaN();
  double theta_star = std::numeric_limits<double>::quiet_NaN();
  double hessian_max_eig = std::numeric_limits<double>::quiet_NaN();
  bool leading_eigvec_sign_ok = false;
};

// Closed-form Hessian of G at q = 0 (Multilayer or Dynamic prior).
Eigen::MatrixXd hessian_at_zero(const PriorSpec& prior, const Eigen::VectorXd& lambdas);

// Multilayer weak-recovery criterion
//   sum_l beta lambda_l / (1 - (1 - beta) lambda_l) > 1,  beta = (1-2rho)^4,
// valid for all lambda_l <= 1 (rejected otherwise). Also reports the max
// eigenvalue of the closed-form Hessian at 0 and its sign agreement.
ThresholdReport threshold_ml(const Eigen::VectorXd& lambdas, double rho);

// Minimum solution in (0, pi/(L+1)] of
//   sin((L+1)t) - 2 (1-2rho)^2 sin(L t) + (1-2rho)^4 sin((L-1)t) = 0.
double theta_star(int L, double rho);

// Equal-lambda dynamic threshold lambda_c = (1 - 2 a cos(theta*) + a^2) /
// (1 - a^2), a = (1-2rho)^2; equivalently 1 / lambda_max(K) for the
// Kac-Murdock-Szego matrix K = (a^{|r-s|}). hessian_max_eig carries the
// numeric lambda_max(K) cross-check.
ThresholdReport threshold_dyn(int L, double rho);
ThresholdReport threshold_dyn(int L, double rho, double lambda);

// Kac-Murdock-Szego matrix ((1-2rho)^{2|r-s|}).
Eigen::MatrixXd kms_matrix(int L, double rho);

// General-lambda feasibility via the closed-form Hessian at 0: feasible iff
// the largest eigenvalue is positive; also checks that the leading
// eigenvector (power iteration from the all-ones vector) can be taken
// entrywise nonnegative. Disagreement between the two signals is left
// visible in the report.
ThresholdReport hessian_zero_feasibility(const PriorSpec& prior, const Eigen::VectorXd& lambdas);

}  // namespace mvamp
