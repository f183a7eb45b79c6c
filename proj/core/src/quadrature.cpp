#include "mvamp/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "mvamp/common.hpp"

namespace mvamp {

GaussHermiteRule gauss_hermite(int nodes) {
  if (nodes < 1) throw ParameterError("gauss_hermite: nodes must be >= 1");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(nodes, nodes);
  for (int k = 1; k < nodes; ++k) {
    const double beta = std::sqrt(static_cast<double>(k));
    jacobi(k - 1, k) = beta;
    jacobi(k, k - 1) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  GaussHermiteRule rule;
  rule.points.resize(nodes);
  rule.weights.resize(nodes);
  for (int i = 0; i < nodes; ++i) {
    rule.points[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = v0 * v0;
  }
  return rule;
}

}  // namespace mvamp
