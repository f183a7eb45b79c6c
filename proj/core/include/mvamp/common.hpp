#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvamp {

// Invalid parameter values (bad rho, eps outside [0,1], enumeration budget, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Parameters are well-formed but describe an impossible object
// (negative edge rate, a/n > 1, threshold formula outside its regime).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation produced non-finite intermediates.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// AMP iterate blew up; carries the last finite snapshot for post-mortem.
class DivergedError : public NumericalError {
 public:
  DivergedError(const std::string& what, int step, std::vector<double> last_m)
      : NumericalError(what), step(step), last_finite_m(std::move(last_m)) {}
  int step;
  std::vector<double> last_finite_m;  // row-major n x L
};

// log cosh(u) without overflow: |u| - log 2 + log1p(exp(-2|u|))
inline double log_cosh(double u) {
  const double a = std::fabs(u);
  return a - 0.6931471805599453 + std::log1p(std::exp(-2.0 * a));
}

// log(exp(a) + exp(b)), tolerating -inf arguments
inline double log_sum_exp2(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

// Tie rule used everywhere a +-1 decision is taken from a real score.
inline int sign_pm1(double v) { return v >= 0.0 ? 1 : -1; }

}  // namespace mvamp
