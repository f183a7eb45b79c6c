#include "mvamp/metrics.hpp"

#include <cmath>

#include "mvamp/common.hpp"

namespace mvamp {

double overlap(std::span<const std::int8_t> xhat, std::span<const std::int8_t> x) {
  if (xhat.size() != x.size()) throw ParameterError("overlap: length mismatch");
  std::int64_t s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<std::int64_t>(xhat[i]) * x[i];
  return std::fabs(static_cast<double>(s)) / static_cast<double>(x.size());
}

double accuracy(std::span<const std::int8_t> xhat, std::span<const std::int8_t> x) {
  return 0.5 * (1.0 + overlap(xhat, x));
}

double soft_overlap(std::span<const double> e, std::span<const std::int8_t> x, std::int64_t stride,
                    std::int64_t offset) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  double s = 0.0;
  for (std::int64_t i = 0; i < n; ++i) s += e[offset + i * stride] * x[i];
  return s / static_cast<double>(n);
}

double comembership_mse(std::span<const double> u, std::span<const std::int8_t> x) {
  if (u.size() != x.size()) throw ParameterError("comembership_mse: length mismatch");
  const double n = static_cast<double>(x.size());
  // sum_{i<j} (x_i x_j - u_i u_j)^2
  //   = n(n-1)/2 - (S_xu^2 - S_u2) + (S_u2^2 - S_u4)/2
  // with S_xu = sum x_i u_i, S_u2 = sum u_i^2, S_u4 = sum u_i^4, using
  // x_i^2 = 1. Avoids forming the n x n matrix.
  double s_xu = 0.0, s_u2 = 0.0, s_u4 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s_xu += u[i] * x[i];
    const double u2 = u[i] * u[i];
    s_u2 += u2;
    s_u4 += u2 * u2;
  }
  const double pair_sum = 0.5 * n * (n - 1.0) - (s_xu * s_xu - s_u2) + 0.5 * (s_u2 * s_u2 - s_u4);
  return 2.0 * pair_sum / (n * (n - 1.0));
}

}  // namespace mvamp
