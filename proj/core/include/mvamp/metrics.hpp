#pragma once

#include <cstdint>
#include <span>

namespace mvamp {

// |<xhat, x>| / n for two +-1 vectors.
double overlap(std::span<const std::int8_t> xhat, std::span<const std::int8_t> x);

// Fraction agreeing after the better global sign; equals (1 + overlap) / 2.
double accuracy(std::span<const std::int8_t> xhat, std::span<const std::int8_t> x);

// Signed correlation (1/n) sum e_i x_i of a real estimate against +-1 truth.
double soft_overlap(std::span<const double> e, std::span<const std::int8_t> x, std::int64_t stride = 1,
                    std::int64_t offset = 0);

// Co-membership MSE for a factored estimate c_ij = u_i u_j:
//   (2 / (n(n-1))) sum_{i<j} (x_i x_j - u_i u_j)^2.
double comembership_mse(std::span<const double> u, std::span<const std::int8_t> x);

}  // namespace mvamp
