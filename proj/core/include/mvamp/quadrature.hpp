#pragma once

#include <cstdint>
#include <vector>

namespace mvamp {

// Nodes and weights for E[f(W)], W ~ N(0, 1): sum_i weights[i] f(points[i]).
struct GaussHermiteRule {
  std::vector<double> points;
  std::vector<double> weights;
};

// Golub-Welsch on the probabilists' Hermite recurrence.
GaussHermiteRule gauss_hermite(int nodes);

struct QuadratureSpec {
  enum class Method {
    MonteCarlo,          // general; chunked, antithetic in W'
    GaussHermite,        // 1-d smooth integrands (Semi)
    TensorGaussHermite,  // exact small-L oracle: enumerate states x tensor rule
  };

  Method method = Method::MonteCarlo;
  int nodes = 61;                // GH / tensor GH, per dimension
  std::int64_t samples = 200000; // MC
  std::uint64_t seed = 1;        // MC
  bool antithetic = true;        // MC
  int chunks = 64;               // MC reduction granularity (fixed, not #threads)

  static QuadratureSpec mc(std::int64_t samples, std::uint64_t seed = 1) {
    QuadratureSpec q;
    q.method = Method::MonteCarlo;
    q.samples = samples;
    q.seed = seed;
    return q;
  }
  static QuadratureSpec gh(int nodes = 61) {
    QuadratureSpec q;
    q.method = Method::GaussHermite;
    q.nodes = nodes;
    return q;
  }
  static QuadratureSpec tensor_gh(int nodes = 41) {
    QuadratureSpec q;
    q.method = Method::TensorGaussHermite;
    q.nodes = nodes;
    return q;
  }
};

}  // namespace mvamp
