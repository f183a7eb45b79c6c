#include "mvamp/state_evolution.hpp"

#include <cmath>
#include <functional>

#include "mvamp/parallel.hpp"

namespace mvamp {

namespace {

void check_nonneg(const Eigen::VectorXd& v, const char* what) {
  for (int i = 0; i < v.size(); ++i)
    if (!(v(i) >= 0.0)) throw ParameterError(std::string(what) + " must be >= 0");
}

}  // namespace

McEstimate mc_prior_expect(const PriorSpec& prior, int dim, const QuadratureSpec& quad,
                           const std::function<void(const PriorDraw&, const std::vector<double>&,
                                                    std::vector<double>&)>& fn) {
  const int L = prior.num_layers;
  const int chunks = std::max(1, quad.chunks);
  const std::int64_t per_chunk = (quad.samples + chunks - 1) / chunks;

  std::vector<Eigen::VectorXd> sums(chunks, Eigen::VectorXd::Zero(dim));
  std::vector<Eigen::VectorXd> sqsums(chunks, Eigen::VectorXd::Zero(dim));
  std::vector<std::int64_t> counts(chunks, 0);

  parallel_for(chunks, [&](std::int64_t c0, std::int64_t c1) {

    for (std::int64_t c = c0; c < c1; ++c) {
      RngStream rng(quad.seed, {stream::se_mc, static_cast<std::uint64_t>(c)});
      PriorDraw draw;
      std::vector<double> w(L), wneg(L), val(dim), val2(dim);
      for (std::int64_t s = 0; s < per_chunk; ++s) {
        sample_prior_row(prior, rng, draw);
        for (int l = 0; l < L; ++l) w[l] = rng.normal();
        fn(draw, w, val);
        if (quad.antithetic) {
          for (int l = 0; l < L; ++l) wneg[l] = -w[l];
          fn(draw, wneg, val2);
          for (int d = 0; d < dim; ++d) val[d] = 0.5 * (val[d] + val2[d]);
        }
        for (int d = 0; d < dim; ++d) {
          sums[c](d) += val[d];
          sqsums[c](d) += val[d] * val[d];
        }
        counts[c] += 1;
      }
    }
  }, /*serial_below=*/2);

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(dim);
  std::int64_t n = 0;
  for (int c = 0; c < chunks; ++c) {
    sum += sums[c];
    sq += sqsums[c];
    n += counts[c];
  }

  McEstimate est;
  est.value = sum / static_cast<double>(n);
  est.std_error.resize(dim);
  for (int d = 0; d < dim; ++d) {
    const double var = std::max(0.0, sq(d) / n - est.value(d) * est.value(d));
    est.std_error(d) = std::sqrt(var / static_cast<double>(n));
  }
  for (int d = 0; d < dim; ++d)
    if (!std::isfinite(est.value(d))) throw NumericalError("mc_prior_expect: non-finite estimate");
  return est;
}

namespace {

// Exact expectation over the enumerated prior states and a tensor-product
// Gauss-Hermite rule over W. Cost |states| * nodes^L; small-L oracle.
McEstimate tensor_gh_expect(const PriorSpec& prior, int dim, int nodes,
                            const std::function<void(const JointState&, const std::vector<double>&,
                                                     std::vector<double>&)>& fn) {
  const int L = prior.num_layers;
  if (L > 6) throw ParameterError("tensor_gh_expect: L too large for the tensor rule");
  const GaussHermiteRule rule = gauss_hermite(nodes);
  const auto states = enumerate_joint_states(prior);

  std::int64_t grid = 1;
  for (int l = 0; l < L; ++l) grid *= nodes;

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
  std::vector<double> w(L), val(dim);
  std::vector<int> idx(L);
  for (const auto& st : states) {
    if (st.weight <= 0.0) continue;
    for (std::int64_t g = 0; g < grid; ++g) {
      std::int64_t rem = g;
      double wq = 1.0;
      for (int l = 0; l < L; ++l) {
        idx[l] = static_cast<int>(rem % nodes);
        rem /= nodes;
        w[l] = rule.points[idx[l]];
        wq *= rule.weights[idx[l]];
      }
      fn(st, w, val);
      for (int d = 0; d < dim; ++d) acc(d) += st.weight * wq * val[d];
    }
  }
  McEstimate est;
  est.value = acc;
  est.std_error = Eigen::VectorXd::Zero(dim);
  return est;
}

// T_Semi integrand conditional on z = star, X symmetrized out:
//   ((1 - d^2) tanh c + d^2 (1 - tanh^2 c)) / (1 - d^2 tanh^2 c).
double semi_map_integrand(double c, double delta) {
  const double d2 = delta * delta;
  if (d2 >= 1.0) return 1.0;  // one community fully revealed pins the sign
  const double t = std::tanh(c);
  return ((1.0 - d2) * t + d2 * (1.0 - t * t)) / (1.0 - d2 * t * t);
}

}  // namespace

McEstimate se_map(const PriorSpec& prior, const Eigen::VectorXd& gamma, const QuadratureSpec& quad) {
  prior.validate();
  check_nonneg(gamma, "se_map: gamma");
  const int L = prior.num_layers;
  if (gamma.size() != L) throw ParameterError("se_map: gamma must have one entry per layer");

  if (quad.method == QuadratureSpec::Method::GaussHermite) {
    if (prior.family != Family::Semi)
      throw ParameterError("se_map: the 1-d Gauss-Hermite path applies to the Semi prior only");
    const GaussHermiteRule rule = gauss_hermite(quad.nodes);
    const double g = gamma(0);
    const double delta = prior.delta();
    double acc = 0.0;
    for (int i = 0; i < quad.nodes; ++i)
      acc += rule.weights[i] * semi_map_integrand(g + std::sqrt(g) * rule.points[i], delta);
    McEstimate est;
    est.value = Eigen::VectorXd::Constant(1, prior.eps() + (1.0 - prior.eps()) * acc);
    est.std_error = Eigen::VectorXd::Zero(1);
    return est;
  }

  const auto denoiser = bayes_denoiser(prior);
  // buffers are per thread; mc_prior_expect runs chunks concurrently
  auto eval = [&](const std::vector<std::int8_t>& x, Side z, const std::vector<double>& w,
                  std::vector<double>& out) {
    thread_local std::vector<double> m, e, de;
    m.resize(L);
    e.resize(L);
    de.resize(L);
    for (int l = 0; l < L; ++l) m[l] = gamma(l) * x[l] + std::sqrt(gamma(l)) * w[l];
    denoiser->denoise_row(m, z, e, de);
    for (int l = 0; l < L; ++l) out[l] = x[l] * e[l];
  };

  if (quad.method == QuadratureSpec::Method::TensorGaussHermite) {
    return tensor_gh_expect(prior, L, quad.nodes,
                            [&](const JointState& st, const std::vector<double>& w,
                                std::vector<double>& out) { eval(st.x, st.z, w, out); });
  }

  return mc_prior_expect(prior, L, quad,
                   [&](const PriorDraw& draw, const std::vector<double>& w, std::vector<double>& out) {
                     eval(draw.x, draw.z, w, out);
                   });
}

FixedPointResult se_fixed_point(const PriorSpec& prior, const Eigen::VectorXd& lambdas,
                                const Eigen::VectorXd& q0, double tol, int max_iter,
                                const QuadratureSpec& quad) {
  check_nonneg(lambdas, "se_fixed_point: lambdas");
  FixedPointResult res;
  res.q = q0;
  res.history.push_back(q0);
  Eigen::VectorXd next;
  // under Monte Carlo evaluation the steps plateau at the noise floor; stop
  // once no new minimum step has appeared for a whole window
  double best_step = std::numeric_limits<double>::infinity();
  int since_best = 0;
  constexpr int kStallWindow = 25;
  for (int it = 0; it < max_iter; ++it) {
    next = se_map(prior, (lambdas.array() * res.q.array()).matrix(), quad).value;
    const double step = (next - res.q).lpNorm<Eigen::Infinity>();
    res.q = next;
    res.history.push_back(next);
    res.iterations = it + 1;
    if (step < tol) {
      res.converged = true;
      break;
    }
    if (quad.method == QuadratureSpec::Method::MonteCarlo) {
      if (step < 0.9 * best_step) {
        best_step = step;
        since_best = 0;
      } else if (++since_best >= kStallWindow) {
        res.stalled = true;
        break;
      }
    }
  }
  res.residual =
      (se_map(prior, (lambdas.array() * res.q.array()).matrix(), quad).value - res.q)
          .lpNorm<Eigen::Infinity>();
  res.at_zero = res.q.lpNorm<Eigen::Infinity>() < std::max(tol * 10.0, 1e-4);
  return res;
}

GeneralStepResult se_general_step(const PriorSpec& prior, const Denoiser& denoiser,
                                  const Eigen::VectorXd& mu, const Eigen::VectorXd& kappa,
                                  const Eigen::VectorXd& lambdas, const QuadratureSpec& quad) {
  prior.validate();
  check_nonneg(kappa, "se_general_step: kappa");
  check_nonneg(lambdas, "se_general_step: lambdas");
  const int L = prior.num_layers;

  auto stat = [&](const std::vector<std::int8_t>& x, Side z, const std::vector<double>& w,
                  std::vector<double>& out) {
    thread_local std::vector<double> m, e, de;
    m.resize(L);
    e.resize(L);
    de.resize(L);
    for (int l = 0; l < L; ++l)
      m[l] = lambdas(l) * mu(l) * x[l] + std::sqrt(lambdas(l) * kappa(l)) * w[l];
    denoiser.denoise_row(m, z, e, de);
    for (int l = 0; l < L; ++l) {
      out[l] = x[l] * e[l];      // mu'
      out[L + l] = e[l] * e[l];  // kappa'
      out[2 * L + l] = out[l] - out[L + l];
    }
  };

  McEstimate all;
  if (quad.method == QuadratureSpec::Method::TensorGaussHermite) {
    all = tensor_gh_expect(prior, 3 * L, quad.nodes,
                           [&](const JointState& st, const std::vector<double>& w,
                               std::vector<double>& out) { stat(st.x, st.z, w, out); });
  } else {
    all = mc_prior_expect(prior, 3 * L, quad,
                    [&](const PriorDraw& draw, const std::vector<double>& w,
                        std::vector<double>& out) { stat(draw.x, draw.z, w, out); });
  }

  GeneralStepResult res;
  res.mu = {all.value.segment(0, L), all.std_error.segment(0, L)};
  res.kappa = {all.value.segment(L, L), all.std_error.segment(L, L)};
  res.nishimori_gap = {all.value.segment(2 * L, L), all.std_error.segment(2 * L, L)};
  return res;
}

RayScan ray_concavity_scan(const PriorSpec& prior, const Eigen::VectorXd& gamma_dir,
                           const Eigen::VectorXd& t_grid, const QuadratureSpec& quad) {
  check_nonneg(gamma_dir, "ray_concavity_scan: gamma");
  if (gamma_dir.lpNorm<Eigen::Infinity>() <= 0.0)
    throw ParameterError("ray_concavity_scan: gamma must be nonzero");
  const int L = prior.num_layers;
  const int G = static_cast<int>(t_grid.size());

  RayScan scan;
  scan.t_grid = t_grid;
  scan.values.resize(G, L);
  scan.std_errors.resize(G, L);

  // common random numbers across the grid: every point sees the same sample
  // stream, so noise cancels in the differences while the per-point standard
  // errors (computed as if independent) keep the +3 SE flag conservative
  for (int g = 0; g < G; ++g) {
    const McEstimate est = se_map(prior, (t_grid(g) * gamma_dir).eval(), quad);
    scan.values.row(g) = est.value.transpose();
    scan.std_errors.row(g) = est.std_error.transpose();
  }

  scan.second_diff.resize(std::max(0, G - 2), L);
  scan.second_diff_sd.resize(std::max(0, G - 2), L);
  for (int g = 1; g + 1 < G; ++g) {
    const double h1 = t_grid(g) - t_grid(g - 1);
    const double h2 = t_grid(g + 1) - t_grid(g);
    const double cm = 2.0 / (h1 * (h1 + h2));
    const double c0 = -2.0 / (h1 * h2);
    const double cp = 2.0 / (h2 * (h1 + h2));
    for (int l = 0; l < L; ++l) {
      scan.second_diff(g - 1, l) =
          cm * scan.values(g - 1, l) + c0 * scan.values(g, l) + cp * scan.values(g + 1, l);
      scan.second_diff_sd(g - 1, l) =
          std::sqrt(cm * cm * scan.std_errors(g - 1, l) * scan.std_errors(g - 1, l) +
                    c0 * c0 * scan.std_errors(g, l) * scan.std_errors(g, l) +
                    cp * cp * scan.std_errors(g + 1, l) * scan.std_errors(g + 1, l));
      // absolute epsilon keeps noise-free quadrature runs from flagging
      // rounding-level positives
      if (scan.second_diff(g - 1, l) > 3.0 * scan.second_diff_sd(g - 1, l) + 1e-9)
        scan.violations.emplace_back(g, l);
    }
  }
  return scan;
}

}  // namespace mvamp
