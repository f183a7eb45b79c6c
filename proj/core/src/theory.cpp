#include "mvamp/theory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "mvamp/denoisers.hpp"
#include "mvamp/parallel.hpp"

namespace mvamp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double clamp_rho(double rho) { return std::clamp(rho, 1e-8, 1.0 - 1e-8); }

void check_channel(const PriorSpec& prior, const Eigen::VectorXd& lambdas, const Eigen::VectorXd& q) {
  prior.validate();
  if (lambdas.size() != prior.num_layers || q.size() != prior.num_layers)
    throw ParameterError("free energy: lambdas and q must have one entry per layer");
  for (int l = 0; l < lambdas.size(); ++l)
    if (!(lambdas(l) >= 0.0) || !(q(l) >= 0.0))
      throw ParameterError("free energy: lambdas and q must be >= 0");
}

// log sum_{x,y} p(x,y|z) exp(sum_l h_l x_l) for one effective observation
// row h, per family. h_l = lambda_l q_l X_l + sqrt(lambda_l q_l) W_l.
double log_partition_ml(std::span<const double> h, double rho) {
  const double c = 1.0 - 2.0 * clamp_rho(rho);
  double bp = 0.0, bm = 0.0;
  for (double hl : h) {
    const double lc = log_cosh(hl);
    const double t = std::tanh(hl);
    bp += lc + std::log1p(c * t);
    bm += lc + std::log1p(-c * t);
  }
  return log_sum_exp2(bp, bm) - std::log(2.0);
}

double log_partition_dyn(std::span<const double> h, double log_stay, double log_flip) {
  double ap = h[0], am = -h[0];  // log alpha_1(+-1), common log(1/2) dropped until the end
  for (std::size_t l = 1; l < h.size(); ++l) {
    const double np = h[l] + log_sum_exp2(log_stay + ap, log_flip + am);
    const double nm = -h[l] + log_sum_exp2(log_flip + ap, log_stay + am);
    ap = np;
    am = nm;
  }
  return log_sum_exp2(ap, am) - std::log(2.0);
}

double log_partition_semi(double h, Side z, double delta) {
  if (z != kStar) return static_cast<double>(z) * h;
  // log(cosh h + delta sinh h), stable for |delta| <= 1
  return log_sum_exp2(std::log1p(delta) + h, std::log1p(-delta) - h) - std::log(2.0);
}

double se_or_zero(const McEstimate& e) { return e.std_error.size() ? e.std_error.lpNorm<Eigen::Infinity>() : 0.0; }

}  // namespace

McEstimate scalar_free_energy(const PriorSpec& prior, const Eigen::VectorXd& lambdas,
                              const Eigen::VectorXd& q, const QuadratureSpec& quad) {
  check_channel(prior, lambdas, q);
  const int L = prior.num_layers;
  const Eigen::VectorXd gamma = (lambdas.array() * q.array()).matrix();

  // Semi closed form under 1-d Gauss-Hermite
  if (prior.family == Family::Semi && quad.method != QuadratureSpec::Method::MonteCarlo) {
    const double g = gamma(0);
    const double eps = prior.eps();
    const double delta = prior.delta();
    const GaussHermiteRule rule = gauss_hermite(quad.nodes);
    const double log_1md2 = std::fabs(delta) < 1.0 ? std::log1p(-delta * delta) : kNegInf;
    const double log_d2 = delta != 0.0 ? 2.0 * std::log(std::fabs(delta)) : kNegInf;
    double even = 0.0, odd = 0.0;
    for (int i = 0; i < quad.nodes; ++i) {
      const double c = g + std::sqrt(g) * rule.points[i];
      // log(cosh^2 c - delta^2 sinh^2 c) = log((1-delta^2) cosh^2 c + delta^2),
      // finite for every |delta| <= 1 (identically 0 at |delta| = 1)
      even += rule.weights[i] * log_sum_exp2(log_1md2 + 2.0 * log_cosh(c), log_d2);
      const double log_num = log_sum_exp2(std::log1p(delta) + c, std::log1p(-delta) - c);
      const double log_den = log_sum_exp2(std::log1p(-delta) + c, std::log1p(delta) - c);
      odd += rule.weights[i] * (log_num - log_den);
    }
    McEstimate est;
    est.value = Eigen::VectorXd::Constant(
        1, eps * g + 0.5 * (1.0 - eps) * even + 0.5 * (1.0 - eps) * delta * odd);
    est.std_error = Eigen::VectorXd::Zero(1);
    return est;
  }

  const double log_stay = prior.rho < 1.0 ? std::log1p(-prior.rho) : kNegInf;
  const double log_flip = prior.rho > 0.0 ? std::log(prior.rho) : kNegInf;

  auto integrand = [&](const std::vector<std::int8_t>& x, Side z, const std::vector<double>& w,
                       std::vector<double>& out) {
    thread_local std::vector<double> h;
    h.resize(L);
    for (int l = 0; l < L; ++l) h[l] = gamma(l) * x[l] + std::sqrt(gamma(l)) * w[l];
    switch (prior.family) {
      case Family::Multilayer:
        out[0] = log_partition_ml(h, prior.rho);
        break;
      case Family::Dynamic:
        out[0] = log_partition_dyn(h, log_stay, log_flip);
        break;
      case Family::Semi:
        out[0] = log_partition_semi(h[0], z, prior.delta());
        break;
    }
  };

  McEstimate est;
  if (quad.method == QuadratureSpec::Method::TensorGaussHermite) {
    est = [&] {
      // reuse the SE tensor machinery through se-style enumeration
      const GaussHermiteRule rule = gauss_hermite(quad.nodes);
      const auto states = enumerate_joint_states(prior);
      std::int64_t grid = 1;
      for (int l = 0; l < L; ++l) grid *= quad.nodes;
      double acc = 0.0;
      std::vector<double> w(L), val(1);
      for (const auto& st : states) {
        if (st.weight <= 0.0) continue;
        for (std::int64_t g = 0; g < grid; ++g) {
          std::int64_t rem = g;
          double wq = 1.0;
          for (int l = 0; l < L; ++l) {
            w[l] = rule.points[rem % quad.nodes];
            wq *= rule.weights[rem % quad.nodes];
            rem /= quad.nodes;
          }
          integrand(st.x, st.z, w, val);
          acc += st.weight * wq * val[0];
        }
      }
      McEstimate r;
      r.value = Eigen::VectorXd::Constant(1, acc);
      r.std_error = Eigen::VectorXd::Zero(1);
      return r;
    }();
  } else {
    est = mc_prior_expect(prior, 1, quad,
                          [&](const PriorDraw& d, const std::vector<double>& w,
                              std::vector<double>& out) { integrand(d.x, d.z, w, out); });
  }
  if (!std::isfinite(est.value(0))) throw NumericalError("scalar_free_energy: non-finite value");
  return est;
}

McEstimate g_objective(const PriorSpec& prior, const Eigen::VectorXd& lambdas,
                       const Eigen::VectorXd& q, const QuadratureSpec& quad) {
  McEstimate f = scalar_free_energy(prior, lambdas, q, quad);
  double penalty = 0.0;
  for (int l = 0; l < lambdas.size(); ++l) penalty += lambdas(l) * (q(l) * q(l) + 2.0 * q(l)) / 4.0;
  f.value(0) -= penalty;
  return f;
}

McEstimate g_gradient(const PriorSpec& prior, const Eigen::VectorXd& lambdas,
                      const Eigen::VectorXd& q, const QuadratureSpec& quad) {
  const McEstimate t = se_map(prior, (lambdas.array() * q.array()).matrix(), quad);
  McEstimate grad;
  grad.value = 0.5 * (lambdas.array() * (t.value - q).array()).matrix();
  grad.std_error = 0.5 * (lambdas.array() * t.std_error.array()).matrix();
  return grad;
}

Eigen::MatrixXd g_hessian(const PriorSpec& prior, const Eigen::VectorXd& lambdas,
                          const Eigen::VectorXd& q, const QuadratureSpec& quad) {
  check_channel(prior, lambdas, q);
  const int L = prior.num_layers;
  if (L + prior.implicit_layers() > 12)
    throw ParameterError("g_hessian: enumeration-backed Hessian limited to small L");
  const Eigen::VectorXd gamma = (lambdas.array() * q.array()).matrix();
  const int dim = L * (L + 1) / 2;

  // per-z state tables
  std::vector<Side> zvals = prior.has_side_info()
                                ? std::vector<Side>{kStar, Side{1}, Side{-1}}
                                : std::vector<Side>{kStar};
  std::vector<std::vector<PriorState>> tables;
  for (Side z : zvals) tables.push_back(enumerate_prior_states(prior, z));

  auto cov_stat = [&](const std::vector<std::int8_t>& x, Side z, const std::vector<double>& w,
                      std::vector<double>& out) {
    const auto& states = tables[z == kStar ? 0 : (z > 0 ? 1 : 2)];
    thread_local std::vector<double> h, m1;
    thread_local std::vector<double> m2;
    h.resize(L);
    m1.assign(L, 0.0);
    m2.assign(L * L, 0.0);
    for (int l = 0; l < L; ++l) h[l] = gamma(l) * x[l] + std::sqrt(gamma(l)) * w[l];

    double max_lw = kNegInf;
    thread_local std::vector<double> lw;
    lw.resize(states.size());
    for (std::size_t s = 0; s < states.size(); ++s) {
      if (states[s].weight <= 0.0) {
        lw[s] = kNegInf;
        continue;
      }
      double v = std::log(states[s].weight);
      for (int l = 0; l < L; ++l) v += h[l] * states[s].x[l];
      lw[s] = v;
      max_lw = std::max(max_lw, v);
    }
    double den = 0.0;
    for (std::size_t s = 0; s < states.size(); ++s) {
      if (lw[s] == kNegInf) continue;
      const double ws = std::exp(lw[s] - max_lw);
      den += ws;
      for (int a = 0; a < L; ++a) {
        m1[a] += ws * states[s].x[a];
        for (int b = a; b < L; ++b) m2[a * L + b] += ws * states[s].x[a] * states[s].x[b];
      }
    }
    int k = 0;
    for (int a = 0; a < L; ++a)
      for (int b = a; b < L; ++b) {
        const double cov = m2[a * L + b] / den - (m1[a] / den) * (m1[b] / den);
        out[k++] = cov * cov;
      }
  };

  McEstimate est;
  if (quad.method == QuadratureSpec::Method::TensorGaussHermite) {
    const GaussHermiteRule rule = gauss_hermite(quad.nodes);
    const auto joint = enumerate_joint_states(prior);
    std::int64_t grid = 1;
    for (int l = 0; l < L; ++l) grid *= quad.nodes;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
    std::vector<double> w(L), val(dim);
    for (const auto& st : joint) {
      if (st.weight <= 0.0) continue;
      for (std::int64_t g = 0; g < grid; ++g) {
        std::int64_t rem = g;
        double wq = 1.0;
        for (int l = 0; l < L; ++l) {
          w[l] = rule.points[rem % quad.nodes];
          wq *= rule.weights[rem % quad.nodes];
          rem /= quad.nodes;
        }
        cov_stat(st.x, st.z, w, val);
        for (int d = 0; d < dim; ++d) acc(d) += st.weight * wq * val[d];
      }
    }
    est.value = acc;
    est.std_error = Eigen::VectorXd::Zero(dim);
  } else {
    est = mc_prior_expect(prior, dim, quad,
                          [&](const PriorDraw& d, const std::vector<double>& w,
                              std::vector<double>& out) { cov_stat(d.x, d.z, w, out); });
  }

  Eigen::MatrixXd hess(L, L);
  int k = 0;
  for (int a = 0; a < L; ++a)
    for (int b = a; b < L; ++b) {
      const double v = 0.5 * lambdas(a) * lambdas(b) * est.value(k++);
      hess(a, b) = v;
      hess(b, a) = v;
    }
  for (int a = 0; a < L; ++a) hess(a, a) -= 0.5 * lambdas(a);
  return hess;
}

FreeEnergyResult maximize_g(const PriorSpec& prior, const Eigen::VectorXd& lambdas,
                            const QuadratureSpec& quad, double tol, int max_iter) {
  prior.validate();
  const int L = prior.num_layers;
  if (lambdas.size() != L) throw ParameterError("maximize_g: lambdas must have one entry per layer");

  const double dedup_tol =
      quad.method == QuadratureSpec::Method::MonteCarlo ? std::max(0.02, 10.0 * tol) : std::max(1e-4, 10.0 * tol);

  FreeEnergyResult res;
  res.fixed_points_examined.clear();

  // zero is always a stationary point; G(0) = 0 by the normalization of F
  res.fixed_points_examined.push_back({Eigen::VectorXd::Zero(L), 0.0, true});

  for (double start : {1.0, 0.5, 1e-3}) {
    const auto fp =
        se_fixed_point(prior, lambdas, Eigen::VectorXd::Constant(L, start), tol, max_iter, quad);
    bool known = false;
    for (const auto& c : res.fixed_points_examined)
      if ((c.q - fp.q).lpNorm<Eigen::Infinity>() < dedup_tol) known = true;
    if (known) continue;
    const McEstimate g = g_objective(prior, lambdas, fp.q, quad);
    res.fixed_points_examined.push_back({fp.q, g.value(0), fp.converged});
  }

  std::stable_sort(res.fixed_points_examined.begin(), res.fixed_points_examined.end(),
                   [](const FixedPointCandidate& a, const FixedPointCandidate& b) {
                     return a.g_value > b.g_value;
                   });
  const FixedPointCandidate& best = res.fixed_points_examined.front();
  res.q_star = best.q;
  res.g_star = best.g_value;
  if (res.fixed_points_examined.size() > 1) {
    const double gap = best.g_value - res.fixed_points_examined[1].g_value;
    const double mc_res =
        quad.method == QuadratureSpec::Method::MonteCarlo
            ? 3.0 * (se_or_zero(g_objective(prior, lambdas, best.q, quad)) +
                     se_or_zero(g_objective(prior, lambdas, res.fixed_points_examined[1].q, quad)))
            : 1e-10;
    res.near_degenerate = gap < mc_res;
  }

  res.mi_limit = prior.side_information_mi() + lambdas.sum() / 4.0 - res.g_star;
  res.mmse_layers = (1.0 - res.q_star.array().square()).matrix();
  res.dmse = prior.dummy_mse();

  if (prior.family == Family::Multilayer) {
    // global-label overlap at the q* channel
    const Eigen::VectorXd gamma = (lambdas.array() * res.q_star.array()).matrix();
    const MultilayerDenoiser global(L, prior.rho, /*clamp_rho=*/true);
    auto stat = [&](const std::vector<std::int8_t>& x, std::int8_t y, const std::vector<double>& w,
                    std::vector<double>& out) {
      thread_local std::vector<double> h;
      h.resize(L);
      for (int l = 0; l < L; ++l) h[l] = gamma(l) * x[l] + std::sqrt(gamma(l)) * w[l];
      out[0] = y * global.global_mean(h);
    };
    McEstimate qy;
    if (quad.method == QuadratureSpec::Method::MonteCarlo) {
      qy = mc_prior_expect(prior, 1, quad,
                           [&](const PriorDraw& d, const std::vector<double>& w,
                               std::vector<double>& out) { stat(d.x, d.y, w, out); });
    } else {
      const GaussHermiteRule rule = gauss_hermite(quad.nodes);
      const auto joint = enumerate_joint_states(prior);
      std::int64_t grid = 1;
      for (int l = 0; l < L; ++l) grid *= quad.nodes;
      double acc = 0.0;
      std::vector<double> w(L), val(1);
      for (const auto& st : joint) {
        if (st.weight <= 0.0) continue;
        for (std::int64_t g = 0; g < grid; ++g) {
          std::int64_t rem = g;
          double wq = 1.0;
          for (int l = 0; l < L; ++l) {
            w[l] = rule.points[rem % quad.nodes];
            wq *= rule.weights[rem % quad.nodes];
            rem /= quad.nodes;
          }
          stat(st.x, st.y, w, val);
          acc += st.weight * wq * val[0];
        }
      }
      qy.value = Eigen::VectorXd::Constant(1, acc);
      qy.std_error = Eigen::VectorXd::Zero(1);
    }
    res.mmse_implicit = 1.0 - qy.value(0) * qy.value(0);
  }
  return res;
}

FreeEnergyResult limiting_quantities(const PriorSpec& prior, const Eigen::VectorXd& lambdas,
                                     const QuadratureSpec& quad, double tol, int max_iter) {
  return maximize_g(prior, lambdas, quad, tol, max_iter);
}

Eigen::MatrixXd hessian_at_zero(const PriorSpec& prior, const Eigen::VectorXd& lambdas) {
  prior.validate();
  const int L = prior.num_layers;
  if (lambdas.size() != L)
    throw ParameterError("hessian_at_zero: lambdas must have one entry per layer");
  if (prior.family == Family::Semi)
    throw ParameterError("hessian_at_zero: closed form covers Multilayer and Dynamic only");

  Eigen::MatrixXd h(L, L);
  const double alpha = (1.0 - 2.0 * prior.rho) * (1.0 - 2.0 * prior.rho);
  for (int a = 0; a < L; ++a) {
    for (int b = 0; b < L; ++b) {
      if (a == b) {
        h(a, a) = 0.5 * (lambdas(a) * lambdas(a) - lambdas(a));
      } else if (prior.family == Family::Multilayer) {
        h(a, b) = 0.5 * lambdas(a) * lambdas(b) * alpha * alpha;
      } else {
        h(a, b) = 0.5 * lambdas(a) * lambdas(b) * std::pow(alpha, std::abs(a - b));
      }
    }
  }
  return h;
}

namespace {

// Leading (most positive) eigenpair; power iteration on the shifted matrix
// starting from the all-ones vector.
std::pair<double, Eigen::VectorXd> leading_eigpair_power(const Eigen::MatrixXd& h) {
  const int L = static_cast<int>(h.rows());
  const double shift = h.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
  Eigen::MatrixXd shifted = h + shift * Eigen::MatrixXd::Identity(L, L);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(L) / std::sqrt(static_cast<double>(L));
  double eig = 0.0;
  for (int it = 0; it < 20000; ++it) {
    Eigen::VectorXd next = shifted * v;
    const double norm = next.norm();
    if (norm == 0.0) break;
    next /= norm;
    const double new_eig = v.dot(shifted * v);
    if (it > 2 && std::fabs(new_eig - eig) < 1e-10 * std::max(1.0, std::fabs(new_eig))) {
      v = next;
      eig = new_eig;
      break;
    }
    v = next;
    eig = new_eig;
  }
  return {eig - shift, v};
}

bool entrywise_one_signed(const Eigen::VectorXd& v, double tol = 1e-8) {
  const bool all_nonneg = (v.array() >= -tol).all();
  const bool all_nonpos = (v.array() <= tol).all();
  return all_nonneg || all_nonpos;
}

}  // namespace

ThresholdReport threshold_ml(const Eigen::VectorXd& lambdas, double rho) {
  if (!(rho >= 0.0 && rho < 0.5)) throw ParameterError("threshold_ml: rho must be in [0, 1/2)");
  const double beta = std::pow(1.0 - 2.0 * rho, 4.0);
  double criterion = 0.0;
  for (int l = 0; l < lambdas.size(); ++l) {
    if (!(lambdas(l) >= 0.0)) throw ParameterError("threshold_ml: lambdas must be >= 0");
    if (lambdas(l) > 1.0)
      throw InfeasibleError(
          "threshold_ml: criterion stated for all lambda <= 1 (layer " + std::to_string(l) +
          " already recoverable on its own)");
    const double denom = 1.0 - (1.0 - beta) * lambdas(l);
    if (denom <= 0.0)
      throw InfeasibleError("threshold_ml: criterion pole in layer " + std::to_string(l));
    criterion += beta * lambdas(l) / denom;
  }

  ThresholdReport rep;
  rep.criterion_value = criterion;
  rep.feasible = criterion > 1.0;

  const Eigen::MatrixXd h = hessian_at_zero(PriorSpec::multilayer(static_cast<int>(lambdas.size()), rho), lambdas);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  rep.hessian_max_eig = es.eigenvalues().maxCoeff();
  Eigen::Index max_idx;
  es.eigenvalues().maxCoeff(&max_idx);
  rep.leading_eigvec_sign_ok = entrywise_one_signed(es.eigenvectors().col(max_idx));
  return rep;
}

double theta_star(int L, double rho) {
  if (L < 1) throw ParameterError("theta_star: L must be >= 1");
  if (!(rho > 0.0 && rho < 0.5)) throw ParameterError("theta_star: rho must be in (0, 1/2)");
  const double a = (1.0 - 2.0 * rho) * (1.0 - 2.0 * rho);
  auto f = [&](double t) {
    return std::sin((L + 1) * t) - 2.0 * a * std::sin(L * t) + a * a * std::sin((L - 1) * t);
  };
  const double hi = M_PI / (L + 1);
  const int grid = 20000;
  double lo_t = hi / grid;
  double prev = f(lo_t);
  double bracket_lo = 0.0, bracket_hi = 0.0;
  for (int i = 2; i <= grid; ++i) {
    const double t = hi * i / grid;
    const double cur = f(t);
    if (prev > 0.0 && cur <= 0.0) {
      bracket_lo = hi * (i - 1) / grid;
      bracket_hi = t;
      break;
    }
    prev = cur;
  }
  if (bracket_hi == 0.0) throw NumericalError("theta_star: no sign change on (0, pi/(L+1)]");

  for (int it = 0; it < 200 && bracket_hi - bracket_lo > 1e-16 * bracket_hi; ++it) {
    const double mid = 0.5 * (bracket_lo + bracket_hi);
    if (f(mid) > 0.0)
      bracket_lo = mid;
    else
      bracket_hi = mid;
  }
  const double root = 0.5 * (bracket_lo + bracket_hi);
  if (std::fabs(f(root)) > 1e-12)
    throw NumericalError("theta_star: residual " + std::to_string(std::fabs(f(root))) +
                         " above tolerance");
  return root;
}

Eigen::MatrixXd kms_matrix(int L, double rho) {
  const double a = (1.0 - 2.0 * rho) * (1.0 - 2.0 * rho);
  Eigen::MatrixXd k(L, L);
  for (int r = 0; r < L; ++r)
    for (int s = 0; s < L; ++s) k(r, s) = std::pow(a, std::abs(r - s));
  return k;
}

ThresholdReport threshold_dyn(int L, double rho) {
  const double th = theta_star(L, rho);
  const double a = (1.0 - 2.0 * rho) * (1.0 - 2.0 * rho);
  ThresholdReport rep;
  rep.theta_star = th;
  rep.critical_lambda = (1.0 - 2.0 * a * std::cos(th) + a * a) / (1.0 - a * a);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kms_matrix(L, rho));
  rep.hessian_max_eig = es.eigenvalues().maxCoeff();  // lambda_max(K) cross-check
  Eigen::Index max_idx;
  es.eigenvalues().maxCoeff(&max_idx);
  rep.leading_eigvec_sign_ok = entrywise_one_signed(es.eigenvectors().col(max_idx));
  return rep;
}

ThresholdReport threshold_dyn(int L, double rho, double lambda) {
  ThresholdReport rep = threshold_dyn(L, rho);
  rep.feasible = lambda > rep.critical_lambda;
  return rep;
}

ThresholdReport hessian_zero_feasibility(const PriorSpec& prior, const Eigen::VectorXd& lambdas) {
  if (prior.family == Family::Semi)
    throw ParameterError("hessian_zero_feasibility: Multilayer or Dynamic priors only");
  const Eigen::MatrixXd h = hessian_at_zero(prior, lambdas);

  ThresholdReport rep;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  rep.hessian_max_eig = es.eigenvalues().maxCoeff();
  rep.feasible = rep.hessian_max_eig > 0.0;

  const auto [eig_pi, vec_pi] = leading_eigpair_power(h);
  (void)eig_pi;
  rep.leading_eigvec_sign_ok = entrywise_one_signed(vec_pi);
  return rep;
}

}  // namespace mvamp
