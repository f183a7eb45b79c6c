#include "mvamp/prior.hpp"

#include <cmath>

namespace mvamp {

PriorSpec PriorSpec::multilayer(int L, double rho) {
  PriorSpec p;
  p.family = Family::Multilayer;
  p.num_layers = L;
  p.rho = rho;
  p.validate();
  return p;
}

PriorSpec PriorSpec::dynamic(int L, double rho) {
  PriorSpec p;
  p.family = Family::Dynamic;
  p.num_layers = L;
  p.rho = rho;
  p.validate();
  return p;
}

PriorSpec PriorSpec::semi(double eps_plus, double eps_minus) {
  PriorSpec p;
  p.family = Family::Semi;
  p.num_layers = 1;
  p.eps_plus = eps_plus;
  p.eps_minus = eps_minus;
  p.validate();
  return p;
}

PriorSpec PriorSpec::semi_mean_skew(double eps, double delta) {
  // eps_+ = eps - (1 - eps) delta, eps_- = eps + (1 - eps) delta
  return semi(eps - (1.0 - eps) * delta, eps + (1.0 - eps) * delta);
}

void PriorSpec::validate() const {
  if (num_layers < 1) throw ParameterError("prior: num_layers must be >= 1");
  switch (family) {
    case Family::Multilayer:
    case Family::Dynamic:
      if (!(rho >= 0.0 && rho <= 1.0)) throw ParameterError("prior: rho must be in [0, 1]");
      break;
    case Family::Semi:
      if (num_layers != 1) throw ParameterError("prior: Semi requires L = 1");
      if (!(eps_plus >= 0.0 && eps_plus <= 1.0) || !(eps_minus >= 0.0 && eps_minus <= 1.0))
        throw ParameterError("prior: eps_plus and eps_minus must be in [0, 1]");
      break;
  }
}

double PriorSpec::delta() const {
  const double e = eps();
  if (e >= 1.0) {
    // Both classes fully revealed; the unlabeled conditional is empty and the
    // skew is immaterial. Return 0 instead of 0/0.
    return 0.0;
  }
  return (eps_minus - eps_plus) / (2.0 - 2.0 * e);
}

double PriorSpec::side_information_mi() const {
  if (family != Family::Semi) return 0.0;
  const double e = eps();
  const double d = delta();
  auto xlogx = [](double v) { return v > 0.0 ? v * std::log(v) : 0.0; };
  return e * std::log(2.0) + 0.5 * (1.0 - e) * (xlogx(1.0 + d) + xlogx(1.0 - d));
}

double PriorSpec::dummy_mse() const {
  if (family != Family::Semi) return 1.0;  // no side information
  const double e = eps();
  const double d = delta();
  const double corr = e + (1.0 - e) * d * d;  // E[X E(X|Z)]
  return 1.0 - corr * corr;
}

void sample_prior_row(const PriorSpec& prior, RngStream& rng, PriorDraw& out) {
  const int L = prior.num_layers;
  out.x.resize(L);
  out.y = 0;
  out.z = kStar;
  switch (prior.family) {
    case Family::Multilayer: {
      out.y = static_cast<std::int8_t>(rng.rademacher());
      for (int l = 0; l < L; ++l)
        out.x[l] = rng.bernoulli(prior.rho) ? static_cast<std::int8_t>(-out.y) : out.y;
      break;
    }
    case Family::Dynamic: {
      out.x[0] = static_cast<std::int8_t>(rng.rademacher());
      for (int l = 1; l < L; ++l)
        out.x[l] = rng.bernoulli(prior.rho) ? static_cast<std::int8_t>(-out.x[l - 1]) : out.x[l - 1];
      break;
    }
    case Family::Semi: {
      out.x[0] = static_cast<std::int8_t>(rng.rademacher());
      const double reveal = out.x[0] > 0 ? prior.eps_plus : prior.eps_minus;
      out.z = rng.bernoulli(reveal) ? out.x[0] : kStar;
      break;
    }
  }
}

std::vector<PriorState> enumerate_prior_states(const PriorSpec& prior, Side z, int max_bits) {
  const int L = prior.num_layers;
  const int bits = L + prior.implicit_layers();
  if (bits > max_bits)
    throw ParameterError("enumerate_prior_states: 2^" + std::to_string(bits) + " states exceed the budget");

  std::vector<PriorState> states;
  states.reserve(std::size_t{1} << bits);
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << bits); ++code) {
    PriorState s;
    s.x.resize(L);
    for (int l = 0; l < L; ++l) s.x[l] = (code >> l) & 1 ? 1 : -1;
    s.y = prior.implicit_layers() > 0 ? ((code >> L) & 1 ? 1 : -1) : std::int8_t{0};

    double w = 1.0;
    switch (prior.family) {
      case Family::Multilayer:
        w = 0.5;  // p(y)
        for (int l = 0; l < L; ++l) w *= (s.x[l] == s.y) ? (1.0 - prior.rho) : prior.rho;
        break;
      case Family::Dynamic:
        w = 0.5;  // p(x^1)
        for (int l = 1; l < L; ++l) w *= (s.x[l] == s.x[l - 1]) ? (1.0 - prior.rho) : prior.rho;
        break;
      case Family::Semi:
        if (z != kStar) {
          w = (s.x[0] == z) ? 1.0 : 0.0;
        } else {
          // p(x | z = star) = (1 + delta x) / 2
          w = 0.5 * (1.0 + prior.delta() * s.x[0]);
        }
        break;
    }
    s.weight = w;
    states.push_back(std::move(s));
  }
  return states;
}

std::vector<JointState> enumerate_joint_states(const PriorSpec& prior, int max_bits) {
  std::vector<JointState> joint;
  if (prior.family != Family::Semi) {
    const auto states = enumerate_prior_states(prior, kStar, max_bits);
    joint.reserve(states.size());
    for (const auto& s : states) joint.push_back({s.x, s.y, kStar, s.weight});
    return joint;
  }
  for (std::int8_t x : {std::int8_t{1}, std::int8_t{-1}}) {
    const double reveal = x > 0 ? prior.eps_plus : prior.eps_minus;
    joint.push_back({{x}, 0, x, 0.5 * reveal});
    joint.push_back({{x}, 0, kStar, 0.5 * (1.0 - reveal)});
  }
  return joint;
}

}  // namespace mvamp
