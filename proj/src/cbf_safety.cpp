#include "modsafe/cbf_safety.hpp"

#include <cmath>
#include <stdexcept>

namespace modsafe {

ClassKappaExt ClassKappaExt::linear(double lambda) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("ClassKappaExt::linear: lambda must be positive");
  }
  ClassKappaExt k;
  k.fwd = [lambda](double s) { return lambda * s; };
  k.inv = [lambda](double y) { return y / lambda; };
  return k;
}

HocbfChain make_obstacle_chain(const ObstacleSpec& obs, double lambda1,
                               double lambda2, double eps_h) {
  if (obs.center.size() != 2) {
    throw std::invalid_argument("make_obstacle_chain: center must be planar");
  }
  if (!(obs.radius > 0.0)) {
    throw std::invalid_argument("make_obstacle_chain: radius must be positive");
  }
  if (!(eps_h > 0.0)) {
    throw std::invalid_argument("make_obstacle_chain: eps_h must be positive");
  }
  const Vec c = obs.center;
  const double r2 = obs.radius * obs.radius + obs.margin;

  auto h = [c, r2](const Vec& x) {
    if (x.size() != 4) {
      throw std::invalid_argument("obstacle chain: state must have size 4");
    }
    const double dx = x(0) - c(0);
    const double dy = x(1) - c(1);
    return dx * dx + dy * dy - r2;
  };
  auto psi1 = [c, r2, lambda1](const Vec& x) {
    if (x.size() != 4) {
      throw std::invalid_argument("obstacle chain: state must have size 4");
    }
    const double dx = x(0) - c(0);
    const double dy = x(1) - c(1);
    const double h = dx * dx + dy * dy - r2;
    return 2.0 * (dx * x(2) + dy * x(3)) + lambda1 * h;
  };
  auto grad1 = [c, lambda1](const Vec& x) {
    if (x.size() != 4) {
      throw std::invalid_argument("obstacle chain: state must have size 4");
    }
    RowVec g(4);
    const double dx = x(0) - c(0);
    const double dy = x(1) - c(1);
    g(0) = 2.0 * x(2) + 2.0 * lambda1 * dx;
    g(1) = 2.0 * x(3) + 2.0 * lambda1 * dy;
    g(2) = 2.0 * dx;
    g(3) = 2.0 * dy;
    return g;
  };

  HocbfChain chain;
  chain.psi = {h, psi1};
  chain.psi_last_grad = grad1;
  chain.alphas = {ClassKappaExt::linear(lambda1), ClassKappaExt::linear(lambda2)};
  chain.eps_h = eps_h;
  return chain;
}

std::vector<double> psi_chain_eval(const HocbfChain& chain, const Vec& x) {
  if (chain.psi.empty()) {
    throw std::invalid_argument("psi_chain_eval: chain has no levels");
  }
  std::vector<double> out;
  out.reserve(chain.psi.size());
  for (const auto& fn : chain.psi) out.push_back(fn(x));
  return out;
}

std::vector<double> gamma_recursion(const std::vector<ClassKappaExt>& alphas,
                                    double eps_h, double delta) {
  if (alphas.empty()) {
    throw std::invalid_argument("gamma_recursion: no class-K functions given");
  }
  if (!(eps_h > 0.0)) {
    throw std::invalid_argument("gamma_recursion: eps_h must be positive");
  }
  if (delta < 0.0) {
    throw std::invalid_argument("gamma_recursion: delta must be non-negative");
  }
  const int r = static_cast<int>(alphas.size());
  std::vector<double> g(r, 0.0);
  g[r - 1] = -alphas[r - 1].inv(-eps_h * delta * delta / 4.0);
  for (int i = r - 2; i >= 0; --i) {
    g[i] = -alphas[i].inv(-g[i + 1]);
  }
  return g;
}

InflatedSetSpec make_inflated_set_spec(const std::vector<ClassKappaExt>& alphas,
                                       double eps_h) {
  InflatedSetSpec spec;
  const int r = static_cast<int>(alphas.size());
  for (int i = 0; i < r; ++i) {
    spec.gammas.push_back([alphas, eps_h, i](double delta) {
      return gamma_recursion(alphas, eps_h, delta)[i];
    });
  }
  return spec;
}

MembershipResult inflated_membership(const HocbfChain& chain, const Vec& x,
                                     double delta) {
  const std::vector<double> psis = psi_chain_eval(chain, x);
  const std::vector<double> gammas =
      gamma_recursion(chain.alphas, chain.eps_h, delta);
  if (psis.size() != gammas.size()) {
    throw std::invalid_argument(
        "inflated_membership: chain levels and alphas disagree");
  }
  MembershipResult res;
  res.member = true;
  res.margins.reserve(psis.size());
  for (std::size_t i = 0; i < psis.size(); ++i) {
    const double rho = psis[i] + gammas[i];
    res.margins.push_back(rho);
    if (rho < 0.0) res.member = false;
  }
  return res;
}

PsiLieData cbf_lie(const HocbfChain& chain, const ParametricAffineSystem& sys,
                   const Vec& x) {
  if (!chain.psi_last_grad) {
    throw std::invalid_argument("cbf_lie: psi_last_grad not set");
  }
  const RowVec grad = chain.psi_last_grad(x);
  if (grad.size() != sys.n) {
    throw std::invalid_argument("cbf_lie: gradient size does not match system");
  }
  PsiLieData d;
  d.Lf = grad.dot(drift(sys, x));
  d.LF = grad * regressor(sys, x);
  d.Lg = grad * actuation(sys, x);
  return d;
}

HalfspaceConstraint cbf_constraint(const HocbfChain& chain,
                                   const ParametricAffineSystem& sys,
                                   const Vec& x, const Vec& theta_hat) {
  if (theta_hat.size() != sys.p) {
    throw std::invalid_argument("cbf_constraint: theta_hat size does not match system");
  }
  const PsiLieData d = cbf_lie(chain, sys, x);
  const double psi_last = chain.psi.back()(x);
  HalfspaceConstraint c;
  c.a = d.Lg.transpose();
  c.b = -chain.alphas.back().fwd(psi_last) + d.LF.squaredNorm() / chain.eps_h -
        d.Lf - d.LF.dot(theta_hat);
  c.sense = Sense::GE;
  return c;
}

Vec safety_filter(const HocbfChain& chain, const ParametricAffineSystem& sys,
                  const Vec& x, const Vec& theta_hat, const Vec& u_ref) {
  return project_halfspace(u_ref, cbf_constraint(chain, sys, x, theta_hat));
}

}  // namespace modsafe
