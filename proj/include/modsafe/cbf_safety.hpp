#pragma once

#include <functional>
#include <vector>

#include "modsafe/dynamics.hpp"
#include "modsafe/qp_core.hpp"

namespace modsafe {

/// Extended class-K function with an explicit inverse. Only the linear family
/// ships built in; nonlinear choices plug in through the two callables.
struct ClassKappaExt {
  std::function<double(double)> fwd;
  std::function<double(double)> inv;

  static ClassKappaExt linear(double lambda);
};

/// Barrier chain for a relative-degree-r constraint h >= 0:
///   psi_0 = h,  psi_i = psi_{i-1}' + alpha_i(psi_{i-1}).
/// psi holds the analytic levels psi_0 .. psi_{r-1}; psi_last_grad is the
/// gradient of psi_{r-1}, which is where the control first appears.
struct HocbfChain {
  std::vector<std::function<double(const Vec&)>> psi;
  std::function<RowVec(const Vec&)> psi_last_grad;
  std::vector<ClassKappaExt> alphas;  ///< alpha_1 .. alpha_r
  double eps_h = 1.0;

  int rel_degree() const { return static_cast<int>(alphas.size()); }
};

struct ObstacleSpec {
  Vec center;        ///< position q_o in the plane
  double radius;     ///< R_o
  double margin = 0.0;  ///< subtracted from h to keep extra clearance
};

/// Relative-degree-2 chain keeping the planar double integrator outside a
/// disk: h = |q - q_o|^2 - R_o^2 - margin, with linear alpha_1, alpha_2.
HocbfChain make_obstacle_chain(const ObstacleSpec& obs, double lambda1,
                               double lambda2, double eps_h);

/// [psi_0(x), ..., psi_{r-1}(x)].
std::vector<double> psi_chain_eval(const HocbfChain& chain, const Vec& x);

/// Inflation depths [gamma_1(delta), ..., gamma_r(delta)] obtained by running
/// the inverse recursion gamma_r = -alpha_r^{-1}(-eps_h delta^2 / 4),
/// gamma_i = -alpha_i^{-1}(-gamma_{i+1}).
std::vector<double> gamma_recursion(const std::vector<ClassKappaExt>& alphas,
                                    double eps_h, double delta);

struct InflatedSetSpec {
  std::vector<std::function<double(double)>> gammas;
};

InflatedSetSpec make_inflated_set_spec(const std::vector<ClassKappaExt>& alphas,
                                       double eps_h);

struct MembershipResult {
  bool member = false;
  /// rho_i = psi_{i-1}(x) + gamma_i(delta) for i = 1..r.
  std::vector<double> margins;
};

/// Membership in the inflated safe set at estimation-error level delta.
MembershipResult inflated_membership(const HocbfChain& chain, const Vec& x,
                                     double delta);

struct PsiLieData {
  double Lf = 0.0;
  RowVec LF;
  RowVec Lg;
};

/// Lie derivatives of psi_{r-1} along f, F and g at x.
PsiLieData cbf_lie(const HocbfChain& chain, const ParametricAffineSystem& sys,
                   const Vec& x);

/// Safety constraint on u (certainty-equivalent barrier condition with the
/// robustness burn term):
///   Lg psi u >= -alpha_r(psi_{r-1}) + |LF psi|^2 / eps_h - Lf psi - LF psi theta_hat
HalfspaceConstraint cbf_constraint(const HocbfChain& chain,
                                   const ParametricAffineSystem& sys,
                                   const Vec& x, const Vec& theta_hat);

/// Minimally invasive filter: projects u_ref onto the safety constraint.
Vec safety_filter(const HocbfChain& chain, const ParametricAffineSystem& sys,
                  const Vec& x, const Vec& theta_hat, const Vec& u_ref);

}  // namespace modsafe
