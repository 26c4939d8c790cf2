#pragma once

#include <functional>
#include <string>
#include <vector>

#include "modsafe/types.hpp"

namespace modsafe {

/// Control-affine system with linearly parameterized model uncertainty:
///
///   xdot = f(x) + F(x) theta + g(x) u
///
/// where theta collects the p unknown physical parameters. Evaluators are
/// plain callables so systems can be assembled at runtime and registered by
/// name.
struct ParametricAffineSystem {
  std::string name;
  int n = 0;  ///< state dimension
  int m = 0;  ///< input dimension
  int p = 0;  ///< unknown parameter dimension
  std::function<Vec(const Vec&)> drift_fn;      ///< f : R^n -> R^n
  std::function<Mat(const Vec&)> regressor_fn;  ///< F : R^n -> R^{n x p}
  std::function<Mat(const Vec&)> actuation_fn;  ///< g : R^n -> R^{n x m}
};

/// Checked evaluation of f(x).
Vec drift(const ParametricAffineSystem& sys, const Vec& x);
/// Checked evaluation of F(x).
Mat regressor(const ParametricAffineSystem& sys, const Vec& x);
/// Checked evaluation of g(x).
Mat actuation(const ParametricAffineSystem& sys, const Vec& x);

/// f(x) + F(x) theta + g(x) u with the true parameters.
Vec true_dynamics(const ParametricAffineSystem& sys, const Vec& x, const Vec& u,
                  const Vec& theta);
/// Same composition evaluated at a parameter estimate.
Vec estimated_dynamics(const ParametricAffineSystem& sys, const Vec& x,
                       const Vec& u, const Vec& theta_hat);

/// Planar double integrator with quadratic drag. State x = [q1 q2 qd1 qd2],
/// input u = qddot command, dynamics qddot = -D qd |qd| + u with unknown
/// D = diag(theta). The minus sign lives in F(x) so theta itself stays
/// positive.
ParametricAffineSystem make_double_integrator_drag();

void register_system(const std::string& name,
                     std::function<ParametricAffineSystem()> factory);
ParametricAffineSystem make_system(const std::string& name);
std::vector<std::string> registered_systems();

}  // namespace modsafe
