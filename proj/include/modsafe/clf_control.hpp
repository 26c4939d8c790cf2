#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "modsafe/dynamics.hpp"
#include "modsafe/qp_core.hpp"

namespace modsafe {

/// Control Lyapunov function certifying exponential input-to-state stability
/// with decay rate c3 and robustness margin eps_v. c1 and c2 are the
/// quadratic sandwich constants c1 |x|^2 <= V(x) <= c2 |x|^2.
struct EissClf {
  std::function<double(const Vec&)> value;
  std::function<RowVec(const Vec&)> gradient;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 1.0;
  double eps_v = 20.0;
  /// P when V(x) = 0.5 x' P x; empty for non-quadratic V.
  std::optional<Mat> quad_form;
};

struct ClfLieData {
  double LfV = 0.0;
  RowVec LFV;
  RowVec LgV;
};

/// V(x) = 0.5 x' P x for symmetric positive definite P.
EissClf make_quadratic_clf(const Mat& P, double c3, double eps_v);

/// The stock CLF for the planar double integrator:
/// V = 0.5 |q|^2 + 0.5 |q + qd|^2.
EissClf make_double_integrator_clf(double c3, double eps_v);

/// Lie derivatives of V along f, F and g at x.
ClfLieData clf_lie(const EissClf& clf, const ParametricAffineSystem& sys,
                   const Vec& x);

/// Stabilization constraint on u (certainty-equivalent decrease condition
/// with the robustness burn term):
///   LgV u <= -c3 V - |LFV|^2 / eps_v - LfV - LFV theta_hat
HalfspaceConstraint clf_constraint(const EissClf& clf,
                                   const ParametricAffineSystem& sys,
                                   const Vec& x, const Vec& theta_hat);

/// Min-norm stabilizing control: the closed-form solution of
/// min 0.5 |u|^2 s.t. the stabilization constraint.
Vec clf_controller(const EissClf& clf, const ParametricAffineSystem& sys,
                   const Vec& x, const Vec& theta_hat);

/// (c1, c2) from the quadratic form; errors out for non-quadratic V.
std::pair<double, double> clf_quadratic_bounds(const EissClf& clf);

}  // namespace modsafe
