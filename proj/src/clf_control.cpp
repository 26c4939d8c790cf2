#include "modsafe/clf_control.hpp"

#include <stdexcept>

namespace modsafe {

EissClf make_quadratic_clf(const Mat& P, double c3, double eps_v) {
  if (P.rows() != P.cols() || P.rows() == 0) {
    throw std::invalid_argument("make_quadratic_clf: P must be square");
  }
  if (!P.isApprox(P.transpose(), 1e-12)) {
    throw std::invalid_argument("make_quadratic_clf: P must be symmetric");
  }
  if (c3 <= 0.0 || eps_v <= 0.0) {
    throw std::invalid_argument("make_quadratic_clf: c3 and eps_v must be positive");
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(P, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  if (lmin <= 0.0) {
    throw std::invalid_argument("make_quadratic_clf: P must be positive definite");
  }
  Mat Psym = 0.5 * (P + P.transpose());
  EissClf clf;
  clf.value = [Psym](const Vec& x) { return 0.5 * x.dot(Psym * x); };
  clf.gradient = [Psym](const Vec& x) { return RowVec((Psym * x).transpose()); };
  clf.c1 = 0.5 * lmin;
  clf.c2 = 0.5 * lmax;
  clf.c3 = c3;
  clf.eps_v = eps_v;
  clf.quad_form = Psym;
  return clf;
}

EissClf make_double_integrator_clf(double c3, double eps_v) {
  // V = 0.5 |q|^2 + 0.5 |q + qd|^2 = 0.5 x' P x with P = [[2,1],[1,1]] (x) I2.
  Mat P = Mat::Zero(4, 4);
  P(0, 0) = P(1, 1) = 2.0;
  P(2, 2) = P(3, 3) = 1.0;
  P(0, 2) = P(2, 0) = 1.0;
  P(1, 3) = P(3, 1) = 1.0;
  return make_quadratic_clf(P, c3, eps_v);
}

ClfLieData clf_lie(const EissClf& clf, const ParametricAffineSystem& sys,
                   const Vec& x) {
  if (!clf.value || !clf.gradient) {
    throw std::invalid_argument("clf_lie: CLF evaluators not set");
  }
  const RowVec grad = clf.gradient(x);
  if (grad.size() != sys.n) {
    throw std::invalid_argument("clf_lie: gradient size does not match system");
  }
  ClfLieData d;
  d.LfV = grad.dot(drift(sys, x));
  d.LFV = grad * regressor(sys, x);
  d.LgV = grad * actuation(sys, x);
  return d;
}

HalfspaceConstraint clf_constraint(const EissClf& clf,
                                   const ParametricAffineSystem& sys,
                                   const Vec& x, const Vec& theta_hat) {
  if (theta_hat.size() != sys.p) {
    throw std::invalid_argument("clf_constraint: theta_hat size does not match system");
  }
  const ClfLieData d = clf_lie(clf, sys, x);
  const double V = clf.value(x);
  HalfspaceConstraint c;
  c.a = d.LgV.transpose();
  c.b = -clf.c3 * V - d.LFV.squaredNorm() / clf.eps_v - d.LfV -
        d.LFV.dot(theta_hat);
  c.sense = Sense::LE;
  return c;
}

Vec clf_controller(const EissClf& clf, const ParametricAffineSystem& sys,
                   const Vec& x, const Vec& theta_hat) {
  return min_norm_halfspace(clf_constraint(clf, sys, x, theta_hat));
}

std::pair<double, double> clf_quadratic_bounds(const EissClf& clf) {
  if (!clf.quad_form.has_value()) {
    throw std::invalid_argument(
        "clf_quadratic_bounds: V is not quadratic; bounds unsupported");
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(*clf.quad_form, Eigen::EigenvaluesOnly);
  return {0.5 * eig.eigenvalues().minCoeff(), 0.5 * eig.eigenvalues().maxCoeff()};
}

}  // namespace modsafe
