#include "modsafe/qp_core.hpp"

namespace modsafe {

Vec min_norm_halfspace(const HalfspaceConstraint& c) {
  if (c.sense != Sense::LE) {
    throw std::invalid_argument("min_norm_halfspace: constraint sense must be <=");
  }
  if (c.b >= 0.0) return Vec::Zero(c.a.size());
  const double nrm2 = c.a.squaredNorm();
  if (nrm2 < kZeroRowTol * kZeroRowTol) {
    throw QpInfeasible("min_norm_halfspace: zero constraint row with b < 0");
  }
  return (c.b / nrm2) * c.a;
}

Vec project_halfspace(const Vec& u_ref, const HalfspaceConstraint& c) {
  if (c.sense != Sense::GE) {
    throw std::invalid_argument("project_halfspace: constraint sense must be >=");
  }
  if (u_ref.size() != c.a.size()) {
    throw std::invalid_argument("project_halfspace: u_ref and a dimensions differ");
  }
  const double nrm2 = c.a.squaredNorm();
  if (nrm2 < kZeroRowTol * kZeroRowTol) {
    if (c.b <= 0.0) return u_ref;
    throw QpInfeasible("project_halfspace: zero constraint row with b > 0");
  }
  const double slack = c.a.dot(u_ref) - c.b;
  if (slack >= 0.0) return u_ref;
  return u_ref - (slack / nrm2) * c.a;
}

}  // namespace modsafe
