#pragma once

#include <stdexcept>

#include "modsafe/types.hpp"

namespace modsafe {

enum class Sense { LE, GE };

/// Single affine constraint  a . u <= b  or  a . u >= b.
struct HalfspaceConstraint {
  Vec a;
  double b = 0.0;
  Sense sense = Sense::LE;
};

struct QpInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Constraint rows with |a| below this are treated as identically zero.
inline constexpr double kZeroRowTol = 1e-12;

/// argmin 0.5 |u|^2  s.t.  a . u <= b. Closed form: 0 when b >= 0, else the
/// boundary point (b / |a|^2) a. A zero row with b < 0 is infeasible.
Vec min_norm_halfspace(const HalfspaceConstraint& c);

/// Euclidean projection of u_ref onto { u : a . u >= b }. Returns u_ref
/// unchanged when already feasible. A zero row with b > 0 is infeasible.
Vec project_halfspace(const Vec& u_ref, const HalfspaceConstraint& c);

}  // namespace modsafe
