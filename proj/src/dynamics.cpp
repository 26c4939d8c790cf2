#include "modsafe/dynamics.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace modsafe {

namespace {

void check_state(const ParametricAffineSystem& sys, const Vec& x) {
  if (x.size() != sys.n) {
    throw std::invalid_argument("dynamics: state has size " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(sys.n));
  }
}

std::map<std::string, std::function<ParametricAffineSystem()>>& registry() {
  static std::map<std::string, std::function<ParametricAffineSystem()>> reg{
      {"double_integrator_drag", &make_double_integrator_drag}};
  return reg;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Vec drift(const ParametricAffineSystem& sys, const Vec& x) {
  check_state(sys, x);
  return sys.drift_fn(x);
}

Mat regressor(const ParametricAffineSystem& sys, const Vec& x) {
  check_state(sys, x);
  return sys.regressor_fn(x);
}

Mat actuation(const ParametricAffineSystem& sys, const Vec& x) {
  check_state(sys, x);
  return sys.actuation_fn(x);
}

Vec true_dynamics(const ParametricAffineSystem& sys, const Vec& x, const Vec& u,
                  const Vec& theta) {
  check_state(sys, x);
  if (u.size() != sys.m) {
    throw std::invalid_argument("true_dynamics: input has size " +
                                std::to_string(u.size()) + ", expected " +
                                std::to_string(sys.m));
  }
  if (theta.size() != sys.p) {
    throw std::invalid_argument("true_dynamics: parameter vector has size " +
                                std::to_string(theta.size()) + ", expected " +
                                std::to_string(sys.p));
  }
  Vec out = sys.drift_fn(x);
  out.noalias() += sys.regressor_fn(x) * theta;
  out.noalias() += sys.actuation_fn(x) * u;
  return out;
}

Vec estimated_dynamics(const ParametricAffineSystem& sys, const Vec& x,
                       const Vec& u, const Vec& theta_hat) {
  return true_dynamics(sys, x, u, theta_hat);
}

ParametricAffineSystem make_double_integrator_drag() {
  ParametricAffineSystem s;
  s.name = "double_integrator_drag";
  s.n = 4;
  s.m = 2;
  s.p = 2;
  s.drift_fn = [](const Vec& x) {
    Vec f = Vec::Zero(4);
    f(0) = x(2);
    f(1) = x(3);
    return f;
  };
  s.regressor_fn = [](const Vec& x) {
    const double speed = std::sqrt(x(2) * x(2) + x(3) * x(3));
    Mat F = Mat::Zero(4, 2);
    F(2, 0) = -x(2) * speed;
    F(3, 1) = -x(3) * speed;
    return F;
  };
  s.actuation_fn = [](const Vec&) {
    Mat g = Mat::Zero(4, 2);
    g(2, 0) = 1.0;
    g(3, 1) = 1.0;
    return g;
  };
  return s;
}

void register_system(const std::string& name,
                     std::function<ParametricAffineSystem()> factory) {
  if (!factory) throw std::invalid_argument("register_system: empty factory");
  std::lock_guard<std::mutex> lock(registry_mutex());
  registry()[name] = std::move(factory);
}

ParametricAffineSystem make_system(const std::string& name) {
  std::function<ParametricAffineSystem()> factory;
  {
    std::lock_guard<std::mutex> lock(registry_mutex());
    auto it = registry().find(name);
    if (it == registry().end()) {
      throw std::invalid_argument("make_system: unknown system '" + name + "'");
    }
    factory = it->second;
  }
  ParametricAffineSystem sys = factory();
  if (sys.n <= 0 || sys.m <= 0 || sys.p < 0 || !sys.drift_fn ||
      !sys.regressor_fn || !sys.actuation_fn) {
    throw std::invalid_argument("make_system: factory for '" + name +
                                "' produced an incomplete system");
  }
  return sys;
}

std::vector<std::string> registered_systems() {
  std::lock_guard<std::mutex> lock(registry_mutex());
  std::vector<std::string> names;
  names.reserve(registry().size());
  for (const auto& [name, _] : registry()) names.push_back(name);
  return names;
}

}  // namespace modsafe
