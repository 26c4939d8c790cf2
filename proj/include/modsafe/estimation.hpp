#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "modsafe/dynamics.hpp"

namespace modsafe {

/// One integrated measurement: Y = F theta holds for the true parameters up
/// to quadrature error.
struct RegressorPair {
  Vec Y;  ///< R^n
  Mat F;  ///< R^{n x p}
};

/// Sliding window of control-loop samples (t, x, u) spanning at least
/// window_dt once warm. u is zero-order held, so sample j's input acts on
/// [t_j, t_{j+1}); each trapezoid segment therefore uses its left sample's u.
/// Integrand evaluations for the bound system are cached per sample and the
/// window sums are maintained incrementally.
class IntegrationWindow {
 public:
  struct Sample {
    double t;
    Vec x;
    Vec u;
  };

  IntegrationWindow(double window_dt, const ParametricAffineSystem& sys);

  /// Appends a sample; timestamps must be strictly increasing. Samples no
  /// longer needed to cover the trailing window_dt span are dropped.
  void append(double t, const Vec& x, const Vec& u);

  /// True once the retained samples span at least window_dt.
  bool ready() const;
  double span() const;
  std::size_t size() const;
  double window_dt() const { return window_dt_; }
  const ParametricAffineSystem& system() const { return sys_; }
  std::vector<Sample> samples() const;

 private:
  struct Node {
    double t;
    Vec x;
    Vec u;
    Vec f;   // f(x)
    Mat g;   // g(x)
    Mat F;   // F(x)
  };
  struct SegmentSums {
    Vec f;   // integral of f over the segment
    Vec gu;  // integral of g(x) u over the segment
    Mat F;   // integral of F over the segment
  };

  double window_dt_;
  ParametricAffineSystem sys_;
  std::deque<Node> nodes_;
  std::deque<SegmentSums> segments_;  // segments_[j] covers nodes_[j] .. nodes_[j+1]
  Vec sum_f_, sum_gu_;
  Mat sum_F_;

  friend std::optional<RegressorPair> window_regressor(
      const IntegrationWindow&, const ParametricAffineSystem&, double);
};

/// Integrated regressor pair over the trailing window at query time t
/// (t must be the newest sample time):
///   Y = x(t) - x(t - dt_w) - int f - int g u,   F = int F,
/// with composite-trapezoid quadrature over the stored samples. Returns
/// nothing while the window has not warmed up.
std::optional<RegressorPair> window_regressor(const IntegrationWindow& window,
                                              const ParametricAffineSystem& sys,
                                              double t);

/// Fixed-capacity history stack with singular-value-maximizing replacement.
class HistoryStack {
 public:
  HistoryStack(int capacity, int n, int p);

  int size() const { return static_cast<int>(entries_.size()); }
  int capacity() const { return capacity_; }
  int n() const { return n_; }
  int p() const { return p_; }
  const std::vector<RegressorPair>& entries() const { return entries_; }
  /// Cached information matrix A = sum_j F_j' F_j.
  const Mat& info_matrix() const { return A_; }
  /// Minimum singular value of A (A is symmetric PSD, so its smallest
  /// eigenvalue, clamped at zero).
  double min_singular_value() const { return sigma_min_; }

  friend bool svd_max_insert(HistoryStack&, const RegressorPair&);

 private:
  int capacity_;
  int n_;
  int p_;
  std::vector<RegressorPair> entries_;
  Mat A_;
  double sigma_min_ = 0.0;
};

/// Inserts unconditionally while below capacity. At capacity, evaluates every
/// single-slot replacement and applies the best one only if it strictly
/// raises the minimum singular value of A (absolute slack 1e-12). Returns
/// whether the stack changed.
bool svd_max_insert(HistoryStack& stack, const RegressorPair& pair);

/// E(theta_hat) = sum_j |Y_j - F_j theta_hat|^2.
double prediction_error(const HistoryStack& stack, const Vec& theta_hat);

/// Estimator velocity: theta_hat_dot = Gamma sum_j F_j' (Y_j - F_j theta_hat),
/// which equals -Gamma grad E / 2. Zero for an empty stack.
Vec theta_hat_dot(const HistoryStack& stack, const Vec& theta_hat,
                  const Mat& gamma);

enum class EstimatorLaw { Gd, Rls, RlsForget, RlsVarForget };

/// Gain dynamics for the supported update laws:
///   Gd           : Gamma_dot = 0
///   Rls          : Gamma_dot = -Gamma A Gamma
///   RlsForget    : Gamma_dot = beta Gamma - Gamma A Gamma
///   RlsVarForget : Gamma_dot = beta (1 - |Gamma| / gamma_bar) Gamma - Gamma A Gamma
/// |Gamma| is the spectral norm.
Mat gamma_dot(const HistoryStack& stack, const Mat& gamma, EstimatorLaw law,
              double beta, double gamma_bar);

/// |theta - theta_hat|.
double estimation_error_norm(const Vec& theta, const Vec& theta_hat);

EstimatorLaw parse_estimator_law(const std::string& name);
std::string estimator_law_name(EstimatorLaw law);

}  // namespace modsafe
