#include "modsafe/estimation.hpp"

#include <cmath>
#include <stdexcept>

namespace modsafe {

namespace {

constexpr double kSpanSlack = 1e-9;
constexpr double kInsertSlack = 1e-12;

double min_eig_psd(const Mat& A) {
  if (A.rows() == 1) return std::max(0.0, A(0, 0));
  if (A.rows() == 2) {
    // closed form for the symmetric 2x2 case; this sits on the per-step path
    const double a = A(0, 0), b = A(0, 1), d = A(1, 1);
    const double mean = 0.5 * (a + d);
    const double disc = std::sqrt(std::max(0.0, 0.25 * (a - d) * (a - d) + b * b));
    return std::max(0.0, mean - disc);
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(A, Eigen::EigenvaluesOnly);
  return std::max(0.0, eig.eigenvalues().minCoeff());
}

double spectral_norm_sym(const Mat& A) {
  if (A.rows() == 1) return std::abs(A(0, 0));
  if (A.rows() == 2) {
    const double a = A(0, 0), b = 0.5 * (A(0, 1) + A(1, 0)), d = A(1, 1);
    const double mean = 0.5 * (a + d);
    const double disc = std::sqrt(std::max(0.0, 0.25 * (a - d) * (a - d) + b * b));
    return std::max(std::abs(mean + disc), std::abs(mean - disc));
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (A + A.transpose()),
                                         Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

IntegrationWindow::IntegrationWindow(double window_dt,
                                     const ParametricAffineSystem& sys)
    : window_dt_(window_dt), sys_(sys) {
  if (!(window_dt > 0.0)) {
    throw std::invalid_argument("IntegrationWindow: window_dt must be positive");
  }
  sum_f_ = Vec::Zero(sys_.n);
  sum_gu_ = Vec::Zero(sys_.n);
  sum_F_ = Mat::Zero(sys_.n, sys_.p);
}

void IntegrationWindow::append(double t, const Vec& x, const Vec& u) {
  if (x.size() != sys_.n || u.size() != sys_.m) {
    throw std::invalid_argument("IntegrationWindow::append: dimension mismatch");
  }
  if (!nodes_.empty() && !(t > nodes_.back().t)) {
    throw std::invalid_argument(
        "IntegrationWindow::append: timestamps must be strictly increasing");
  }
  Node nd{t, x, u, drift(sys_, x), actuation(sys_, x), regressor(sys_, x)};
  if (!nodes_.empty()) {
    const Node& prev = nodes_.back();
    const double h = t - prev.t;
    SegmentSums seg;
    seg.f = 0.5 * h * (prev.f + nd.f);
    // u is held over [prev.t, t), so the segment integrates g(x) prev.u
    seg.gu = 0.5 * h * ((prev.g + nd.g) * prev.u);
    seg.F = 0.5 * h * (prev.F + nd.F);
    sum_f_ += seg.f;
    sum_gu_ += seg.gu;
    sum_F_ += seg.F;
    segments_.push_back(std::move(seg));
  }
  nodes_.push_back(std::move(nd));
  while (nodes_.size() >= 2 &&
         t - nodes_[1].t >= window_dt_ - kSpanSlack) {
    sum_f_ -= segments_.front().f;
    sum_gu_ -= segments_.front().gu;
    sum_F_ -= segments_.front().F;
    segments_.pop_front();
    nodes_.pop_front();
  }
}

bool IntegrationWindow::ready() const {
  return nodes_.size() >= 2 &&
         nodes_.back().t - nodes_.front().t >= window_dt_ - kSpanSlack;
}

double IntegrationWindow::span() const {
  return nodes_.size() < 2 ? 0.0 : nodes_.back().t - nodes_.front().t;
}

std::size_t IntegrationWindow::size() const { return nodes_.size(); }

std::vector<IntegrationWindow::Sample> IntegrationWindow::samples() const {
  std::vector<Sample> out;
  out.reserve(nodes_.size());
  for (const auto& nd : nodes_) out.push_back({nd.t, nd.x, nd.u});
  return out;
}

std::optional<RegressorPair> window_regressor(const IntegrationWindow& window,
                                              const ParametricAffineSystem& sys,
                                              double t) {
  if (sys.name != window.sys_.name || sys.n != window.sys_.n ||
      sys.m != window.sys_.m || sys.p != window.sys_.p) {
    throw std::invalid_argument(
        "window_regressor: system differs from the one bound to the window");
  }
  if (!window.ready()) return std::nullopt;
  if (std::abs(t - window.nodes_.back().t) > kSpanSlack) {
    throw std::invalid_argument(
        "window_regressor: query time must equal the newest sample time");
  }
  RegressorPair pair;
  pair.Y = window.nodes_.back().x - window.nodes_.front().x - window.sum_f_ -
           window.sum_gu_;
  pair.F = window.sum_F_;
  return pair;
}

HistoryStack::HistoryStack(int capacity, int n, int p)
    : capacity_(capacity), n_(n), p_(p) {
  if (capacity <= 0) {
    throw std::invalid_argument("HistoryStack: capacity must be positive");
  }
  if (n <= 0 || p <= 0) {
    throw std::invalid_argument("HistoryStack: dimensions must be positive");
  }
  entries_.reserve(capacity);
  A_ = Mat::Zero(p, p);
}

bool svd_max_insert(HistoryStack& stack, const RegressorPair& pair) {
  if (pair.Y.size() != stack.n_ || pair.F.rows() != stack.n_ ||
      pair.F.cols() != stack.p_) {
    throw std::invalid_argument("svd_max_insert: pair dimension mismatch");
  }
  if (!pair.Y.allFinite() || !pair.F.allFinite()) {
    throw std::invalid_argument("svd_max_insert: pair is not finite");
  }
  const Mat cand = pair.F.transpose() * pair.F;
  if (stack.size() < stack.capacity_) {
    stack.entries_.push_back(pair);
    stack.A_ += cand;
    stack.sigma_min_ = min_eig_psd(stack.A_);
    return true;
  }
  double best_sigma = stack.sigma_min_ + kInsertSlack;
  int best_j = -1;
  for (int j = 0; j < stack.size(); ++j) {
    const Mat& Fj = stack.entries_[j].F;
    const Mat Aj = stack.A_ - Fj.transpose() * Fj + cand;
    const double s = min_eig_psd(Aj);
    if (s > best_sigma) {
      best_sigma = s;
      best_j = j;
    }
  }
  if (best_j < 0) return false;
  const Mat& Fout = stack.entries_[best_j].F;
  stack.A_ += cand - Fout.transpose() * Fout;
  stack.entries_[best_j] = pair;
  stack.sigma_min_ = min_eig_psd(stack.A_);
  return true;
}

double prediction_error(const HistoryStack& stack, const Vec& theta_hat) {
  if (theta_hat.size() != stack.p()) {
    throw std::invalid_argument("prediction_error: theta_hat dimension mismatch");
  }
  double e = 0.0;
  Vec r(stack.n());
  for (const auto& pair : stack.entries()) {
    r = pair.Y;
    r.noalias() -= pair.F * theta_hat;
    e += r.squaredNorm();
  }
  return e;
}

Vec theta_hat_dot(const HistoryStack& stack, const Vec& theta_hat,
                  const Mat& gamma) {
  if (theta_hat.size() != stack.p()) {
    throw std::invalid_argument("theta_hat_dot: theta_hat dimension mismatch");
  }
  if (gamma.rows() != stack.p() || gamma.cols() != stack.p()) {
    throw std::invalid_argument("theta_hat_dot: gamma dimension mismatch");
  }
  Vec s = Vec::Zero(stack.p());
  Vec r(stack.n());
  for (const auto& pair : stack.entries()) {
    r = pair.Y;
    r.noalias() -= pair.F * theta_hat;
    s.noalias() += pair.F.transpose() * r;
  }
  return gamma * s;
}

Mat gamma_dot(const HistoryStack& stack, const Mat& gamma, EstimatorLaw law,
              double beta, double gamma_bar) {
  const int p = stack.p();
  if (gamma.rows() != p || gamma.cols() != p) {
    throw std::invalid_argument("gamma_dot: gamma dimension mismatch");
  }
  switch (law) {
    case EstimatorLaw::Gd:
      return Mat::Zero(p, p);
    case EstimatorLaw::Rls:
      return -gamma * stack.info_matrix() * gamma;
    case EstimatorLaw::RlsForget:
      return beta * gamma - gamma * stack.info_matrix() * gamma;
    case EstimatorLaw::RlsVarForget: {
      if (!(gamma_bar > 0.0)) {
        throw std::invalid_argument("gamma_dot: gamma_bar must be positive");
      }
      const double scale = beta * (1.0 - spectral_norm_sym(gamma) / gamma_bar);
      return scale * gamma - gamma * stack.info_matrix() * gamma;
    }
  }
  throw std::invalid_argument("gamma_dot: unknown estimator law");
}

double estimation_error_norm(const Vec& theta, const Vec& theta_hat) {
  if (theta.size() != theta_hat.size()) {
    throw std::invalid_argument("estimation_error_norm: dimension mismatch");
  }
  return (theta - theta_hat).norm();
}

EstimatorLaw parse_estimator_law(const std::string& name) {
  if (name == "gd") return EstimatorLaw::Gd;
  if (name == "rls") return EstimatorLaw::Rls;
  if (name == "rls_forget") return EstimatorLaw::RlsForget;
  if (name == "rls_varforget") return EstimatorLaw::RlsVarForget;
  throw std::invalid_argument("unknown estimator law '" + name +
                              "' (expected gd, rls, rls_forget or rls_varforget)");
}

std::string estimator_law_name(EstimatorLaw law) {
  switch (law) {
    case EstimatorLaw::Gd: return "gd";
    case EstimatorLaw::Rls: return "rls";
    case EstimatorLaw::RlsForget: return "rls_forget";
    case EstimatorLaw::RlsVarForget: return "rls_varforget";
  }
  return "unknown";
}

}  // namespace modsafe
