#include "stealshare/phase_type.hpp"

#include <cmath>
#include <string>

#include "stealshare/error.hpp"

namespace stealshare {

namespace {

constexpr double kShapeTol = 1e-9;  // slack for stochastic-vector checks

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

const char* to_string(HazardClass h) {
  switch (h) {
    case HazardClass::unknown: return "unknown";
    case HazardClass::decreasing: return "decreasing";
    case HazardClass::increasing: return "increasing";
    case HazardClass::constant: return "constant";
  }
  return "?";
}

PhaseTypeDist::PhaseTypeDist(Eigen::RowVectorXd alpha, Eigen::MatrixXd S,
                             HazardClass hazard)
    : alpha_(std::move(alpha)), S_(std::move(S)), hazard_(hazard) {
  const auto n = alpha_.size();
  if (n < 1) {
    fail(ErrorKind::unsupported_shape, "distribution needs at least 1 phase");
  }
  if (S_.rows() != n || S_.cols() != n) {
    fail(ErrorKind::unsupported_shape,
         "alpha has " + std::to_string(n) + " entries but S is " +
             std::to_string(S_.rows()) + "x" + std::to_string(S_.cols()));
  }
  if (!all_finite(alpha_) || !all_finite(S_)) {
    fail(ErrorKind::unsupported_shape, "alpha/S entries must be finite");
  }
  if (alpha_.minCoeff() < -kShapeTol ||
      std::abs(alpha_.sum() - 1.0) > kShapeTol) {
    fail(ErrorKind::unsupported_shape,
         "alpha must be a probability vector (nonnegative, sum 1)");
  }
  alpha_ = alpha_.cwiseMax(0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      if (S_(i, j) < -kShapeTol) {
        fail(ErrorKind::unsupported_shape,
             "S off-diagonal entries must be nonnegative");
      }
      if (S_(i, j) < 0) S_(i, j) = 0.0;
    }
    if (S_(i, i) >= 0) {
      fail(ErrorKind::unsupported_shape,
           "S diagonal entries must be negative");
    }
  }
  mu_ = -S_ * Eigen::VectorXd::Ones(n);
  if (mu_.minCoeff() < -kShapeTol * S_.cwiseAbs().maxCoeff()) {
    fail(ErrorKind::unsupported_shape,
         "S row sums must be nonpositive (exit rates nonnegative)");
  }
  mu_ = mu_.cwiseMax(0.0);

  // Moments via (-S)^{-1}; a singular S (some phase can never reach
  // absorption) shows up here.
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(-S_);
  const Eigen::VectorXd x1 = lu.solve(Eigen::VectorXd::Ones(n));
  const Eigen::VectorXd x2 = lu.solve(x1);
  mean_ = alpha_.dot(x1);
  second_ = 2.0 * alpha_.dot(x2);
  const double residual =
      ((-S_) * x1 - Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff();
  if (!std::isfinite(mean_) || !std::isfinite(second_) || mean_ <= 0 ||
      residual > 1e-8) {
    fail(ErrorKind::numeric_failure,
         "S is singular or too ill-conditioned to invert");
  }
}

double PhaseTypeDist::laplace(double s) const {
  if (s < 0 || !std::isfinite(s)) {
    fail(ErrorKind::invalid_parameter,
         "laplace transform argument must be finite and >= 0");
  }
  const auto n = alpha_.size();
  const Eigen::MatrixXd m =
      s * Eigen::MatrixXd::Identity(n, n) - S_;
  const Eigen::VectorXd x = m.partialPivLu().solve(mu_);
  return alpha_.dot(x);
}

double PhaseTypeDist::exp_min_mean(double r) const {
  if (r < 0 || !std::isfinite(r)) {
    fail(ErrorKind::invalid_parameter,
         "truncation rate must be finite and >= 0");
  }
  const auto n = alpha_.size();
  const Eigen::MatrixXd m =
      r * Eigen::MatrixXd::Identity(n, n) - S_;
  const Eigen::VectorXd x = m.partialPivLu().solve(Eigen::VectorXd::Ones(n));
  return alpha_.dot(x);
}

Eigen::RowVectorXd PhaseTypeDist::busy_phase_vector() const {
  const auto n = alpha_.size();
  const Eigen::MatrixXd gen = S_ + mu_ * alpha_;
  // Solve beta gen = 0, beta 1 = 1: transpose, replace the last balance
  // equation by the normalization row.
  Eigen::MatrixXd sys = gen.transpose();
  sys.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
  if (!lu.isInvertible()) {
    fail(ErrorKind::decomposition,
         "busy-phase chain has no unique stationary vector");
  }
  Eigen::RowVectorXd beta = lu.solve(rhs).transpose();
  const double residual = (beta * gen).cwiseAbs().maxCoeff();
  const double scale = gen.cwiseAbs().maxCoeff();
  if (residual > 1e-9 * std::max(1.0, scale)) {
    fail(ErrorKind::decomposition,
         "busy-phase stationary vector did not satisfy balance equations");
  }
  return beta;
}

PhaseTypeDist fit_hyperexp(const HyperExpSpec& spec) {
  const double scv = spec.scv;
  const double f = spec.f;
  if (!std::isfinite(scv) || scv < 1.0) {
    fail(ErrorKind::invalid_parameter,
         "hyperexponential fit requires scv >= 1 (got " +
             std::to_string(scv) + ")");
  }
  if (!std::isfinite(f) || f <= 0.0 || f >= 1.0) {
    fail(ErrorKind::invalid_parameter,
         "work fraction f must lie strictly inside (0, 1)");
  }
  const double fb = 1.0 - f;
  const double root = std::sqrt((scv - 1.0) * (scv - 1.0 + 8.0 * f * fb));
  const double mu1 = (scv + (4.0 * f - 1.0) + root) / (2.0 * f * (scv + 1.0));
  const double mu2 = (scv + (4.0 * fb - 1.0) - root) / (2.0 * fb * (scv + 1.0));
  const double a1 = mu1 * f;
  if (!(mu1 > 0) || !(mu2 > 0) || !(a1 > 0) || !(a1 < 1)) {
    fail(ErrorKind::numeric_failure, "hyperexponential fit degenerated");
  }
  Eigen::RowVectorXd alpha(2);
  alpha << a1, 1.0 - a1;
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(2, 2);
  S(0, 0) = -mu1;
  S(1, 1) = -mu2;
  const HazardClass hz = std::abs(mu1 - mu2) <= 1e-12 * std::max(mu1, mu2)
                             ? HazardClass::constant
                             : HazardClass::decreasing;
  return PhaseTypeDist(std::move(alpha), std::move(S), hz);
}

PhaseTypeDist fit_hyperexp(double scv, double f) {
  return fit_hyperexp(HyperExpSpec{scv, f});
}

PhaseTypeDist exponential() {
  Eigen::RowVectorXd alpha(1);
  alpha << 1.0;
  Eigen::MatrixXd S(1, 1);
  S << -1.0;
  return PhaseTypeDist(std::move(alpha), std::move(S), HazardClass::constant);
}

PhaseTypeDist erlang(int k) {
  if (k < 1) {
    fail(ErrorKind::invalid_parameter, "erlang needs at least one stage");
  }
  Eigen::RowVectorXd alpha = Eigen::RowVectorXd::Zero(k);
  alpha(0) = 1.0;
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    S(i, i) = -static_cast<double>(k);
    if (i + 1 < k) S(i, i + 1) = static_cast<double>(k);
  }
  return PhaseTypeDist(std::move(alpha), std::move(S),
                       k == 1 ? HazardClass::constant
                              : HazardClass::increasing);
}

PhaseTypeDist hypoexp(std::span<const double> rates) {
  const int n = static_cast<int>(rates.size());
  if (n < 1) {
    fail(ErrorKind::invalid_parameter, "hypoexp needs at least one stage");
  }
  for (double rate : rates) {
    if (!(rate > 0) || !std::isfinite(rate)) {
      fail(ErrorKind::invalid_parameter, "hypoexp rates must be positive");
    }
  }
  Eigen::RowVectorXd alpha = Eigen::RowVectorXd::Zero(n);
  alpha(0) = 1.0;
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    S(i, i) = -rates[i];
    if (i + 1 < n) S(i, i + 1) = rates[i];
  }
  return PhaseTypeDist(std::move(alpha), std::move(S),
                       n == 1 ? HazardClass::constant
                              : HazardClass::increasing);
}

PhaseTypeDist hyperexp(std::span<const double> prob,
                       std::span<const double> rates) {
  const int n = static_cast<int>(prob.size());
  if (n < 1 || rates.size() != prob.size()) {
    fail(ErrorKind::invalid_parameter,
         "hyperexp needs matching, nonempty prob/rate lists");
  }
  double sum = 0;
  double rate_min = rates[0], rate_max = rates[0];
  for (int i = 0; i < n; ++i) {
    if (!(prob[i] >= 0) || !(rates[i] > 0) || !std::isfinite(rates[i])) {
      fail(ErrorKind::invalid_parameter,
           "hyperexp probabilities must be >= 0 and rates > 0");
    }
    sum += prob[i];
    rate_min = std::min(rate_min, rates[i]);
    rate_max = std::max(rate_max, rates[i]);
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    fail(ErrorKind::invalid_parameter,
         "hyperexp probabilities must sum to 1");
  }
  Eigen::RowVectorXd alpha(n);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    alpha(i) = prob[i];
    S(i, i) = -rates[i];
  }
  const HazardClass hz = (rate_max - rate_min) <= 1e-12 * rate_max
                             ? HazardClass::constant
                             : HazardClass::decreasing;
  return PhaseTypeDist(std::move(alpha), std::move(S), hz);
}

}  // namespace stealshare
