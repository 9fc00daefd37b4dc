#include "stealshare/qbd.hpp"

#include <cmath>
#include <string>

#include "stealshare/error.hpp"

namespace stealshare {

namespace {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

double inf_norm(const MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

// Minimal nonnegative solution G of Am1 + A0 G + A1 G^2 = 0 by logarithmic
// reduction on the uniformized chain; falls back to the natural functional
// iteration if the reduction stalls.
MatrixXd compute_G(const MatrixXd& Am1, const MatrixXd& A0,
                   const MatrixXd& A1, QbdDiagnostics& diag) {
  const auto n = A0.rows();
  const MatrixXd I = MatrixXd::Identity(n, n);
  const double c = (-A0.diagonal()).maxCoeff();
  const MatrixXd Pd = Am1 / c;
  const MatrixXd Pl = I + A0 / c;
  const MatrixXd Pu = A1 / c;

  MatrixXd H = (I - Pl).partialPivLu().solve(MatrixXd::Identity(n, n));
  MatrixXd Bu = H * Pu;
  MatrixXd Bd = H * Pd;
  MatrixXd G = Bd;
  MatrixXd T = Bu;
  bool converged = false;
  int it = 0;
  for (; it < 64; ++it) {
    const MatrixXd U = Bu * Bd + Bd * Bu;
    Eigen::PartialPivLU<MatrixXd> lu(I - U);
    const MatrixXd Bu2 = lu.solve(Bu * Bu);
    const MatrixXd Bd2 = lu.solve(Bd * Bd);
    const MatrixXd dG = T * Bd2;
    G += dG;
    T *= Bu2;
    Bu = Bu2;
    Bd = Bd2;
    if (inf_norm(dG) < kGIterateTol) {
      converged = true;
      ++it;
      break;
    }
  }
  diag.g_iterations = it;

  const double scale = std::max(1.0, inf_norm(Am1) + inf_norm(A0) + inf_norm(A1));
  auto residual = [&](const MatrixXd& g) {
    return inf_norm(Am1 + A0 * g + A1 * g * g);
  };
  if (!converged || residual(G) > kGResidualTol * scale) {
    // Fallback: G <- Pd + Pl G + Pu G^2, monotone from the current iterate
    // clamped into [0, 1].
    diag.g_used_fallback = true;
    G = G.cwiseMax(0.0).cwiseMin(1.0);
    for (int k = 0; k < 200000; ++k) {
      const MatrixXd next = Pd + Pl * G + Pu * G * G;
      const double step = inf_norm(next - G);
      G = next;
      if (step < kGIterateTol) break;
    }
    if (residual(G) > kGResidualTol * scale) {
      fail(ErrorKind::convergence_failure,
           "G iteration did not reach tolerance (residual " +
               std::to_string(residual(G)) + ")");
    }
  }
  diag.g_residual = residual(G);
  return G;
}

}  // namespace

MatrixXd QbdModel::up() const {
  const auto n = dist.num_phases();
  return lambda * MatrixXd::Identity(n, n);
}

MatrixXd QbdModel::local() const {
  const auto n = dist.num_phases();
  return dist.S() - (lambda + (1.0 - lambda) * r) * MatrixXd::Identity(n, n);
}

MatrixXd QbdModel::down() const {
  const auto n = dist.num_phases();
  return dist.exit_rates() * dist.alpha() +
         (1.0 - lambda) * r * MatrixXd::Identity(n, n);
}

QbdSolution solve(const QbdModel& model) {
  const double lambda = model.lambda;
  const double r = model.r;
  if (!std::isfinite(lambda) || lambda >= 1.0) {
    fail(ErrorKind::stability,
         "load lambda = " + std::to_string(lambda) +
             " is unstable (needs lambda < 1)");
  }
  if (lambda < kLambdaMin || lambda > kLambdaMax) {
    fail(ErrorKind::invalid_parameter,
         "lambda must lie in [1e-6, 1 - 1e-6]");
  }
  if (!std::isfinite(r) || r < 0.0 || r > kRMax) {
    fail(ErrorKind::invalid_parameter, "r must lie in [0, 1e6]");
  }
  if (std::abs(model.dist.mean() - 1.0) > kMeanOneTol) {
    fail(ErrorKind::invalid_parameter,
         "solver requires a mean-1 job size distribution (mean = " +
             std::to_string(model.dist.mean()) + "); rescale the rates");
  }

  const auto n = model.dist.num_phases();
  const MatrixXd I = MatrixXd::Identity(n, n);
  const MatrixXd A1 = model.up();
  const MatrixXd A0 = model.local();
  const MatrixXd Am1 = model.down();

  QbdSolution sol(model);
  sol.G_ = compute_G(Am1, A0, A1, sol.diag_);

  // R = A1 (-(A0 + A1 G))^{-1}, valid for all r >= 0 (the inverted matrix
  // is a nonsingular subgenerator even where Am1 itself is singular).
  Eigen::PartialPivLU<MatrixXd> ulu(-(A0 + A1 * sol.G_));
  sol.R_ = lambda * ulu.solve(MatrixXd::Identity(n, n));
  sol.diag_.r_residual = inf_norm(A1 + sol.R_ * A0 + sol.R_ * sol.R_ * Am1);
  sol.diag_.coupling_residual = inf_norm(A1 * sol.G_ - sol.R_ * Am1);
  sol.diag_.spectral_radius_R =
      sol.R_.eigenvalues().cwiseAbs().maxCoeff();

  const double scale =
      std::max(1.0, inf_norm(Am1) + inf_norm(A0) + inf_norm(A1));
  if (sol.diag_.r_residual > kGResidualTol * scale) {
    fail(ErrorKind::convergence_failure,
         "R did not satisfy its quadratic equation (residual " +
             std::to_string(sol.diag_.r_residual) + ")");
  }

  // lambda0 from the closed form; pi1 = (1-lambda) * lambda0 * alpha M^{-1}.
  const MatrixXd M = lambda * (I - sol.G_) - model.dist.S();
  Eigen::PartialPivLU<MatrixXd> mlu(M.transpose());
  const RowVectorXd w =
      mlu.solve(model.dist.alpha().transpose()).transpose();
  sol.lambda0_ =
      lambda * (1.0 + r) / (1.0 + (1.0 - lambda) * r * w.sum());
  sol.R1_ = sol.lambda0_ * w;
  sol.pi0_ = 1.0 - lambda;
  sol.pi1_ = sol.pi0_ * sol.R1_;

  Eigen::PartialPivLU<MatrixXd> irlu(I - sol.R_);
  sol.inv_one_ = irlu.solve(VectorXd::Ones(n));
  sol.inv_sq_one_ = irlu.solve(sol.inv_one_);
  if (!sol.inv_one_.allFinite() || !sol.inv_sq_one_.allFinite()) {
    fail(ErrorKind::numeric_failure, "I - R is numerically singular");
  }
  return sol;
}

QbdSolution solve(const PhaseTypeDist& dist, double lambda, double r) {
  return solve(QbdModel{dist, lambda, r});
}

RowVectorXd QbdSolution::pi_level(int level) const {
  if (level < 1) {
    fail(ErrorKind::invalid_parameter, "levels are counted from 1");
  }
  RowVectorXd v = pi1_;
  for (int l = 1; l < level; ++l) v *= R_;
  return v;
}

double QbdSolution::tail_prob(int k) const {
  if (k < 0) {
    fail(ErrorKind::invalid_parameter, "tail index must be >= 0");
  }
  if (k == 0) return 1.0;
  RowVectorXd v = pi1_;
  for (int l = 1; l < k; ++l) v *= R_;
  return v.dot(inv_one_);
}

RowVectorXd QbdSolution::tail_vector(int k) const {
  if (k < 1) {
    fail(ErrorKind::invalid_parameter, "tail index must be >= 1");
  }
  RowVectorXd v = pi1_;
  for (int l = 1; l < k; ++l) v *= R_;
  const auto n = v.size();
  Eigen::PartialPivLU<MatrixXd> irlu(
      (MatrixXd::Identity(n, n) - R_).transpose());
  return irlu.solve(v.transpose()).transpose();
}

double QbdSolution::mean_queue_length() const {
  return pi1_.dot(inv_sq_one_);
}

double QbdSolution::mean_response() const {
  return mean_queue_length() / model_.lambda;
}

double lambda0_consistency(const QbdSolution& sol) {
  const auto& model = sol.model();
  const auto n = sol.num_phases();
  const MatrixXd I = MatrixXd::Identity(n, n);
  const MatrixXd M = model.lambda * (I - sol.G()) - model.dist.S();
  const RowVectorXd w = M.transpose()
                            .partialPivLu()
                            .solve(model.dist.alpha().transpose())
                            .transpose();
  const MatrixXd IR = I - sol.R();
  const VectorXd x = IR.partialPivLu().solve(VectorXd::Ones(n));
  const double v_norm = model.lambda / ((1.0 - model.lambda) * w.dot(x));
  const double v_flow = model.lambda + model.r * sol.tail_prob(2);
  const double v_closed = sol.lambda0();
  const double d1 = std::abs(v_norm - v_closed);
  const double d2 = std::abs(v_flow - v_closed);
  const double d3 = std::abs(v_norm - v_flow);
  return std::max({d1, d2, d3});
}

double balance_residual(const QbdSolution& sol, int level_cap) {
  if (level_cap < 1) {
    fail(ErrorKind::invalid_parameter, "level cap must be >= 1");
  }
  const auto& model = sol.model();
  const auto n = sol.num_phases();
  const MatrixXd I = MatrixXd::Identity(n, n);
  const MatrixXd A1 = model.up();
  const MatrixXd A0 = model.local();
  const MatrixXd Am1 = model.down();
  const MatrixXd local1 = model.dist.S() - model.lambda * I;

  std::vector<RowVectorXd> pi(static_cast<size_t>(level_cap) + 2);
  pi[1] = sol.pi1();
  for (int l = 2; l <= level_cap + 1; ++l) pi[l] = pi[l - 1] * sol.R();

  double worst = 0;
  // Level-0 column: -lambda0 pi0 + pi1 mu.
  worst = std::max(worst, std::abs(-sol.lambda0() * sol.pi0() +
                                   pi[1] * model.dist.exit_rates()));
  // Level-1 column: pi0 lambda0 alpha + pi1 (S - lambda I) + pi2 Am1.
  RowVectorXd col1 = sol.pi0() * sol.lambda0() * model.dist.alpha() +
                     pi[1] * local1 + pi[2] * Am1;
  worst = std::max(worst, col1.cwiseAbs().maxCoeff());
  // Levels 2..level_cap: pi_{l-1} A1 + pi_l A0 + pi_{l+1} Am1.
  for (int l = 2; l <= level_cap; ++l) {
    RowVectorXd col = pi[l - 1] * A1 + pi[l] * A0 + pi[l + 1] * Am1;
    worst = std::max(worst, col.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace stealshare
