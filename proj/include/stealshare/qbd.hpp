#pragma once

#include <Eigen/Dense>

#include "stealshare/phase_type.hpp"

namespace stealshare {

// Solver domain and tolerances (pinned; also echoed into CLI output).
inline constexpr double kLambdaMin = 1e-6;
inline constexpr double kLambdaMax = 1.0 - 1e-6;
inline constexpr double kRMax = 1e6;
inline constexpr double kMeanOneTol = 1e-8;     // dist must have mean 1
inline constexpr double kGIterateTol = 1e-12;   // successive-iterate stop
inline constexpr double kGResidualTol = 1e-10;  // scaled residual gate

// Single-queue model the large-system fixed point reduces to: an M/PH/1
// queue with arrival rate lambda plus removal of the youngest waiting job
// at rate (1-lambda)*r whenever at least two jobs are present.  Level
// transition blocks of the generator:
//   up      A1     = lambda I
//   local   A0(r)  = S - (lambda + (1-lambda) r) I
//   down    Am1(r) = mu alpha + (1-lambda) r I
// At level 1 the local block is S - lambda I and the down block is mu
// (no removal can take the job in service); level 0 is a single idle state
// with arrival rate lambda0 chosen so that pi0 = 1 - lambda.
struct QbdModel {
  PhaseTypeDist dist;
  double lambda = 0;
  double r = 0;

  Eigen::MatrixXd up() const;
  Eigen::MatrixXd local() const;
  Eigen::MatrixXd down() const;
};

struct QbdDiagnostics {
  int g_iterations = 0;
  bool g_used_fallback = false;
  double g_residual = 0;         // |Am1 + A0 G + A1 G^2|_inf
  double r_residual = 0;         // |A1 + R A0 + R^2 Am1|_inf
  double coupling_residual = 0;  // |A1 G - R Am1|_inf
  double spectral_radius_R = 0;
};

// Stationary solution pi = (pi0, pi1, pi2, ...) with pi_l = pi1 R^{l-1}.
class QbdSolution {
 public:
  const QbdModel& model() const { return model_; }
  double lambda() const { return model_.lambda; }
  double r() const { return model_.r; }
  int num_phases() const { return model_.dist.num_phases(); }

  const Eigen::MatrixXd& G() const { return G_; }
  const Eigen::MatrixXd& R() const { return R_; }
  // First-passage factor for level 1: pi1 = pi0 * R1.
  const Eigen::RowVectorXd& R1() const { return R1_; }

  // Arrival rate out of the idle state; makes pi0 = 1 - lambda.
  double lambda0() const { return lambda0_; }
  double pi0() const { return pi0_; }
  const Eigen::RowVectorXd& pi1() const { return pi1_; }

  // pi_l for l >= 1 (level probabilities by phase).
  Eigen::RowVectorXd pi_level(int level) const;
  // P[queue length >= k] for k >= 0.
  double tail_prob(int k) const;
  // sum_{l >= k} pi_l for k >= 1 (row vector over phases).
  Eigen::RowVectorXd tail_vector(int k) const;

  // E[queue length] = pi1 (I-R)^{-2} 1 and E[response time] via Little.
  double mean_queue_length() const;
  double mean_response() const;

  const QbdDiagnostics& diagnostics() const { return diag_; }

 private:
  friend QbdSolution solve(const QbdModel& model);
  explicit QbdSolution(QbdModel model) : model_(std::move(model)) {}

  QbdModel model_;
  Eigen::MatrixXd G_, R_;
  Eigen::RowVectorXd R1_, pi1_;
  double lambda0_ = 0, pi0_ = 0;
  Eigen::VectorXd inv_one_;      // (I-R)^{-1} 1
  Eigen::VectorXd inv_sq_one_;   // (I-R)^{-2} 1
  QbdDiagnostics diag_;
};

// Requires mean(dist) = 1 within kMeanOneTol, lambda in
// [kLambdaMin, kLambdaMax] and r in [0, kRMax].  G is computed by
// logarithmic reduction (functional iteration as fallback),
// R = A1 (-(A0 + A1 G))^{-1}, and lambda0 from the closed form
//   lambda0 = lambda (1+r) / (1 + (1-lambda) r alpha M^{-1} 1),
// with M = lambda (I-G) - S.  All residuals are checked before returning.
QbdSolution solve(const QbdModel& model);
QbdSolution solve(const PhaseTypeDist& dist, double lambda, double r);

// Max |difference| between the three equivalent expressions for lambda0:
// the normalization form lambda / ((1-lambda) alpha M^{-1} (I-R)^{-1} 1),
// the flow form lambda + r * P[len >= 2], and the closed form used by
// solve().
double lambda0_consistency(const QbdSolution& sol);

// Max-abs entry of pi Q over the level-0..level_cap columns of the full
// generator, with pi extended by pi_l = pi1 R^{l-1}.
double balance_residual(const QbdSolution& sol, int level_cap);

}  // namespace stealshare
