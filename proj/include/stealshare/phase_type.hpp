#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace stealshare {

// Hazard-rate shape, declared structurally by the constructors: mixtures of
// exponentials have a decreasing hazard rate, chains of exponential stages
// an increasing one, a single stage a constant one.  Generic (alpha, S)
// inputs stay "unknown".  Gates the hazard-based boundary bounds.
enum class HazardClass { unknown, decreasing, increasing, constant };

const char* to_string(HazardClass h);

// Continuous phase-type distribution: absorption time of a Markov chain
// with initial probability row vector alpha and transient generator S.
// The exit-rate vector is mu = -S*1.  Immutable after construction; all
// methods are const and thread-safe.
class PhaseTypeDist {
 public:
  // Validates: dimensions agree, alpha >= 0 with sum 1, S has nonnegative
  // off-diagonal / negative diagonal / nonpositive row sums, S invertible.
  PhaseTypeDist(Eigen::RowVectorXd alpha, Eigen::MatrixXd S,
                HazardClass hazard = HazardClass::unknown);

  int num_phases() const { return static_cast<int>(alpha_.size()); }
  const Eigen::RowVectorXd& alpha() const { return alpha_; }
  const Eigen::MatrixXd& S() const { return S_; }
  const Eigen::VectorXd& exit_rates() const { return mu_; }

  HazardClass hazard_class() const { return hazard_; }
  bool is_dhr() const {
    return hazard_ == HazardClass::decreasing ||
           hazard_ == HazardClass::constant;
  }
  bool is_ihr() const {
    return hazard_ == HazardClass::increasing ||
           hazard_ == HazardClass::constant;
  }

  double mean() const { return mean_; }
  double second_moment() const { return second_; }
  // Squared coefficient of variation, E[X^2]/E[X]^2 - 1.
  double scv() const { return second_ / (mean_ * mean_) - 1.0; }

  // Laplace-Stieltjes transform E[exp(-s X)] = alpha (sI - S)^{-1} mu for
  // s >= 0; equals 1 at s = 0.
  double laplace(double s) const;

  // E[min(X, Exp(r))] = -alpha (S - rI)^{-1} 1 for r >= 0; equals mean()
  // at r = 0 and (1 - laplace(r))/r otherwise.
  double exp_min_mean(double r) const;

  // Stationary phase distribution beta of the never-idle phase process
  // S + mu*alpha: solves beta (S + mu alpha) = 0 with beta 1 = 1.
  // Satisfies beta mu = 1/mean.
  Eigen::RowVectorXd busy_phase_vector() const;

 private:
  Eigen::RowVectorXd alpha_;
  Eigen::MatrixXd S_;
  Eigen::VectorXd mu_;
  HazardClass hazard_;
  double mean_ = 0;
  double second_ = 0;
};

// Two-moment hyperexponential fit.  Given scv >= 1 and the fraction
// f in (0,1) of the total work contributed by phase-1 jobs, produces the
// two-phase mixture with mean 1, the requested scv, and alpha_1 = mu_1 f:
//   mu_1 = (scv + (4f-1) + sqrt((scv-1)(scv-1+8 f fbar))) / (2 f (scv+1))
//   mu_2 = (scv + (4fbar-1) - sqrt((scv-1)(scv-1+8 f fbar))) / (2 fbar (scv+1))
// with fbar = 1 - f.  scv = 1 yields mu_1 = mu_2 = 1 (an exponential).
struct HyperExpSpec {
  double scv = 1.0;
  double f = 0.5;
};

PhaseTypeDist fit_hyperexp(const HyperExpSpec& spec);
PhaseTypeDist fit_hyperexp(double scv, double f);

// Rate-1 exponential (mean 1, scv 1).
PhaseTypeDist exponential();

// Erlang distribution with k stages of rate k (mean 1, scv 1/k).
PhaseTypeDist erlang(int k);

// Sum of independent exponentials with the given rates (mean = sum 1/rate).
PhaseTypeDist hypoexp(std::span<const double> rates);

// Explicit mixture of exponentials: with probability prob[i] the job is
// exponential with rate rates[i].
PhaseTypeDist hyperexp(std::span<const double> prob,
                       std::span<const double> rates);

}  // namespace stealshare
