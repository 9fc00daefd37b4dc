#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stealshare/dist_descriptor.hpp"
#include "stealshare/phase_type.hpp"

namespace stealshare {

inline constexpr double kBoundsBracketLo = 1e-9;
inline constexpr double kBoundsBracketHi = 1.0 - 1e-9;
inline constexpr double kBoundsRootTol = 1e-10;

// Positive root L(x) of lambda^2 x + lambda - 1 = 0, i.e.
// (sqrt(1+4x) - 1) / (2x); L(0) = 1.  Decreasing in x, L(1) = 0.618034.
double bound_L(double x);

// Distribution-free load threshold: sharing is the better policy whenever
// lambda < max(1, sqrt(r(r+4)) - r) / 2 at budget r = r_overall.
double general_sharing_bound(double r_overall);

// Exact boundary for exponential job sizes:
// (sqrt((r+1)(r+5)) - (r+1)) / 2 at budget r = r_overall.
double exp_boundary(double r_overall);

// For decreasing-hazard-rate job sizes, stealing is the better policy for
// all lambda > L(E[min(X, Exp(r_overall))]).  Requires dist.is_dhr().
double dhr_stealing_bound(const PhaseTypeDist& dist, double r_overall);

// For increasing-hazard-rate job sizes, sharing is the better policy for
// all lambda < L(E[min(X, Exp(r_overall))]).  Requires dist.is_ihr().
double ihr_sharing_bound(const PhaseTypeDist& dist, double r_overall);

// Distribution-free version of the IHR sharing bound: L((1 - e^-r)/r).
// IHR with mean 1 implies E[min(X, Exp(r))] <= (1 - e^-r)/r (the
// deterministic extreme), and L is decreasing, so this sits at or below
// every distribution-specific IHR sharing bound.
double general_ihr_sharing_bound(double r_overall);

// Vanishing-budget (r_overall -> 0) boundary loads.  Each returns the
// unique root in (0,1) of lambda g(lambda) + lambda - 1 = 0 where g is the
// job-size Laplace transform; sharing wins below the root, stealing above.
double small_r_nu();                                 // limit of the Erlang family: root of lambda/(1-lambda) = e^lambda
double small_r_erlang(int k);                        // root of lambda/(1-lambda) = (1+lambda/k)^k
double small_r_hypoexp(std::span<const double> rates);  // rates with sum 1/rate_i = 1
double small_r_hyperexp(std::span<const double> prob,
                        std::span<const double> rates);  // mixture with mean 1
double small_r_boundary(const PhaseTypeDist& dist);  // generic, via laplace()

// P[queue length <= 1] in a plain M/G/1 queue: (1 - lambda)/g(lambda).
// Upper-bounded by (1-lambda) e^lambda (mg1_pi_le1_bound), approached in
// the deterministic job-size limit where g(lambda) -> e^-lambda.
double mg1_pi_le1(const PhaseTypeDist& dist, double lambda);
double mg1_pi_le1_bound(double lambda);

enum class BoundKind {
  general_sharing,
  exp_boundary,
  dhr_stealing,
  ihr_sharing,
  general_ihr_sharing,
  small_r_nu,
  small_r_erlang,
  small_r_hypoexp,
  small_r_hyperexp,
};

const char* to_string(BoundKind kind);

struct BoundReport {
  BoundKind kind;
  // Set for budget-dependent bounds; empty for the small-budget roots.
  std::optional<double> r_overall;
  double value = 0;
  std::string applicability;
};

// All bounds that apply to the given distribution over a grid of budgets.
// With no descriptor only the distribution-free entries are produced.
std::vector<BoundReport> report_bounds(
    const std::optional<DistDescriptor>& dist,
    std::span<const double> r_grid);

}  // namespace stealshare
