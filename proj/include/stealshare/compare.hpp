#pragma once

#include <limits>
#include <span>
#include <vector>

#include "stealshare/dist_descriptor.hpp"
#include "stealshare/phase_type.hpp"

namespace stealshare {

// Verdicts compare the two probe policies at equal overall probe rate
// r_overall (probes per time unit per server, in the large-system limit).
enum class Winner { sharing, stealing, tie };

const char* to_string(Winner w);

inline constexpr double kTieTol = 1e-10;
inline constexpr double kRootTol = 1e-8;  // default bisection tolerance

// Probe rate a sharing system needs to keep up with a stealing system; the
// matching equation r * P[len >= 2](r) = r_overall has no solution once
// r_overall >= lambda^2/(1-lambda) (sharing cannot reach that budget even
// with an arbitrarily large probe rate).
struct ShareRate {
  enum class Kind { finite, unbounded, not_computed };
  Kind kind = Kind::not_computed;
  double value = std::numeric_limits<double>::quiet_NaN();
};

struct ComparisonVerdict {
  Winner winner = Winner::tie;
  double lambda = 0;
  double r_overall = 0;
  double lhs = 0;      // 1 - lambda
  double rhs = 0;      // P[len >= 2] at the stealing-equivalent rate
  double r_steal = 0;  // r_overall / (1 - lambda)
  ShareRate r_share;   // filled by match_r_share (CLI does this)
};

// Decides which policy yields the lower mean response time at probe budget
// r_overall: sharing wins iff 1 - lambda > P[len >= 2] evaluated at
// r = r_overall / (1 - lambda).  One QBD solve; |lhs - rhs| <= kTieTol is
// reported as a tie.  r_share is left not_computed.
ComparisonVerdict decide(const PhaseTypeDist& dist, double lambda,
                         double r_overall);

struct RootDiagnostics {
  double value = 0;
  int iterations = 0;
  double residual = 0;  // boundary-function value at the returned root
};

// Critical load: sharing is better for lambda < lambda_star(r_overall),
// stealing for larger lambda.  Bisection on lambda (the boundary function
// is increasing in lambda).
RootDiagnostics lambda_star_detail(const PhaseTypeDist& dist,
                                   double r_overall, double tol = kRootTol);
double lambda_star(const PhaseTypeDist& dist, double r_overall,
                   double tol = kRootTol);

// Critical probe budget: sharing is better for r_overall > r_star(lambda),
// stealing below (sharing needs a large enough budget to win at high
// load).  Returns 0 when sharing wins at every budget; always less than
// lambda^2/(1-lambda).
double r_star(const PhaseTypeDist& dist, double lambda, double tol = kRootTol);

// Sharing probe rate with the same overall budget as stealing: the unique
// r with r * P[len >= 2](r) = r_overall, or unbounded when r_overall >=
// lambda^2/(1-lambda).
ShareRate match_r_share(const PhaseTypeDist& dist, double lambda,
                        double r_overall, double tol = kRootTol);

struct BoundarySample {
  double r_overall = 0;
  double lambda_star = 0;
  int iterations = 0;
  double residual = 0;
};

struct BoundaryCurve {
  DistDescriptor dist;
  double tol = kRootTol;
  std::vector<BoundarySample> samples;
  // Count of adjacent sample pairs where lambda_star decreases by more than
  // 1e-8 as r_overall grows (expected 0; reported rather than fatal).
  int monotonicity_violations = 0;
};

// lambda_star over a grid of r_overall values.  Per-point failures are
// collected and re-thrown as one error listing the failing indices.
BoundaryCurve boundary_sweep(const DistDescriptor& dist,
                             std::span<const double> r_grid,
                             double tol = kRootTol);

}  // namespace stealshare
