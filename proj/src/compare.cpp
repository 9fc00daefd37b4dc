#include "stealshare/compare.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stealshare/detail/bisect.hpp"
#include "stealshare/error.hpp"
#include "stealshare/qbd.hpp"

namespace stealshare {

namespace {

// P[len >= 2] in the fixed-point queue when stealing runs at removal-rate
// budget r_overall, i.e. at r = r_overall / (1 - lambda).  The clamp keeps
// bracket endpoints chosen to satisfy r <= kRMax from rounding one ulp
// outside the solver domain.
double tail2_at_budget(const PhaseTypeDist& dist, double lambda,
                       double r_overall) {
  const double r = std::min(r_overall / (1.0 - lambda), kRMax);
  return solve(dist, lambda, r).tail_prob(2);
}

void check_budget(double r_overall) {
  if (!std::isfinite(r_overall) || r_overall < 0) {
    fail(ErrorKind::invalid_parameter, "r_overall must be finite and >= 0");
  }
}

}  // namespace

const char* to_string(Winner w) {
  switch (w) {
    case Winner::sharing: return "sharing";
    case Winner::stealing: return "stealing";
    case Winner::tie: return "tie";
  }
  return "?";
}

ComparisonVerdict decide(const PhaseTypeDist& dist, double lambda,
                         double r_overall) {
  check_budget(r_overall);
  ComparisonVerdict v;
  v.lambda = lambda;
  v.r_overall = r_overall;
  v.r_steal = r_overall / (1.0 - lambda);
  v.lhs = 1.0 - lambda;
  v.rhs = solve(dist, lambda, v.r_steal).tail_prob(2);
  if (std::abs(v.lhs - v.rhs) <= kTieTol) {
    v.winner = Winner::tie;
  } else {
    v.winner = v.lhs > v.rhs ? Winner::sharing : Winner::stealing;
  }
  return v;
}

RootDiagnostics lambda_star_detail(const PhaseTypeDist& dist,
                                   double r_overall, double tol) {
  check_budget(r_overall);
  if (!(tol > 0)) {
    fail(ErrorKind::invalid_parameter, "tolerance must be positive");
  }
  // Boundary function h(lambda) = P[len >= 2] - (1 - lambda), increasing in
  // lambda; sharing wins where h < 0.  Cap the upper end so the stealing
  // rate r_overall/(1-lambda) stays inside the solver domain.
  const double lo = kLambdaMin;
  const double hi = std::min(kLambdaMax, 1.0 - r_overall / kRMax);
  auto h = [&](double lambda) {
    return tail2_at_budget(dist, lambda, r_overall) - (1.0 - lambda);
  };
  const auto res = detail::bisect(h, lo, hi, tol);
  return {res.root, res.iterations, res.f_at_root};
}

double lambda_star(const PhaseTypeDist& dist, double r_overall, double tol) {
  return lambda_star_detail(dist, r_overall, tol).value;
}

double r_star(const PhaseTypeDist& dist, double lambda, double tol) {
  if (!(tol > 0)) {
    fail(ErrorKind::invalid_parameter, "tolerance must be positive");
  }
  // g(r_overall) = P[len >= 2](r_overall/(1-lambda)) - (1-lambda) is
  // decreasing in the budget; sharing never wins when it is negative at 0,
  // and is always positive strictly below lambda^2/(1-lambda).
  auto g = [&](double ro) {
    return tail2_at_budget(dist, lambda, ro) - (1.0 - lambda);
  };
  if (g(0.0) <= 0.0) return 0.0;
  const double hi = lambda * lambda / (1.0 - lambda);
  if (g(hi) >= 0.0) {
    // Mathematically impossible (the switch happens strictly inside); keep
    // a defensive error for pathological numerics.
    fail(ErrorKind::bracket_failure,
         "no sharing/stealing switch found below lambda^2/(1-lambda)");
  }
  return detail::bisect(g, 0.0, hi, tol).root;
}

ShareRate match_r_share(const PhaseTypeDist& dist, double lambda,
                        double r_overall, double tol) {
  check_budget(r_overall);
  if (!(tol > 0)) {
    fail(ErrorKind::invalid_parameter, "tolerance must be positive");
  }
  if (r_overall == 0.0) return {ShareRate::Kind::finite, 0.0};
  // r * P[len >= 2](r) increases from 0 to lambda^2/(1-lambda); budgets at
  // or above that limit cannot be matched by any finite sharing rate.
  const double limit = lambda * lambda / (1.0 - lambda);
  if (r_overall >= limit) return {ShareRate::Kind::unbounded, 0.0};
  auto f = [&](double r) {
    return r * solve(dist, lambda, r).tail_prob(2) - r_overall;
  };
  double hi = std::max(1.0, 2.0 * r_overall);
  while (f(hi) < 0.0) {
    hi *= 2.0;
    if (hi > kRMax) {
      // The matching rate exceeds the supported probe-rate domain; the
      // budget is within ~1e-6 of the unreachable limit.
      return {ShareRate::Kind::unbounded, 0.0};
    }
  }
  return {ShareRate::Kind::finite, detail::bisect(f, 0.0, hi, tol).root};
}

BoundaryCurve boundary_sweep(const DistDescriptor& descriptor,
                             std::span<const double> r_grid, double tol) {
  if (r_grid.empty()) {
    fail(ErrorKind::invalid_parameter, "boundary sweep needs a nonempty grid");
  }
  const PhaseTypeDist dist = descriptor.build();
  BoundaryCurve curve;
  curve.dist = descriptor;
  curve.tol = tol;
  curve.samples.reserve(r_grid.size());
  std::string failures;
  for (size_t i = 0; i < r_grid.size(); ++i) {
    try {
      const auto root = lambda_star_detail(dist, r_grid[i], tol);
      curve.samples.push_back(
          {r_grid[i], root.value, root.iterations, root.residual});
    } catch (const Error& e) {
      failures += (failures.empty() ? "" : ", ") + std::to_string(i) + " (" +
                  e.what() + ")";
    }
  }
  if (!failures.empty()) {
    fail(ErrorKind::numeric_failure,
         "boundary sweep failed at grid indices: " + failures);
  }
  for (size_t i = 1; i < curve.samples.size(); ++i) {
    if (curve.samples[i].r_overall > curve.samples[i - 1].r_overall &&
        curve.samples[i].lambda_star <
            curve.samples[i - 1].lambda_star - 1e-8) {
      ++curve.monotonicity_violations;
    }
  }
  return curve;
}

}  // namespace stealshare
