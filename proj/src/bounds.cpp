#include "stealshare/bounds.hpp"

#include <cmath>
#include <string>

#include "stealshare/detail/bisect.hpp"
#include "stealshare/error.hpp"

namespace stealshare {

namespace {

void check_budget(double r_overall) {
  if (!std::isfinite(r_overall) || r_overall < 0) {
    fail(ErrorKind::invalid_parameter, "r_overall must be finite and >= 0");
  }
}

// Root in (0,1) of lambda * g(lambda) + lambda - 1 = 0 for a job-size
// Laplace transform g; lambda * g(lambda) is increasing on (0,1) for the
// families used here, so the sign change is unique.
template <class Laplace>
double small_r_root(Laplace&& g) {
  auto h = [&](double lambda) { return lambda * g(lambda) + lambda - 1.0; };
  return detail::bisect(h, kBoundsBracketLo, kBoundsBracketHi, kBoundsRootTol)
      .root;
}

void require_mean_one(double mean, const char* what) {
  if (std::abs(mean - 1.0) > 1e-8) {
    fail(ErrorKind::invalid_parameter,
         std::string(what) + " requires a mean-1 distribution (mean = " +
             std::to_string(mean) + ")");
  }
}

}  // namespace

double bound_L(double x) {
  if (!std::isfinite(x) || x < 0) {
    fail(ErrorKind::invalid_parameter, "L(x) needs finite x >= 0");
  }
  if (x == 0) return 1.0;
  // (sqrt(1+4x) - 1) / (2x), written to avoid cancellation for small x.
  return 2.0 / (std::sqrt(1.0 + 4.0 * x) + 1.0);
}

double general_sharing_bound(double r_overall) {
  check_budget(r_overall);
  const double r = r_overall;
  return std::max(1.0, std::sqrt(r * (r + 4.0)) - r) / 2.0;
}

double exp_boundary(double r_overall) {
  check_budget(r_overall);
  const double r = r_overall;
  return (std::sqrt((r + 1.0) * (r + 5.0)) - (r + 1.0)) / 2.0;
}

double dhr_stealing_bound(const PhaseTypeDist& dist, double r_overall) {
  check_budget(r_overall);
  if (!dist.is_dhr()) {
    fail(ErrorKind::applicability,
         "stealing bound needs a decreasing-hazard-rate distribution "
         "(hazard class is " +
             std::string(to_string(dist.hazard_class())) + ")");
  }
  require_mean_one(dist.mean(), "dhr_stealing_bound");
  return bound_L(dist.exp_min_mean(r_overall));
}

double ihr_sharing_bound(const PhaseTypeDist& dist, double r_overall) {
  check_budget(r_overall);
  if (!dist.is_ihr()) {
    fail(ErrorKind::applicability,
         "sharing bound needs an increasing-hazard-rate distribution "
         "(hazard class is " +
             std::string(to_string(dist.hazard_class())) + ")");
  }
  require_mean_one(dist.mean(), "ihr_sharing_bound");
  return bound_L(dist.exp_min_mean(r_overall));
}

double general_ihr_sharing_bound(double r_overall) {
  check_budget(r_overall);
  const double r = r_overall;
  const double x = r == 0 ? 1.0 : -std::expm1(-r) / r;  // (1 - e^-r)/r
  return bound_L(x);
}

double small_r_nu() {
  return small_r_root([](double lambda) { return std::exp(-lambda); });
  // lambda e^{-lambda} + lambda - 1 = 0  <=>  lambda/(1-lambda) = e^lambda.
}

double small_r_erlang(int k) {
  if (k < 1) {
    fail(ErrorKind::invalid_parameter, "erlang needs at least one stage");
  }
  const double kk = k;
  return small_r_root(
      [kk](double lambda) { return std::pow(1.0 + lambda / kk, -kk); });
}

double small_r_hypoexp(std::span<const double> rates) {
  if (rates.empty()) {
    fail(ErrorKind::invalid_parameter, "hypoexp needs at least one stage");
  }
  double mean = 0;
  for (double rate : rates) {
    if (!(rate > 0)) {
      fail(ErrorKind::invalid_parameter, "hypoexp rates must be positive");
    }
    mean += 1.0 / rate;
  }
  require_mean_one(mean, "small_r_hypoexp");
  return small_r_root([rates](double lambda) {
    double g = 1.0;
    for (double rate : rates) g *= rate / (lambda + rate);
    return g;
  });
}

double small_r_hyperexp(std::span<const double> prob,
                        std::span<const double> rates) {
  if (prob.empty() || prob.size() != rates.size()) {
    fail(ErrorKind::invalid_parameter,
         "hyperexp needs matching, nonempty prob/rate lists");
  }
  double mean = 0, total = 0;
  for (size_t i = 0; i < prob.size(); ++i) {
    if (!(prob[i] >= 0) || !(rates[i] > 0)) {
      fail(ErrorKind::invalid_parameter,
           "hyperexp probabilities must be >= 0 and rates > 0");
    }
    mean += prob[i] / rates[i];
    total += prob[i];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    fail(ErrorKind::invalid_parameter, "hyperexp probabilities must sum to 1");
  }
  require_mean_one(mean, "small_r_hyperexp");
  return small_r_root([prob, rates](double lambda) {
    double g = 0;
    for (size_t i = 0; i < prob.size(); ++i) {
      g += prob[i] * rates[i] / (lambda + rates[i]);
    }
    return g;
  });
}

double small_r_boundary(const PhaseTypeDist& dist) {
  require_mean_one(dist.mean(), "small_r_boundary");
  return small_r_root([&dist](double lambda) { return dist.laplace(lambda); });
}

double mg1_pi_le1(const PhaseTypeDist& dist, double lambda) {
  if (!(lambda > 0) || !(lambda < 1)) {
    fail(ErrorKind::invalid_parameter, "mg1_pi_le1 needs lambda in (0, 1)");
  }
  require_mean_one(dist.mean(), "mg1_pi_le1");
  return (1.0 - lambda) / dist.laplace(lambda);
}

double mg1_pi_le1_bound(double lambda) {
  if (!(lambda > 0) || !(lambda < 1)) {
    fail(ErrorKind::invalid_parameter,
         "mg1_pi_le1_bound needs lambda in (0, 1)");
  }
  return (1.0 - lambda) * std::exp(lambda);
}

const char* to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::general_sharing: return "general_sharing";
    case BoundKind::exp_boundary: return "exp_boundary";
    case BoundKind::dhr_stealing: return "dhr_stealing";
    case BoundKind::ihr_sharing: return "ihr_sharing";
    case BoundKind::general_ihr_sharing: return "general_ihr_sharing";
    case BoundKind::small_r_nu: return "small_r_nu";
    case BoundKind::small_r_erlang: return "small_r_erlang";
    case BoundKind::small_r_hypoexp: return "small_r_hypoexp";
    case BoundKind::small_r_hyperexp: return "small_r_hyperexp";
  }
  return "?";
}

std::vector<BoundReport> report_bounds(
    const std::optional<DistDescriptor>& dist,
    std::span<const double> r_grid) {
  std::vector<BoundReport> out;
  std::optional<PhaseTypeDist> built;
  if (dist) built = dist->build();

  for (const double r : r_grid) {
    out.push_back({BoundKind::general_sharing, r, general_sharing_bound(r),
                   "any job-size distribution: sharing wins below this load"});
    out.push_back({BoundKind::exp_boundary, r, exp_boundary(r),
                   "exponential job sizes: exact sharing/stealing boundary"});
    out.push_back({BoundKind::general_ihr_sharing, r,
                   general_ihr_sharing_bound(r),
                   "any increasing-hazard-rate job size: sharing wins below "
                   "this load"});
    if (built && built->is_dhr()) {
      out.push_back({BoundKind::dhr_stealing, r,
                     dhr_stealing_bound(*built, r),
                     "decreasing hazard rate: stealing wins above this load"});
    }
    if (built && built->is_ihr()) {
      out.push_back({BoundKind::ihr_sharing, r, ihr_sharing_bound(*built, r),
                     "increasing hazard rate: sharing wins below this load"});
    }
  }

  out.push_back({BoundKind::small_r_nu, std::nullopt, small_r_nu(),
                 "vanishing budget, Erlang stage count -> infinity: "
                 "boundary load limit"});
  if (dist) {
    switch (dist->kind) {
      case DistDescriptor::Kind::erlang:
        out.push_back({BoundKind::small_r_erlang, std::nullopt,
                       small_r_erlang(dist->k),
                       "vanishing budget: exact boundary load"});
        break;
      case DistDescriptor::Kind::hypoexp:
        out.push_back({BoundKind::small_r_hypoexp, std::nullopt,
                       small_r_hypoexp(dist->rates),
                       "vanishing budget: exact boundary load"});
        break;
      case DistDescriptor::Kind::hyperexp: {
        std::vector<double> p{built->alpha()(0), built->alpha()(1)};
        std::vector<double> mu{-built->S()(0, 0), -built->S()(1, 1)};
        out.push_back({BoundKind::small_r_hyperexp, std::nullopt,
                       small_r_hyperexp(p, mu),
                       "vanishing budget: exact boundary load"});
        break;
      }
      case DistDescriptor::Kind::ph:
        break;  // no structural small-budget formula; rely on lambda_star
    }
  }
  return out;
}

}  // namespace stealshare
