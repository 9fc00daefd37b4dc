#include "stealshare/serialize.hpp"

#include <charconv>
#include <system_error>

#include "stealshare/error.hpp"

namespace stealshare {

namespace {

using nlohmann::json;

json from_row(const Eigen::RowVectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json from_matrix(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(from_row(m.row(i)));
  return rows;
}

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    fail(ErrorKind::parse_error,
         std::string("descriptor is missing \"") + key + "\"");
  }
  return *it;
}

double num(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number()) {
    fail(ErrorKind::parse_error, std::string("\"") + key + "\" must be a number");
  }
  return v.get<double>();
}

std::vector<double> num_list(const json& v, const char* key) {
  if (!v.is_array() || v.empty()) {
    fail(ErrorKind::parse_error,
         std::string("\"") + key + "\" must be a nonempty array of numbers");
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) {
      fail(ErrorKind::parse_error,
           std::string("\"") + key + "\" must contain only numbers");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

json descriptor_to_json(const DistDescriptor& d) {
  json j;
  j["kind"] = to_string(d.kind);
  switch (d.kind) {
    case DistDescriptor::Kind::hyperexp:
      j["scv"] = d.scv;
      j["f"] = d.f;
      break;
    case DistDescriptor::Kind::erlang:
      j["k"] = d.k;
      break;
    case DistDescriptor::Kind::hypoexp:
      j["rates"] = d.rates;
      break;
    case DistDescriptor::Kind::ph:
      j["alpha"] = d.alpha;
      j["S"] = d.S;
      break;
  }
  return j;
}

DistDescriptor descriptor_from_json(const json& j) {
  if (!j.is_object()) {
    fail(ErrorKind::parse_error, "descriptor must be a JSON object");
  }
  const json& kind = field(j, "kind");
  if (!kind.is_string()) {
    fail(ErrorKind::parse_error, "\"kind\" must be a string");
  }
  const std::string name = kind.get<std::string>();

  DistDescriptor d;
  if (name == "hyperexp") {
    d.kind = DistDescriptor::Kind::hyperexp;
    d.scv = num(j, "scv");
    d.f = j.contains("f") ? num(j, "f") : 0.5;
  } else if (name == "erlang") {
    d.kind = DistDescriptor::Kind::erlang;
    const json& k = field(j, "k");
    if (!k.is_number_integer()) {
      fail(ErrorKind::parse_error, "\"k\" must be an integer");
    }
    d.k = k.get<int>();
  } else if (name == "hypoexp") {
    d.kind = DistDescriptor::Kind::hypoexp;
    d.rates = num_list(field(j, "rates"), "rates");
  } else if (name == "ph") {
    d.kind = DistDescriptor::Kind::ph;
    d.alpha = num_list(field(j, "alpha"), "alpha");
    const json& S = field(j, "S");
    if (!S.is_array() || S.empty()) {
      fail(ErrorKind::parse_error, "\"S\" must be a nonempty array of rows");
    }
    for (const auto& row : S) d.S.push_back(num_list(row, "S"));
  } else {
    fail(ErrorKind::parse_error,
         "unknown descriptor kind \"" + name +
             "\" (expected hyperexp, erlang, hypoexp or ph)");
  }
  return d;
}

json dist_to_json(const DistDescriptor& d) {
  const PhaseTypeDist dist = d.build();
  json j;
  j["descriptor"] = descriptor_to_json(d);
  j["label"] = d.label();
  j["num_phases"] = dist.num_phases();
  j["alpha"] = from_row(dist.alpha());
  j["S"] = from_matrix(dist.S());
  j["exit_rates"] = from_row(dist.exit_rates().transpose());
  j["mean"] = dist.mean();
  j["scv"] = dist.scv();
  j["hazard_class"] = to_string(dist.hazard_class());
  return j;
}

json to_json(const QbdSolution& sol) {
  json j;
  j["lambda"] = sol.lambda();
  j["r"] = sol.r();
  j["lambda0"] = sol.lambda0();
  j["pi0"] = sol.pi0();
  j["pi1"] = from_row(sol.pi1());
  j["mean_queue_length"] = sol.mean_queue_length();
  j["mean_response"] = sol.mean_response();
  json tails = json::array();
  for (int k = 1; k <= 8; ++k) tails.push_back(sol.tail_prob(k));
  j["tail_prob"] = tails;  // P[len >= k], k = 1..8
  j["G"] = from_matrix(sol.G());
  j["R"] = from_matrix(sol.R());
  j["R1"] = from_row(sol.R1());
  const QbdDiagnostics& d = sol.diagnostics();
  j["diagnostics"] = {{"g_iterations", d.g_iterations},
                      {"g_used_fallback", d.g_used_fallback},
                      {"g_residual", d.g_residual},
                      {"r_residual", d.r_residual},
                      {"coupling_residual", d.coupling_residual},
                      {"spectral_radius_R", d.spectral_radius_R},
                      {"lambda0_consistency", lambda0_consistency(sol)}};
  return j;
}

json to_json(const ComparisonVerdict& v) {
  json share;
  switch (v.r_share.kind) {
    case ShareRate::Kind::finite:
      share = {{"kind", "finite"}, {"value", v.r_share.value}};
      break;
    case ShareRate::Kind::unbounded:
      share = {{"kind", "unbounded"}, {"value", nullptr}};
      break;
    case ShareRate::Kind::not_computed:
      share = {{"kind", "not_computed"}, {"value", nullptr}};
      break;
  }
  return {{"winner", to_string(v.winner)},
          {"lambda", v.lambda},
          {"r_overall", v.r_overall},
          {"lhs", v.lhs},
          {"rhs", v.rhs},
          {"r_steal", v.r_steal},
          {"r_share", share}};
}

json to_json(const BoundaryCurve& curve) {
  json samples = json::array();
  for (const BoundarySample& s : curve.samples) {
    samples.push_back({{"r_overall", s.r_overall},
                       {"lambda_star", s.lambda_star},
                       {"iterations", s.iterations},
                       {"residual", s.residual}});
  }
  return {{"dist", descriptor_to_json(curve.dist)},
          {"tol", curve.tol},
          {"monotonicity_violations", curve.monotonicity_violations},
          {"samples", samples}};
}

json to_json(const SimReport& report) {
  json runs = json::array();
  for (const RunResult& r : report.runs) {
    runs.push_back({{"run", r.run},
                    {"mean_response", r.mean_response},
                    {"jobs_completed", r.jobs_completed},
                    {"probe_rate", r.probe_rate},
                    {"transfer_rate", r.transfer_rate},
                    {"mean_queue_length", r.mean_queue_length},
                    {"frac_len_ge", r.frac_len_ge},
                    {"littles_residual", r.littles_residual}});
  }
  return {{"mean_response", report.mean_response},
          {"ci_halfwidth", report.ci_halfwidth},
          {"per_run_means", report.per_run_means},
          {"observed_overall_probe_rate", report.observed_overall_probe_rate},
          {"mean_queue_length", report.mean_queue_length},
          {"transfer_count_rate", report.transfer_count_rate},
          {"frac_len_ge", report.frac_len_ge},
          {"littles_law_residual", report.littles_law_residual},
          {"num_runs", report.runs.size()},
          {"seed", report.seed},
          {"runs", runs}};
}

json to_json(std::span<const BoundReport> bounds) {
  json out = json::array();
  for (const BoundReport& b : bounds) {
    json e;
    e["kind"] = to_string(b.kind);
    e["r_overall"] = b.r_overall ? json(*b.r_overall) : json(nullptr);
    e["value"] = b.value;
    e["applicability"] = b.applicability;
    out.push_back(e);
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) {
    fail(ErrorKind::numeric_failure, "double formatting failed");
  }
  return std::string(buf, ptr);
}

void write_level_csv(std::ostream& os, const QbdSolution& sol, int max_level) {
  os << "level,prob,tail_ge_level\n";
  for (int l = 0; l <= max_level; ++l) {
    const double prob = l == 0 ? sol.pi0() : sol.pi_level(l).sum();
    os << l << ',' << format_double(prob) << ','
       << format_double(sol.tail_prob(l)) << '\n';
  }
}

void write_boundary_csv(std::ostream& os, const BoundaryCurve& curve) {
  os << "r_overall,lambda_star,iterations,residual\n";
  for (const BoundarySample& s : curve.samples) {
    os << format_double(s.r_overall) << ',' << format_double(s.lambda_star)
       << ',' << s.iterations << ',' << format_double(s.residual) << '\n';
  }
}

void write_sim_runs_csv(std::ostream& os, const SimReport& report) {
  os << "run,mean_response,jobs_completed,probe_rate,transfer_rate,"
        "mean_queue_length";
  for (int k = 1; k <= kSimTailDepth; ++k) os << ",frac_ge_" << k;
  os << ",littles_residual\n";
  for (const RunResult& r : report.runs) {
    os << r.run << ',' << format_double(r.mean_response) << ','
       << r.jobs_completed << ',' << format_double(r.probe_rate) << ','
       << format_double(r.transfer_rate) << ','
       << format_double(r.mean_queue_length);
    for (double f : r.frac_len_ge) os << ',' << format_double(f);
    os << ',' << format_double(r.littles_residual) << '\n';
  }
}

}  // namespace stealshare
