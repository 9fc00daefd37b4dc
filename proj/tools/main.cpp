#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stealshare/bounds.hpp"
#include "stealshare/compare.hpp"
#include "stealshare/error.hpp"
#include "stealshare/qbd.hpp"
#include "stealshare/serialize.hpp"
#include "stealshare/sim.hpp"
#include "stealshare/version.hpp"

using nlohmann::json;
using namespace stealshare;

namespace {

DistDescriptor load_dist(const std::string& text) {
  try {
    if (!text.empty() && text.front() == '{') {
      return descriptor_from_json(json::parse(text));
    }
    if (!text.empty() && text.front() == '@') {
      const std::string path = text.substr(1);
      std::ifstream in(path);
      if (!in) fail(ErrorKind::io_error, "cannot open " + path);
      json j;
      in >> j;
      return descriptor_from_json(j);
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::parse_error, std::string("bad JSON descriptor: ") + e.what());
  }
  return DistDescriptor::parse(text);
}

// "start:stop:count", linear or logarithmic spacing.
std::vector<double> parse_grid(const std::string& text, bool log_spacing) {
  const auto piece = [&](size_t from, size_t to) {
    return text.substr(from, to - from);
  };
  const size_t c1 = text.find(':');
  const size_t c2 = c1 == std::string::npos ? c1 : text.find(':', c1 + 1);
  if (c2 == std::string::npos || text.find(':', c2 + 1) != std::string::npos) {
    fail(ErrorKind::parse_error, "grid must be start:stop:count");
  }
  const auto to_double = [](const std::string& s) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
      fail(ErrorKind::parse_error, "bad grid number \"" + s + "\"");
    }
    return v;
  };
  const double start = to_double(piece(0, c1));
  const double stop = to_double(piece(c1 + 1, c2));
  const std::string cnt = piece(c2 + 1, text.size());
  int count = 0;
  auto [p, ec] = std::from_chars(cnt.data(), cnt.data() + cnt.size(), count);
  if (ec != std::errc{} || p != cnt.data() + cnt.size() || count < 1) {
    fail(ErrorKind::parse_error, "grid count must be a positive integer");
  }
  if (log_spacing && (start <= 0 || stop <= 0)) {
    fail(ErrorKind::parse_error, "logarithmic grids need positive endpoints");
  }
  std::vector<double> grid(count);
  if (count == 1) {
    grid[0] = start;
    return grid;
  }
  for (int i = 0; i < count; ++i) {
    const double s = static_cast<double>(i) / (count - 1);
    grid[i] = log_spacing
                  ? start * std::exp(s * std::log(stop / start))
                  : start + s * (stop - start);
  }
  grid.back() = stop;
  return grid;
}

std::filesystem::path resolve_out(const std::string& out) {
  std::filesystem::path p(out);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("STEALSHARE_OUT_DIR")) {
      p = std::filesystem::path(dir) / p;
    }
  }
  return p;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  const auto path = resolve_out(out);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path);
  if (!f) fail(ErrorKind::io_error, "cannot write " + path.string());
  f << text;
}

json tolerances(std::optional<double> root_tol = std::nullopt) {
  json t{{"lambda_min", kLambdaMin},       {"lambda_max", kLambdaMax},
         {"r_max", kRMax},                 {"mean_one_tol", kMeanOneTol},
         {"g_iterate_tol", kGIterateTol},  {"g_residual_tol", kGResidualTol},
         {"tie_tol", kTieTol}};
  if (root_tol) t["root_tol"] = *root_tol;
  return t;
}

std::string wrap_json(const std::string& command, json invocation, json result,
                      json tol) {
  invocation["command"] = command;
  const json doc{{"tool", {{"name", kToolName}, {"version", kToolVersion}}},
                 {"invocation", std::move(invocation)},
                 {"tolerances", std::move(tol)},
                 {"result", std::move(result)}};
  return doc.dump(2) + "\n";
}

std::string csv_provenance(const std::string& command, const json& invocation,
                           const json& tol) {
  std::ostringstream os;
  os << "# tool=" << kToolName << " version=" << kToolVersion << "\n";
  os << "# command=" << command << "\n";
  for (const auto& [k, v] : invocation.items()) {
    os << "# " << k << "="
       << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
  }
  os << "# tolerances=" << tol.dump() << "\n";
  return os.str();
}

// Pinned mean-response references from an independent fluid-model
// integration of the same queue (hyperexponential rows assume the
// two-moment fit with f = 1/2).
struct ReferenceCase {
  double lambda, scv, r, mean_response;
};
constexpr ReferenceCase kReferenceCases[] = {
    {1.0 / 2, 0.2, 1.0 / 5, 1.5276},  {1.0 / 2, 0.2, 1, 1.3644},
    {1.0 / 2, 0.2, 5, 1.1514},        {3.0 / 4, 0.2, 1.0 / 5, 2.5451},
    {3.0 / 4, 0.2, 1, 2.0148},        {3.0 / 4, 0.2, 5, 1.4142},
    {7.0 / 8, 0.2, 1.0 / 5, 4.5552},  {7.0 / 8, 0.2, 1, 3.2503},
    {7.0 / 8, 0.2, 5, 1.8774},        {1.0 / 2, 5, 1.0 / 5, 3.2285},
    {1.0 / 2, 5, 1, 1.8847},          {1.0 / 2, 5, 5, 1.1795},
    {3.0 / 4, 5, 1.0 / 5, 8.1885},    {3.0 / 4, 5, 1, 4.6246},
    {3.0 / 4, 5, 5, 1.6517},          {7.0 / 8, 5, 1.0 / 5, 18.176117},
    {7.0 / 8, 5, 1, 10.5504},         {7.0 / 8, 5, 5, 3.1684},
    {1.0 / 2, 25, 1.0 / 5, 9.9397},   {1.0 / 2, 25, 1, 2.8406},
    {1.0 / 2, 25, 5, 1.1855},         {3.0 / 4, 25, 1.0 / 5, 31.5323},
    {3.0 / 4, 25, 1, 14.7129},        {7.0 / 8, 25, 1.0 / 5, 74.8468},
    {7.0 / 8, 25, 1, 40.5751},        {7.0 / 8, 25, 5, 6.9646},
    {3.0 / 4, 25, 5, 1.8058},
};

struct Options {
  std::string dist_text;
  double lambda = 0.5;
  double r = 1.0;
  double r_overall = 1.0;
  std::string strategy = "steal";
  int n_servers = 1000;
  double horizon = 5000;
  double warmup = 1.0 / 3.0;
  int runs = 20;
  std::uint64_t seed = 1;
  double tol = kRootTol;
  std::string out;
  std::string format = "json";
  std::string grid_text;
  bool log_grid = false;
  bool force = false;
  bool exp_only = false;
  int levels = 12;
  std::string rows = "all";
};

int run_analyze(const Options& o) {
  const DistDescriptor d = load_dist(o.dist_text);
  const QbdSolution sol = solve(d.build(), o.lambda, o.r);
  const json inv{{"dist", descriptor_to_json(d)},
                 {"lambda", o.lambda},
                 {"r", o.r},
                 {"format", o.format},
                 {"levels", o.levels}};
  if (o.format == "csv") {
    std::ostringstream os;
    os << csv_provenance("analyze", inv, tolerances());
    write_level_csv(os, sol, o.levels);
    emit(os.str(), o.out);
  } else {
    emit(wrap_json("analyze", inv, to_json(sol), tolerances()), o.out);
  }
  return 0;
}

int run_decide(const Options& o) {
  const DistDescriptor d = load_dist(o.dist_text);
  const PhaseTypeDist dist = d.build();
  ComparisonVerdict v = decide(dist, o.lambda, o.r_overall);
  v.r_share = match_r_share(dist, o.lambda, o.r_overall, o.tol);
  const json inv{{"dist", descriptor_to_json(d)},
                 {"lambda", o.lambda},
                 {"r_overall", o.r_overall}};
  emit(wrap_json("decide", inv, to_json(v), tolerances(o.tol)), o.out);
  return 0;
}

int run_boundary(const Options& o) {
  const DistDescriptor d = load_dist(o.dist_text);
  const auto grid = parse_grid(o.grid_text, o.log_grid);
  const BoundaryCurve curve = boundary_sweep(d, grid, o.tol);
  const json inv{{"dist", descriptor_to_json(d)},
                 {"r_grid", o.grid_text},
                 {"log", o.log_grid},
                 {"format", o.format}};
  if (o.format == "json") {
    emit(wrap_json("boundary", inv, to_json(curve), tolerances(o.tol)),
         o.out);
  } else {
    std::ostringstream os;
    os << csv_provenance("boundary", inv, tolerances(o.tol));
    write_boundary_csv(os, curve);
    emit(os.str(), o.out);
  }
  return 0;
}

int run_bounds(const Options& o) {
  std::optional<DistDescriptor> d;
  if (!o.exp_only) {
    if (o.dist_text.empty()) {
      fail(ErrorKind::invalid_parameter,
           "bounds needs --dist unless --exp-only is given");
    }
    d = load_dist(o.dist_text);
  }
  const auto grid = parse_grid(o.grid_text, o.log_grid);
  const auto reports = report_bounds(d, grid);
  json inv{{"r_grid", o.grid_text},
           {"log", o.log_grid},
           {"exp_only", o.exp_only},
           {"format", o.format}};
  if (d) inv["dist"] = descriptor_to_json(*d);
  if (o.format == "csv") {
    std::ostringstream os;
    os << csv_provenance("bounds", inv, tolerances());
    os << "kind,r_overall,value\n";
    for (const BoundReport& b : reports) {
      os << to_string(b.kind) << ','
         << (b.r_overall ? format_double(*b.r_overall) : std::string()) << ','
         << format_double(b.value) << '\n';
    }
    emit(os.str(), o.out);
  } else {
    emit(wrap_json("bounds", inv,
                   to_json(std::span<const BoundReport>(reports)),
                   tolerances()),
         o.out);
  }
  return 0;
}

int run_simulate(const Options& o) {
  const DistDescriptor d = load_dist(o.dist_text);
  const SimConfig cfg{
      .dist = d.build(),
      .lambda = o.lambda,
      .r = o.r,
      .strategy = o.strategy == "share" ? Strategy::share : Strategy::steal,
      .n_servers = o.n_servers,
      .horizon = o.horizon,
      .warmup_fraction = o.warmup,
      .runs = o.runs,
      .seed = o.seed,
      .force = o.force};
  const SimReport rep = simulate(cfg);
  const json inv{{"dist", descriptor_to_json(d)},
                 {"lambda", o.lambda},
                 {"r", o.r},
                 {"strategy", o.strategy},
                 {"n_servers", o.n_servers},
                 {"horizon", o.horizon},
                 {"warmup", o.warmup},
                 {"runs", o.runs},
                 {"seed", o.seed},
                 {"force", o.force},
                 {"format", o.format}};
  if (o.format == "csv") {
    std::ostringstream os;
    os << csv_provenance("simulate", inv, tolerances());
    write_sim_runs_csv(os, rep);
    emit(os.str(), o.out);
  } else {
    emit(wrap_json("simulate", inv, to_json(rep), tolerances()), o.out);
  }
  return 0;
}

int run_validate(const Options& o) {
  json rows = json::array();
  std::ostringstream csv;
  csv << "lambda,scv,r,reference,computed,abs_error,rel_error,within\n";
  bool all_ok = true;
  double max_rel = 0;
  for (const ReferenceCase& c : kReferenceCases) {
    const bool hyper = c.scv > 1.0;
    if (o.rows == "erlang" && hyper) continue;
    if (o.rows == "hyperexp" && !hyper) continue;
    const PhaseTypeDist dist =
        hyper ? fit_hyperexp(c.scv, 0.5) : erlang(5);
    const double computed = solve(dist, c.lambda, c.r).mean_response();
    const double abs_err = std::abs(computed - c.mean_response);
    const double rel_err = abs_err / c.mean_response;
    const double tol = hyper ? 1e-3 : 5e-4;
    const bool ok = abs_err <= tol;
    all_ok = all_ok && ok;
    max_rel = std::max(max_rel, rel_err);
    json row{{"lambda", c.lambda},       {"scv", c.scv},
             {"r", c.r},                 {"reference", c.mean_response},
             {"computed", computed},     {"abs_error", abs_err},
             {"rel_error", rel_err},     {"within", ok}};
    if (hyper) row["assumes_f_half"] = true;
    rows.push_back(std::move(row));
    csv << format_double(c.lambda) << ',' << format_double(c.scv) << ','
        << format_double(c.r) << ',' << format_double(c.mean_response) << ','
        << format_double(computed) << ',' << format_double(abs_err) << ','
        << format_double(rel_err) << ',' << (ok ? 1 : 0) << '\n';
  }
  const json inv{{"rows", o.rows}, {"format", o.format}};
  const json result{
      {"rows", rows},
      {"max_rel_error", max_rel},
      {"all_within", all_ok},
      {"note",
       "hyperexponential references assume the two-moment fit with f=1/2"}};
  if (o.format == "csv") {
    emit(csv_provenance("validate", inv, tolerances()) + csv.str(), o.out);
  } else {
    emit(wrap_json("validate", inv, result, tolerances()), o.out);
  }
  return all_ok ? 0 : 1;
}

int run_fit(const Options& o) {
  const DistDescriptor d = load_dist(o.dist_text);
  const json inv{{"dist", descriptor_to_json(d)}};
  emit(wrap_json("fit", inv, dist_to_json(d), tolerances()), o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Work stealing vs work sharing in large server farms: "
               "mean-field queue solver, policy comparison, bounds and "
               "discrete-event simulation"};
  app.require_subcommand(1);
  Options o;

  const auto add_out = [&](CLI::App* cmd,
                           bool with_format = true) -> CLI::Option* {
    cmd->add_option("--out", o.out, "Write output to this file (stdout if "
                    "omitted); relative paths honor STEALSHARE_OUT_DIR");
    if (!with_format) return nullptr;
    return cmd->add_option("--format", o.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
  };
  const auto add_dist = [&](CLI::App* cmd, bool required = true) {
    auto* opt = cmd->add_option(
        "--dist", o.dist_text,
        "exp | erlang:K | hyperexp:SCV[:F] | hypoexp:R1,R2,... | {json} | "
        "@file.json");
    if (required) opt->required();
  };

  auto* analyze = app.add_subcommand(
      "analyze", "Solve the mean-field queue at one (lambda, r) point");
  add_dist(analyze);
  analyze->add_option("--lambda", o.lambda, "Arrival rate (load)")->required();
  analyze->add_option("--r", o.r, "Probe rate while eligible")->required();
  analyze->add_option("--levels", o.levels,
                      "Queue-length levels in CSV output");
  add_out(analyze);

  auto* dec = app.add_subcommand(
      "decide", "Which policy wins at a given load and probe budget");
  add_dist(dec);
  dec->add_option("--lambda", o.lambda, "Arrival rate (load)")->required();
  dec->add_option("--r-overall", o.r_overall,
                  "Overall probe budget per server")->required();
  dec->add_option("--tol", o.tol, "Root tolerance for the matched share rate");
  add_out(dec, false);

  auto* boundary = app.add_subcommand(
      "boundary", "Critical load lambda* over a grid of probe budgets");
  add_dist(boundary);
  boundary->add_option("--r-grid", o.grid_text, "start:stop:count")
      ->required();
  boundary->add_flag("--log", o.log_grid, "Logarithmic grid spacing");
  boundary->add_option("--tol", o.tol, "Bisection tolerance");
  CLI::Option* boundary_fmt = add_out(boundary);

  auto* bounds = app.add_subcommand(
      "bounds", "Closed-form boundary bounds over a grid of probe budgets");
  add_dist(bounds, false);
  bounds->add_option("--r-grid", o.grid_text, "start:stop:count")->required();
  bounds->add_flag("--log", o.log_grid, "Logarithmic grid spacing");
  bounds->add_flag("--exp-only", o.exp_only,
                   "Distribution-free and exponential entries only");
  add_out(bounds);

  auto* sim = app.add_subcommand(
      "simulate", "Finite-system discrete-event simulation");
  add_dist(sim);
  sim->add_option("--lambda", o.lambda, "Arrival rate per server")->required();
  sim->add_option("--r", o.r, "Probe rate while eligible")->required();
  sim->add_option("--strategy", o.strategy, "steal or share")
      ->check(CLI::IsMember({"steal", "share"}));
  sim->add_option("--n-servers", o.n_servers, "Number of servers");
  sim->add_option("--horizon", o.horizon, "Simulated time per run");
  sim->add_option("--warmup", o.warmup, "Warmup fraction of the horizon");
  sim->add_option("--runs", o.runs, "Independent replications");
  sim->add_option("--seed", o.seed, "Base RNG seed");
  sim->add_flag("--force", o.force, "Run even when lambda >= 1 (unstable)");
  add_out(sim);

  auto* validate = app.add_subcommand(
      "validate", "Compare solver output against pinned reference values");
  validate->add_option("--rows", o.rows, "erlang, hyperexp or all")
      ->check(CLI::IsMember({"erlang", "hyperexp", "all"}));
  add_out(validate);

  auto* fit = app.add_subcommand(
      "fit", "Build a distribution and report its parameters and moments");
  add_dist(fit);
  add_out(fit, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(analyze)) return run_analyze(o);
    if (app.got_subcommand(dec)) return run_decide(o);
    if (app.got_subcommand(boundary)) {
      if (boundary_fmt->count() == 0) o.format = "csv";  // curve data default
      return run_boundary(o);
    }
    if (app.got_subcommand(bounds)) return run_bounds(o);
    if (app.got_subcommand(sim)) return run_simulate(o);
    if (app.got_subcommand(validate)) return run_validate(o);
    if (app.got_subcommand(fit)) return run_fit(o);
  } catch (const Error& e) {
    const json err{{"error", {{"kind", to_string(e.kind())},
                              {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    const json err{{"error", {{"kind", "internal"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
