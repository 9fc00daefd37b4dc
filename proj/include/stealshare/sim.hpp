#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "stealshare/phase_type.hpp"

namespace stealshare {

// Queue-length tail depth tracked by the simulator (fraction of servers
// with >= k jobs for k = 1..kSimTailDepth).
inline constexpr int kSimTailDepth = 8;

enum class Strategy { steal, share };

const char* to_string(Strategy s);

// Discrete-event simulation of the finite system: n_servers FCFS queues,
// per-server Poisson(lambda) arrivals, phase-type services (sampled in
// full at service start; service is never preempted), and probe policy:
//   steal: every idle server probes at rate r; a probe targets a uniformly
//          random other server and, if the target holds >= 2 jobs, pulls
//          the youngest *waiting* job (never the one in service).
//   share: every server with >= 2 jobs probes at rate r; if the target is
//          idle the youngest waiting job is pushed to it.
// Transfers are instantaneous; each run starts empty.
struct SimConfig {
  PhaseTypeDist dist;
  double lambda = 0.5;
  double r = 1.0;
  Strategy strategy = Strategy::steal;
  int n_servers = 1000;
  double horizon = 5000;
  double warmup_fraction = 1.0 / 3.0;  // statistics start at warmup*horizon
  int runs = 20;
  std::uint64_t seed = 1;
  bool force = false;  // allow lambda >= 1 (unstable) runs
};

struct RunResult {
  int run = 0;
  double mean_response = 0;
  long long jobs_completed = 0;
  double probe_rate = 0;     // probes emitted per time unit per server
  double transfer_rate = 0;  // successful transfers per time unit per server
  double mean_queue_length = 0;
  // frac_len_ge[k-1] = time-average fraction of servers with >= k jobs.
  std::array<double, kSimTailDepth> frac_len_ge{};
  double littles_residual = 0;  // |mean_queue_length - lambda*mean_response|
};

struct SimReport {
  double mean_response = 0;  // average of per-run means
  double ci_halfwidth = 0;   // 95% Student-t over run means (0 if runs < 2)
  std::vector<double> per_run_means;
  double observed_overall_probe_rate = 0;
  double mean_queue_length = 0;
  double transfer_count_rate = 0;
  std::array<double, kSimTailDepth> frac_len_ge{};
  double littles_law_residual = 0;
  std::vector<RunResult> runs;
  std::uint64_t seed = 0;
};

// Runs cfg.runs independent replications (concurrently when hardware
// allows; results are deterministic for a given config + seed regardless
// of scheduling) and aggregates.  Statistics are collected over event
// times in [warmup_fraction*horizon, horizon]; a job's response time is
// counted iff it completes inside that window.
// Errors: lambda >= 1 without cfg.force (stability), zero completed jobs
// in the window (insufficient_data), invalid config (invalid_parameter).
SimReport simulate(const SimConfig& cfg);

// Convenience: simulate(cfg).observed_overall_probe_rate.
double observed_probe_rate(const SimConfig& cfg);

// Two-sided 95% Student-t quantile for the given degrees of freedom.
double t_quantile_975(int df);

}  // namespace stealshare
