#include "stealshare/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <exception>
#include <iterator>
#include <mutex>
#include <queue>
#include <random>
#include <thread>

#include "stealshare/error.hpp"
#include "stealshare/qbd.hpp"

namespace stealshare {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Uniform in [0, 1) with 53 random bits; portable across platforms, unlike
// std::uniform_real_distribution.
double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double exp_draw(std::mt19937_64& rng, double rate) {
  return -std::log1p(-u01(rng)) / rate;
}

// Phase-type sampling tables (jump chain of the transient generator).
struct Sampler {
  int n = 0;
  std::vector<double> alpha_cum;  // running sum of alpha
  std::vector<double> q;          // -S(i,i)
  std::vector<double> exit;       // exit rate per phase
  std::vector<std::vector<std::pair<int, double>>> jump;  // (j, S(i,j))

  explicit Sampler(const PhaseTypeDist& dist) : n(dist.num_phases()) {
    alpha_cum.resize(n);
    q.resize(n);
    exit.resize(n);
    jump.resize(n);
    double cum = 0;
    for (int i = 0; i < n; ++i) {
      cum += dist.alpha()(i);
      alpha_cum[i] = cum;
      q[i] = -dist.S()(i, i);
      exit[i] = dist.exit_rates()(i);
      for (int j = 0; j < n; ++j) {
        if (j != i && dist.S()(i, j) > 0) {
          jump[i].emplace_back(j, dist.S()(i, j));
        }
      }
    }
  }

  double draw(std::mt19937_64& rng) const {
    double u = u01(rng);
    int ph = 0;
    while (ph + 1 < n && u >= alpha_cum[ph]) ++ph;
    double dur = 0;
    for (;;) {
      dur += exp_draw(rng, q[ph]);
      double thr = u01(rng) * q[ph];
      if (thr < exit[ph] || jump[ph].empty()) return dur;
      thr -= exit[ph];
      int next = jump[ph].back().first;
      for (const auto& [j, rate] : jump[ph]) {
        thr -= rate;
        if (thr < 0) {
          next = j;
          break;
        }
      }
      ph = next;
    }
  }
};

enum class EvType : std::uint8_t { arrival, departure, probe };

struct Ev {
  double t = 0;
  std::uint64_t seq = 0;  // tie-break: deterministic FIFO order
  EvType type = EvType::arrival;
  std::int32_t server = -1;
  std::uint32_t epoch = 0;
};

struct EvLater {
  bool operator()(const Ev& a, const Ev& b) const {
    return a.t > b.t || (a.t == b.t && a.seq > b.seq);
  }
};

class Run {
 public:
  Run(const SimConfig& cfg, const Sampler& sampler, int run_index)
      : cfg_(cfg),
        sampler_(sampler),
        rng_(splitmix64(cfg.seed + kGolden * (run_index + 1))),
        n_(cfg.n_servers),
        w0_(cfg.warmup_fraction * cfg.horizon),
        w1_(cfg.horizon),
        queues_(cfg.n_servers),
        epoch_(cfg.n_servers, 0) {}

  RunResult operator()(int run_index) {
    schedule(exp_draw(rng_, cfg_.lambda * n_), EvType::arrival, -1, 0);
    if (cfg_.strategy == Strategy::steal && cfg_.r > 0) {
      for (int i = 0; i < n_; ++i) schedule_probe(0.0, i);
    }
    while (!events_.empty()) {
      const Ev ev = events_.top();
      if (ev.t > cfg_.horizon) break;
      events_.pop();
      integrate_to(ev.t);
      switch (ev.type) {
        case EvType::arrival: on_arrival(ev.t); break;
        case EvType::departure: on_departure(ev.t, ev.server); break;
        case EvType::probe: on_probe(ev.t, ev.server, ev.epoch); break;
      }
    }
    integrate_to(cfg_.horizon);

    if (completions_ == 0) {
      fail(ErrorKind::insufficient_data,
           "no jobs completed inside the measurement window; increase the "
           "horizon or lower the warmup fraction");
    }
    const double span_servers = (w1_ - w0_) * n_;
    RunResult res;
    res.run = run_index;
    res.mean_response = response_sum_ / completions_;
    res.jobs_completed = completions_;
    res.probe_rate = probes_ / span_servers;
    res.transfer_rate = transfers_ / span_servers;
    res.mean_queue_length = int_total_ / span_servers;
    for (int k = 0; k < kSimTailDepth; ++k) {
      res.frac_len_ge[k] = int_ge_[k] / span_servers;
    }
    res.littles_residual =
        std::abs(res.mean_queue_length - cfg_.lambda * res.mean_response);
    return res;
  }

 private:
  void schedule(double t, EvType type, std::int32_t server,
                std::uint32_t epoch) {
    events_.push(Ev{t, seq_++, type, server, epoch});
  }

  void schedule_probe(double now, int i) {
    schedule(now + exp_draw(rng_, cfg_.r), EvType::probe, i, epoch_[i]);
  }

  bool probing(int i) const {
    return cfg_.strategy == Strategy::steal ? queues_[i].empty()
                                            : queues_[i].size() >= 2;
  }

  // Called after any queue-length change of server i: pending probes become
  // stale (epoch bump) and a fresh exponential probe timer is started if the
  // policy has i probing (memorylessness makes the restart exact).
  void sync_probe(double now, int i) {
    ++epoch_[i];
    if (cfg_.r > 0 && probing(i)) schedule_probe(now, i);
  }

  void integrate_to(double now) {
    const double lo = std::max(last_t_, w0_);
    const double hi = std::min(now, w1_);
    if (hi > lo) {
      const double d = hi - lo;
      int_total_ += static_cast<double>(total_jobs_) * d;
      for (int k = 0; k < kSimTailDepth; ++k) int_ge_[k] += cnt_ge_[k] * d;
    }
    last_t_ = now;
  }

  bool in_window(double t) const { return t >= w0_ && t <= w1_; }

  void grow(int i) {
    const auto len = queues_[i].size();  // after push
    ++total_jobs_;
    if (len <= kSimTailDepth) ++cnt_ge_[len - 1];
  }

  // Call before popping the job: the server stops counting toward
  // "length >= current size".
  void shrink(int i) {
    const auto len = queues_[i].size();
    --total_jobs_;
    if (len <= kSimTailDepth) --cnt_ge_[len - 1];
  }

  void start_service(double now, int i) {
    schedule(now + sampler_.draw(rng_), EvType::departure, i, 0);
  }

  int pick_other(int self) {
    const int idx = std::min(static_cast<int>(u01(rng_) * (n_ - 1)), n_ - 2);
    return idx + (idx >= self ? 1 : 0);
  }

  void on_arrival(double now) {
    const int i = std::min(static_cast<int>(u01(rng_) * n_), n_ - 1);
    queues_[i].push_back(now);
    grow(i);
    if (queues_[i].size() == 1) start_service(now, i);
    sync_probe(now, i);
    schedule(now + exp_draw(rng_, cfg_.lambda * n_), EvType::arrival, -1, 0);
  }

  void on_departure(double now, int i) {
    shrink(i);
    const double arrived = queues_[i].front();
    queues_[i].pop_front();
    if (in_window(now)) {
      response_sum_ += now - arrived;
      ++completions_;
    }
    if (!queues_[i].empty()) start_service(now, i);
    sync_probe(now, i);
  }

  void on_probe(double now, int i, std::uint32_t epoch) {
    if (epoch != epoch_[i]) return;  // invalidated by a length change
    if (in_window(now)) ++probes_;
    const int target = pick_other(i);
    if (cfg_.strategy == Strategy::steal) {
      if (queues_[target].size() >= 2) {
        transfer(now, target, i);
        sync_probe(now, target);
      }
    } else {
      if (queues_[target].empty()) {
        transfer(now, i, target);
        sync_probe(now, target);
      }
    }
    sync_probe(now, i);  // reschedules the prober's timer when still probing
  }

  // Moves the youngest waiting job of `from` (never the one in service) to
  // the idle server `to`, which starts serving it immediately.
  void transfer(double now, int from, int to) {
    shrink(from);
    const double job = queues_[from].back();
    queues_[from].pop_back();
    queues_[to].push_back(job);
    grow(to);
    start_service(now, to);
    if (in_window(now)) ++transfers_;
  }

  const SimConfig& cfg_;
  const Sampler& sampler_;
  std::mt19937_64 rng_;
  int n_;
  double w0_, w1_;

  std::vector<std::deque<double>> queues_;  // arrival times; front in service
  std::vector<std::uint32_t> epoch_;
  std::priority_queue<Ev, std::vector<Ev>, EvLater> events_;
  std::uint64_t seq_ = 0;

  double last_t_ = 0;
  long long total_jobs_ = 0;
  long long cnt_ge_[kSimTailDepth] = {};  // servers with length >= k+1
  double int_total_ = 0;
  double int_ge_[kSimTailDepth] = {};
  double response_sum_ = 0;
  long long completions_ = 0;
  long long probes_ = 0;
  long long transfers_ = 0;
};

void validate(const SimConfig& cfg) {
  if (!(cfg.lambda > 0) || !std::isfinite(cfg.lambda)) {
    fail(ErrorKind::invalid_parameter, "lambda must be positive and finite");
  }
  if (cfg.lambda >= 1 && !cfg.force) {
    fail(ErrorKind::stability,
         "lambda >= 1 gives an unstable system; pass force to run anyway");
  }
  if (!(cfg.r >= 0) || cfg.r > kRMax) {
    fail(ErrorKind::invalid_parameter, "probe rate r must be in [0, 1e6]");
  }
  if (cfg.n_servers < 2) {
    fail(ErrorKind::invalid_parameter,
         "need at least 2 servers so probes have a target");
  }
  if (!(cfg.horizon > 0) || !std::isfinite(cfg.horizon)) {
    fail(ErrorKind::invalid_parameter, "horizon must be positive and finite");
  }
  if (!(cfg.warmup_fraction >= 0) || cfg.warmup_fraction >= 1) {
    fail(ErrorKind::invalid_parameter, "warmup fraction must be in [0, 1)");
  }
  if (cfg.runs < 1) {
    fail(ErrorKind::invalid_parameter, "need at least one run");
  }
  if (std::abs(cfg.dist.mean() - 1.0) > kMeanOneTol) {
    fail(ErrorKind::invalid_parameter,
         "job-size distribution must have mean 1");
  }
}

}  // namespace

const char* to_string(Strategy s) {
  return s == Strategy::steal ? "steal" : "share";
}

double t_quantile_975(int df) {
  // Two-sided 95% Student-t critical values; linear interpolation between
  // the standard tabulated rows above 30 degrees of freedom.
  static constexpr double kTable[31] = {
      0,      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365,
      2.306,  2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131,
      2.120,  2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069,
      2.064,  2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
  if (df < 1) fail(ErrorKind::invalid_parameter, "degrees of freedom < 1");
  if (df <= 30) return kTable[df];
  struct Row {
    int df;
    double v;
  };
  static constexpr Row kRows[] = {{30, 2.042}, {40, 2.021}, {60, 2.000},
                                  {120, 1.980}};
  for (size_t i = 1; i < std::size(kRows); ++i) {
    if (df <= kRows[i].df) {
      const auto& [d0, v0] = kRows[i - 1];
      const auto& [d1, v1] = kRows[i];
      return v0 + (v1 - v0) * (df - d0) / static_cast<double>(d1 - d0);
    }
  }
  return 1.96;
}

SimReport simulate(const SimConfig& cfg) {
  validate(cfg);
  const Sampler sampler(cfg.dist);

  std::vector<RunResult> results(cfg.runs);
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;

  auto worker = [&] {
    for (;;) {
      const int run = next.fetch_add(1);
      if (run >= cfg.runs) return;
      try {
        results[run] = Run(cfg, sampler, run)(run);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int n_threads = std::clamp(std::min(hw, cfg.runs), 1, 64);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  SimReport rep;
  rep.runs = std::move(results);
  rep.seed = cfg.seed;
  rep.per_run_means.reserve(cfg.runs);
  double mql = 0, probe = 0, xfer = 0, littles = 0;
  std::array<double, kSimTailDepth> ge{};
  for (const RunResult& r : rep.runs) {
    rep.per_run_means.push_back(r.mean_response);
    mql += r.mean_queue_length;
    probe += r.probe_rate;
    xfer += r.transfer_rate;
    littles += r.littles_residual;
    for (int k = 0; k < kSimTailDepth; ++k) ge[k] += r.frac_len_ge[k];
  }
  const double nr = cfg.runs;
  rep.mean_queue_length = mql / nr;
  rep.observed_overall_probe_rate = probe / nr;
  rep.transfer_count_rate = xfer / nr;
  rep.littles_law_residual = littles / nr;
  for (int k = 0; k < kSimTailDepth; ++k) rep.frac_len_ge[k] = ge[k] / nr;

  double mean = 0;
  for (double m : rep.per_run_means) mean += m;
  mean /= nr;
  rep.mean_response = mean;
  if (cfg.runs >= 2) {
    double ss = 0;
    for (double m : rep.per_run_means) ss += (m - mean) * (m - mean);
    const double sd = std::sqrt(ss / (cfg.runs - 1));
    rep.ci_halfwidth = t_quantile_975(cfg.runs - 1) * sd / std::sqrt(nr);
  }
  return rep;
}

double observed_probe_rate(const SimConfig& cfg) {
  return simulate(cfg).observed_overall_probe_rate;
}

}  // namespace stealshare
