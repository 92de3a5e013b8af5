#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "etlqg/kernels.hpp"
#include "etlqg/model.hpp"
#include "etlqg/random.hpp"
#include "etlqg/riccati.hpp"
#include "etlqg/simulate.hpp"
#include "etlqg/solver.hpp"

namespace etlqg {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Policy descriptors (value types, so worker threads can build fresh policy
// instances per episode) and the shared per-model context.
// ---------------------------------------------------------------------------

struct PolicySpec {
  enum class Kind { Mpc, Offline, Continuous, OpenLoop, Periodic };
  Kind kind = Kind::Mpc;
  int period = 1;
  OfflinePolicy::Mode offline_mode = OfflinePolicy::Mode::RealizedX0;
  SolverKind solver = SolverKind::Dp;
  bool cross_check = false;

  std::string name() const {
    switch (kind) {
      case Kind::Mpc: return "mpc";
      case Kind::Offline:
        return offline_mode == OfflinePolicy::Mode::RealizedX0 ? "offline"
                                                               : "offline-dist";
      case Kind::Continuous: return "continuous";
      case Kind::OpenLoop: return "openloop";
      case Kind::Periodic: return "periodic" + std::to_string(period);
    }
    return "?";
  }

  // Accepts mpc | offline | offline-dist | continuous | openloop |
  // periodic:<p> (also periodic<p>).
  static PolicySpec parse(const std::string& token) {
    PolicySpec spec;
    if (token == "mpc") {
      spec.kind = Kind::Mpc;
    } else if (token == "offline") {
      spec.kind = Kind::Offline;
    } else if (token == "offline-dist") {
      spec.kind = Kind::Offline;
      spec.offline_mode = OfflinePolicy::Mode::Distributional;
    } else if (token == "continuous") {
      spec.kind = Kind::Continuous;
    } else if (token == "openloop") {
      spec.kind = Kind::OpenLoop;
    } else if (token.rfind("periodic", 0) == 0) {
      spec.kind = Kind::Periodic;
      std::string rest = token.substr(8);
      if (!rest.empty() && rest[0] == ':') rest = rest.substr(1);
      require(!rest.empty(), ErrorCode::InvalidArgument,
              "periodic policy needs a period, e.g. periodic:5");
      spec.period = std::stoi(rest);
    } else {
      fail(ErrorCode::InvalidArgument, "unknown policy '" + token + "'");
    }
    return spec;
  }
};

// Model-derived immutable state shared by all episodes.
struct ModelContext {
  SystemModel model;
  GainSchedule gains;
  std::vector<KernelTable> tables;

  explicit ModelContext(SystemModel validated)
      : model(std::move(validated)),
        gains(compute_gain_schedule(model)),
        tables(build_all_windows(gains, model)) {}
};

inline std::unique_ptr<SchedulerPolicy> make_policy(const PolicySpec& spec,
                                                    const ModelContext& ctx) {
  switch (spec.kind) {
    case PolicySpec::Kind::Mpc:
      return std::make_unique<MpcPolicy>(ctx.model, ctx.gains, ctx.tables,
                                         spec.solver, spec.cross_check);
    case PolicySpec::Kind::Offline:
      return std::make_unique<OfflinePolicy>(ctx.model, ctx.gains,
                                             spec.offline_mode, spec.solver);
    case PolicySpec::Kind::Continuous:
      return std::make_unique<ContinuousPolicy>();
    case PolicySpec::Kind::OpenLoop:
      return std::make_unique<OpenLoopPolicy>();
    case PolicySpec::Kind::Periodic:
      return std::make_unique<PeriodicPolicy>(spec.period);
  }
  fail(ErrorCode::InvalidArgument, "unknown policy kind");
}

// ---------------------------------------------------------------------------
// Deterministic fan-out: episodes land in a preallocated slot per index, so
// the aggregation order is independent of thread scheduling.
// ---------------------------------------------------------------------------

template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  int workers = threads > 0
                    ? threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, count));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < count;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// Monte Carlo studies with common random numbers: seed i shares the initial
// state and noise sequence across every policy.
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  SystemModel model;  // validated
  std::vector<PolicySpec> policies;
  int seeds = 1000;
  std::uint64_t seed_base = 1;
  std::vector<double> lambda_grid;
  std::vector<double> sigma_grid;
  std::vector<int> periods;
  std::string out_dir;
  int sweep_seeds = 100;
  int threads = 0;  // 0 = hardware concurrency
};

struct EpisodeOutcome {
  double cost = 0.0;
  int comms = 0;
  // MPC bookkeeping (zero for other policies): how often the one-step
  // certificate decided without a window solve.
  long long cert_decisions = 0;
  long long solves = 0;
};

struct SummaryRow {
  std::string policy;
  double mean_cost = 0.0;
  double se_cost = 0.0;
  double mean_comms = 0.0;
  int seeds = 0;
};

struct MonteCarloResult {
  std::vector<SummaryRow> summary;                   // one row per policy
  std::vector<std::string> policy_names;
  std::vector<std::vector<EpisodeOutcome>> per_seed;  // [policy][seed index]
  std::uint64_t seed_base = 0;

  // Fraction of MPC steps decided by the certificate alone (a reported
  // metric; only meaningful when an MPC policy was run).
  double mpc_certificate_fraction() const {
    long long decided = 0, total = 0;
    for (const auto& rows : per_seed) {
      for (const auto& r : rows) {
        decided += r.cert_decisions;
        total += r.cert_decisions + r.solves;
      }
    }
    return total > 0 ? static_cast<double>(decided) / total : 0.0;
  }
};

inline std::vector<EpisodeOutcome> run_policy_episodes(
    const ModelContext& ctx, const PolicySpec& spec, std::uint64_t seed_base,
    int seeds, int threads) {
  std::vector<EpisodeOutcome> out(seeds);
  parallel_for(seeds, threads, [&](int i) {
    auto policy = make_policy(spec, ctx);
    const SimTrace trace =
        run_episode(ctx.model, ctx.gains, *policy, seed_base + i);
    out[i] = {trace.realized_cost, trace.comm_count,
              trace.mpc_stats.certificate_decisions, trace.mpc_stats.solves};
  });
  return out;
}

inline SummaryRow summarize(const std::string& name,
                            const std::vector<EpisodeOutcome>& rows) {
  SummaryRow s;
  s.policy = name;
  s.seeds = static_cast<int>(rows.size());
  double cost_sum = 0.0, comm_sum = 0.0;
  for (const auto& r : rows) {
    cost_sum += r.cost;
    comm_sum += r.comms;
  }
  s.mean_cost = cost_sum / s.seeds;
  s.mean_comms = comm_sum / s.seeds;
  double ss = 0.0;
  for (const auto& r : rows) ss += (r.cost - s.mean_cost) * (r.cost - s.mean_cost);
  s.se_cost = s.seeds > 1 ? std::sqrt(ss / (s.seeds - 1) / s.seeds) : 0.0;
  return s;
}

inline MonteCarloResult monte_carlo(const ExperimentConfig& config) {
  require(config.seeds >= 1, ErrorCode::InvalidArgument, "seeds must be >= 1");
  require(!config.policies.empty(), ErrorCode::InvalidArgument,
          "policy list is empty");
  const ModelContext ctx(config.model);
  MonteCarloResult result;
  result.seed_base = config.seed_base;
  for (const auto& spec : config.policies) {
    result.policy_names.push_back(spec.name());
    result.per_seed.push_back(run_policy_episodes(
        ctx, spec, config.seed_base, config.seeds, config.threads));
    result.summary.push_back(
        summarize(spec.name(), result.per_seed.back()));
  }
  return result;
}

// ---------------------------------------------------------------------------
// CSV / manifest output. All floats print with %.12g so files are
// byte-reproducible across runs of the same build.
// ---------------------------------------------------------------------------

namespace detail {
inline std::string g12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}
}  // namespace detail

inline void write_summary_csv(const MonteCarloResult& mc, std::ostream& os) {
  os << "policy,mean_cost,se_cost,mean_comms,seeds\n";
  for (const auto& s : mc.summary) {
    os << s.policy << ',' << detail::g12(s.mean_cost) << ','
       << detail::g12(s.se_cost) << ',' << detail::g12(s.mean_comms) << ','
       << s.seeds << '\n';
  }
}

inline void write_per_seed_csv(const MonteCarloResult& mc, std::ostream& os) {
  os << "policy,seed,cost,comms\n";
  for (std::size_t p = 0; p < mc.per_seed.size(); ++p) {
    for (std::size_t i = 0; i < mc.per_seed[p].size(); ++i) {
      os << mc.policy_names[p] << ',' << (mc.seed_base + i) << ','
         << detail::g12(mc.per_seed[p][i].cost) << ','
         << mc.per_seed[p][i].comms << '\n';
    }
  }
}

inline nlohmann::json config_manifest(const ExperimentConfig& config,
                                      const std::string& command) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["command"] = command;
  j["model"] = model_to_json(config.model);
  nlohmann::json pols = nlohmann::json::array();
  for (const auto& p : config.policies) pols.push_back(p.name());
  j["policies"] = pols;
  j["seeds"] = config.seeds;
  j["seed_base"] = config.seed_base;
  if (!config.lambda_grid.empty()) j["lambda_grid"] = config.lambda_grid;
  if (!config.sigma_grid.empty()) j["sigma_grid"] = config.sigma_grid;
  if (!config.periods.empty()) j["periods"] = config.periods;
  return j;
}

inline void write_run_directory(const ExperimentConfig& config,
                                const MonteCarloResult& mc,
                                const std::string& command) {
  namespace fs = std::filesystem;
  require(!config.out_dir.empty(), ErrorCode::InvalidArgument,
          "output directory not set");
  fs::create_directories(config.out_dir);
  {
    std::ofstream os(fs::path(config.out_dir) / "summary.csv");
    require(os.good(), ErrorCode::IoError, "cannot write summary.csv");
    write_summary_csv(mc, os);
  }
  {
    std::ofstream os(fs::path(config.out_dir) / "per_seed.csv");
    require(os.good(), ErrorCode::IoError, "cannot write per_seed.csv");
    write_per_seed_csv(mc, os);
  }
  {
    std::ofstream os(fs::path(config.out_dir) / "manifest.json");
    require(os.good(), ErrorCode::IoError, "cannot write manifest.json");
    os << config_manifest(config, command).dump(2) << '\n';
  }
}

// ---------------------------------------------------------------------------
// (lambda, sigma) sweep: one Monte Carlo per grid point with Sigma_w = sigma I.
// ---------------------------------------------------------------------------

struct SweepRow {
  double lambda = 0.0;
  double sigma = 0.0;
  std::string policy;
  double mean_cost = 0.0;
  double mean_comms = 0.0;
  int seeds = 0;
};

inline std::vector<SweepRow> sweep(const ExperimentConfig& config) {
  require(!config.lambda_grid.empty() && !config.sigma_grid.empty(),
          ErrorCode::InvalidArgument, "sweep needs lambda and sigma grids");
  std::vector<SweepRow> rows;
  for (double sigma : config.sigma_grid) {
    for (double lambda : config.lambda_grid) {
      SystemModel m = config.model;
      m.lambda = lambda;
      m.Sigma_w = sigma * Matrix::Identity(m.n(), m.n());
      ExperimentConfig point = config;
      point.model = validate_model(m);
      point.seeds = config.sweep_seeds;
      const MonteCarloResult mc = monte_carlo(point);
      for (const auto& s : mc.summary) {
        rows.push_back({lambda, sigma, s.policy, s.mean_cost, s.mean_comms,
                        s.seeds});
      }
    }
  }
  return rows;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows,
                            std::ostream& os) {
  os << "lambda,sigma,policy,mean_cost,mean_comms,seeds\n";
  for (const auto& r : rows) {
    os << detail::g12(r.lambda) << ',' << detail::g12(r.sigma) << ','
       << r.policy << ',' << detail::g12(r.mean_cost) << ','
       << detail::g12(r.mean_comms) << ',' << r.seeds << '\n';
  }
}

// ---------------------------------------------------------------------------
// Solver timing benchmark. Random instances per state dimension; the
// transmission penalty is scaled to the kernel magnitude so the send/skip
// trade-off (and hence the search difficulty) stays comparable across n.
// ---------------------------------------------------------------------------

struct BenchConfig {
  std::vector<int> n_grid{2, 8, 16, 32};
  int T = 9;
  int trials = 50;
  int naive_trials = 5;
  std::uint64_t seed = 7;
  bool include_brute = true;
  bool include_naive = true;
};

struct BenchRow {
  int n = 0;
  std::string method;
  double mean_s = 0.0;
  double min_s = 0.0;
  double max_s = 0.0;
  int trials = 0;
};

namespace detail {

inline SystemModel random_bench_model(CounterRng& rng, int n, int T) {
  SystemModel m;
  m.A = Matrix(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m.A(r, c) = rng.next_normal();
  // Scale to spectral radius 0.95 so horizon-9 powers stay tame.
  const double radius = m.A.eigenvalues().cwiseAbs().maxCoeff();
  if (radius > 0) m.A *= 0.95 / radius;
  m.B = Matrix(n, 1);
  for (int r = 0; r < n; ++r) m.B(r, 0) = rng.next_normal();
  m.Q = Matrix::Identity(n, n);
  m.QT = m.Q;
  m.R = Matrix::Identity(1, 1);
  m.Sigma_w = 0.5 * Matrix::Identity(n, n);
  m.lambda = 1.0;  // replaced after kernels are known
  m.T = T;
  m.x0_mean = Vector::Zero(n);
  m.x0_cov = Matrix::Identity(n, n);
  return validate_model(m);
}

// Times fn by batching repetitions until the batch is long enough for the
// clock, returning seconds per call.
template <typename Fn>
double time_per_call(Fn&& fn, double min_batch_s = 1e-4, int max_reps = 1 << 14) {
  int reps = 1;
  for (;;) {
    StopWatch watch;
    for (int r = 0; r < reps; ++r) fn();
    const double elapsed = watch.seconds();
    if (elapsed >= min_batch_s || reps >= max_reps) return elapsed / reps;
    reps = std::min(max_reps, std::max(reps * 2, static_cast<int>(
        reps * (min_batch_s / std::max(elapsed, 1e-9)))));
  }
}

}  // namespace detail

inline std::vector<BenchRow> bench_solvers(const BenchConfig& config) {
  std::vector<BenchRow> rows;
  CounterRng rng(config.seed);
  const int len = config.T;  // window always starts at k = 0

  for (int n : config.n_grid) {
    struct Acc {
      std::vector<double> samples;
    };
    Acc precompute, bnb, dp, brute, naive;

    for (int trial = 0; trial < config.trials; ++trial) {
      SystemModel model = detail::random_bench_model(rng, n, config.T);
      const GainSchedule gains = compute_gain_schedule(model);
      Vector e0(n);
      for (int i = 0; i < n; ++i) e0(i) = rng.next_normal();

      precompute.samples.push_back(detail::time_per_call([&] {
        KernelTable t = build_noise_kernels(gains, model, 0).bind_error(e0);
        (void)t;
      }));

      KernelTable table = build_noise_kernels(gains, model, 0).bind_error(e0);
      double g_total = 0.0;
      for (int t = 0; t < len; ++t)
        for (int tau = 0; tau <= t; ++tau) g_total += table.coeff(t, tau);
      const double lambda = g_total / len;  // comparable difficulty across n
      model.lambda = lambda;
      const MilpProblem problem = build_milp(table, lambda);

      // Microsecond-scale solves get a wider batch so one preempted batch
      // cannot skew a sample.
      bnb.samples.push_back(detail::time_per_call(
          [&] {
            SolveResult r = solve_bnb(problem);
            (void)r;
          },
          1e-3));
      dp.samples.push_back(detail::time_per_call(
          [&] {
            SolveResult r = solve_dp(table, lambda);
            (void)r;
          },
          1e-3));
      if (config.include_brute && len <= 22) {
        brute.samples.push_back(detail::time_per_call([&] {
          SolveResult r = solve_bruteforce(table, lambda);
          (void)r;
        }));
      }
      if (config.include_naive && trial < config.naive_trials && len <= 16) {
        // Full enumeration through the covariance recursion: the cost of not
        // unfolding. One timing sample per enumeration pass.
        MatrixWorkspace ws(n);
        naive.samples.push_back(detail::time_per_call(
            [&] {
              ScheduleVector sched{0, std::vector<std::uint8_t>(len, 0)};
              double best = std::numeric_limits<double>::infinity();
              for (std::uint64_t v = 0; v < (1ULL << len); ++v) {
                for (int i = 0; i < len; ++i)
                  sched.theta_bar[i] =
                      static_cast<std::uint8_t>((v >> (len - 1 - i)) & 1u);
                best = std::min(best, cost_matrix_recursion(model, gains, 0,
                                                            e0, sched, &ws));
              }
              (void)best;
            },
            1e-4, 4));
      }
    }

    const auto flush = [&](const char* method, const Acc& acc) {
      if (acc.samples.empty()) return;
      BenchRow row;
      row.n = n;
      row.method = method;
      row.trials = static_cast<int>(acc.samples.size());
      row.min_s = *std::min_element(acc.samples.begin(), acc.samples.end());
      row.max_s = *std::max_element(acc.samples.begin(), acc.samples.end());
      double sum = 0.0;
      for (double s : acc.samples) sum += s;
      row.mean_s = sum / row.trials;
      rows.push_back(row);
    };
    flush("kernel_precompute", precompute);
    flush("bnb", bnb);
    flush("dp", dp);
    flush("brute", brute);
    flush("naive_enum", naive);
  }
  return rows;
}

inline void write_bench_csv(const std::vector<BenchRow>& rows,
                            std::ostream& os) {
  os << "n,method,mean_s,min_s,max_s,trials\n";
  for (const auto& r : rows) {
    os << r.n << ',' << r.method << ',' << detail::g12(r.mean_s) << ','
       << detail::g12(r.min_s) << ',' << detail::g12(r.max_s) << ','
       << r.trials << '\n';
  }
}

// ---------------------------------------------------------------------------
// Statistical check that the receding-horizon scheduler is no worse than any
// deterministic schedule in the list, on paired seeds.
// ---------------------------------------------------------------------------

struct DominanceRow {
  std::string policy;
  double mean_policy_cost = 0.0;
  double mean_mpc_cost = 0.0;
  double mean_diff = 0.0;  // policy cost minus MPC cost, paired
  double se_diff = 0.0;
  double min_diff = 0.0;
  double max_diff = 0.0;
  bool pass = false;
};

struct DominanceReport {
  std::vector<DominanceRow> rows;
  double mpc_mean_comms = 0.0;
  double offline_mean_comms = 0.0;
  bool all_pass = false;
};

class DominanceError : public Error {
 public:
  DominanceError(const std::string& what, DominanceReport report)
      : Error(ErrorCode::StatisticalViolation, what),
        report_(std::move(report)) {}
  const DominanceReport& report() const { return report_; }

 private:
  DominanceReport report_;
};

// Runs MPC and every deterministic policy in config.policies (plus
// Periodic(p) for p in config.periods) on paired seeds and asserts
//   mean(MPC cost) <= mean(det cost) + 2 * SE(paired difference).
// Throws StatisticalViolation with the full report attached on failure.
inline DominanceReport validate_dominance(const ExperimentConfig& config) {
  const ModelContext ctx(config.model);
  const int N = config.seeds;

  PolicySpec mpc_spec;
  mpc_spec.kind = PolicySpec::Kind::Mpc;
  const auto mpc = run_policy_episodes(ctx, mpc_spec, config.seed_base, N,
                                       config.threads);
  double mpc_mean = 0.0, mpc_comms = 0.0;
  for (const auto& r : mpc) {
    mpc_mean += r.cost;
    mpc_comms += r.comms;
  }
  mpc_mean /= N;
  mpc_comms /= N;

  std::vector<PolicySpec> dets;
  for (const auto& p : config.policies) {
    if (p.kind != PolicySpec::Kind::Mpc) dets.push_back(p);
  }
  for (int p : config.periods) {
    PolicySpec spec;
    spec.kind = PolicySpec::Kind::Periodic;
    spec.period = p;
    dets.push_back(spec);
  }
  require(!dets.empty(), ErrorCode::InvalidArgument,
          "dominance validation needs at least one deterministic policy");

  DominanceReport report;
  report.mpc_mean_comms = mpc_comms;
  report.all_pass = true;
  for (const auto& spec : dets) {
    const auto det = run_policy_episodes(ctx, spec, config.seed_base, N,
                                         config.threads);
    DominanceRow row;
    row.policy = spec.name();
    double det_mean = 0.0, det_comms = 0.0;
    for (int i = 0; i < N; ++i) det_mean += det[i].cost;
    det_mean /= N;
    for (const auto& r : det) det_comms += r.comms;
    det_comms /= N;
    if (spec.kind == PolicySpec::Kind::Offline) {
      report.offline_mean_comms = det_comms;
    }

    double dbar = 0.0;
    double dmin = std::numeric_limits<double>::infinity();
    double dmax = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < N; ++i) {
      const double d = det[i].cost - mpc[i].cost;
      dbar += d;
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
    dbar /= N;
    double ss = 0.0;
    for (int i = 0; i < N; ++i) {
      const double d = det[i].cost - mpc[i].cost;
      ss += (d - dbar) * (d - dbar);
    }
    const double se = N > 1 ? std::sqrt(ss / (N - 1) / N) : 0.0;

    row.mean_policy_cost = det_mean;
    row.mean_mpc_cost = mpc_mean;
    row.mean_diff = dbar;
    row.se_diff = se;
    row.min_diff = dmin;
    row.max_diff = dmax;
    row.pass = dbar >= -2.0 * se;
    report.all_pass = report.all_pass && row.pass;
    report.rows.push_back(row);
  }

  if (!report.all_pass) {
    std::string bad;
    for (const auto& r : report.rows)
      if (!r.pass) bad += (bad.empty() ? "" : ", ") + r.policy;
    throw DominanceError("MPC mean cost exceeds deterministic policies beyond "
                        "2 paired standard errors: " + bad,
                        report);
  }
  return report;
}

}  // namespace etlqg
