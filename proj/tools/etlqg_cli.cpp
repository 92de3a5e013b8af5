// Command-line front end: solve | simulate | montecarlo | sweep | bench |
// certify | selftest. Exit codes: 0 success, 1 usage error, 2 numerical or
// validation error, 3 property violation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "etlqg/etlqg.hpp"

namespace {

using namespace etlqg;

Vector parse_vector(const std::string& csv) {
  std::vector<double> values;
  std::istringstream is(csv);
  std::string item;
  while (std::getline(is, item, ',')) {
    if (item.empty()) continue;
    values.push_back(std::stod(item));
  }
  require(!values.empty(), ErrorCode::InvalidArgument,
          "empty vector argument");
  Vector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = values[i];
  return v;
}

// "a:b:step" inclusive grid, or a plain comma-separated list.
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  if (text.find(':') != std::string::npos) {
    double a = 0, b = 0, step = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3 ||
        step <= 0) {
      fail(ErrorCode::InvalidArgument,
           "grid must be a:b:step with step > 0, got '" + text + "'");
    }
    for (double v = a; v <= b + 1e-12 * std::max(1.0, std::abs(b)); v += step)
      grid.push_back(v);
  } else {
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ',')) {
      if (!item.empty()) grid.push_back(std::stod(item));
    }
  }
  require(!grid.empty(), ErrorCode::InvalidArgument,
          "empty grid argument '" + text + "'");
  return grid;
}

std::vector<PolicySpec> parse_policies(const std::string& csv,
                                       SolverKind solver, bool check) {
  std::vector<PolicySpec> specs;
  std::istringstream is(csv);
  std::string item;
  while (std::getline(is, item, ',')) {
    if (item.empty()) continue;
    PolicySpec spec = PolicySpec::parse(item);
    spec.solver = solver;
    spec.cross_check = check;
    specs.push_back(spec);
  }
  require(!specs.empty(), ErrorCode::InvalidArgument, "no policies given");
  return specs;
}

SolverKind parse_solver(const std::string& name) {
  if (name == "dp") return SolverKind::Dp;
  if (name == "bnb") return SolverKind::Bnb;
  if (name == "brute") return SolverKind::Brute;
  fail(ErrorCode::InvalidArgument,
       "unknown solver '" + name + "' (expected dp|bnb|brute)");
}

void print_schedule(const ScheduleVector& sched, std::ostream& os) {
  // Users think in transmissions: print theta = 1 - theta_bar.
  os << "(";
  for (int i = 0; i < sched.length(); ++i) {
    os << (sched.theta_bar[i] ? "skip" : "send");
    if (i + 1 < sched.length()) os << ", ";
  }
  os << ")";
}

int cmd_solve(const std::string& model_path, const std::string& e0_csv, int k,
              const std::string& solver_name, bool check,
              const std::string& lp_path) {
  const SystemModel model = load_model(model_path);
  const GainSchedule gains = compute_gain_schedule(model);
  const Vector e0 = parse_vector(e0_csv);
  require(k >= 0 && k < model.T, ErrorCode::InvalidArgument,
          "k must lie in [0, T-1]");
  const SolverKind kind = parse_solver(solver_name);

  if (check) {
    cross_validate(model, gains, k, e0, model.lambda);
    std::cout << "cross-validation: all three solvers agree\n";
  }
  const KernelTable table =
      build_noise_kernels(gains, model, k).bind_error(e0);
  if (!lp_path.empty()) {
    std::ofstream os(lp_path);
    require(os.good(), ErrorCode::IoError, "cannot write " + lp_path);
    os << to_lp_string(build_milp(table, model.lambda));
    std::cout << "LP file written to " << lp_path << "\n";
  }
  const SolveResult res = solve_window(table, model.lambda, kind);
  std::cout << "schedule  ";
  print_schedule(res.schedule, std::cout);
  std::cout << "\nobjective " << res.objective << "\n";
  std::cout << "solver    " << solver_kind_name(kind) << ", "
            << res.wall_time_s * 1e6 << " us";
  if (kind == SolverKind::Bnb)
    std::cout << ", " << res.nodes_explored << " nodes";
  std::cout << "\ntransmissions " << res.schedule.send_count() << " of "
            << res.schedule.length() << "\n";
  return 0;
}

int cmd_certify(const std::string& model_path, const std::string& e_csv,
                int k) {
  const SystemModel model = load_model(model_path);
  const GainSchedule gains = compute_gain_schedule(model);
  const Vector e = parse_vector(e_csv);
  require(k >= 0 && k < model.T, ErrorCode::InvalidArgument,
          "k must lie in [0, T-1]");
  const CertificateDecision d =
      evaluate_certificate(e, gains.Gamma[k], gains.W[k], model.lambda);
  std::cout << "verdict " << verdict_name(d.verdict) << "\n"
            << "lower   " << d.lower << "  (error cost now minus lambda)\n"
            << "upper   " << d.upper << "  (never-corrected cost minus lambda)\n";
  return 0;
}

int cmd_simulate(const std::string& model_path, const std::string& policy_name,
                 std::uint64_t seed, const std::string& out_path,
                 SolverKind solver, bool check) {
  const SystemModel model = load_model(model_path);
  const ModelContext ctx(model);
  PolicySpec spec = PolicySpec::parse(policy_name);
  spec.solver = solver;
  spec.cross_check = check;
  auto policy = make_policy(spec, ctx);
  const SimTrace trace = run_episode(ctx.model, ctx.gains, *policy, seed);
  std::cout << "policy " << trace.policy << " seed " << seed << "\n"
            << "realized cost " << trace.realized_cost << "\n"
            << "transmissions " << trace.comm_count << " of " << model.T
            << "\n";
  if (spec.kind == PolicySpec::Kind::Mpc) {
    std::cout << "certificate decisions " << trace.mpc_stats.certificate_decisions
              << ", window solves " << trace.mpc_stats.solves << "\n";
  }
  if (!out_path.empty()) {
    std::ofstream os(out_path);
    require(os.good(), ErrorCode::IoError, "cannot write " + out_path);
    write_trace_csv(trace, model, os);
    std::cout << "trace written to " << out_path << "\n";
  }
  return 0;
}

int cmd_montecarlo(const std::string& model_path, int seeds,
                   const std::string& policies_csv,
                   const std::string& periods_csv, const std::string& out_dir,
                   SolverKind solver, bool check, int threads) {
  const SystemModel model = load_model(model_path);
  ExperimentConfig config;
  config.model = model;
  config.policies = parse_policies(policies_csv, solver, check);
  if (!periods_csv.empty()) {
    for (double p : parse_grid(periods_csv)) {
      PolicySpec spec;
      spec.kind = PolicySpec::Kind::Periodic;
      spec.period = static_cast<int>(p);
      config.policies.push_back(spec);
    }
  }
  config.seeds = seeds;
  config.seed_base = model.seed.value_or(1);
  config.out_dir = out_dir;
  config.threads = threads;

  const MonteCarloResult mc = monte_carlo(config);
  std::printf("%-12s %14s %12s %10s\n", "policy", "mean_cost", "se_cost",
              "mean_comms");
  for (const auto& s : mc.summary) {
    std::printf("%-12s %14.2f %12.2f %10.2f\n", s.policy.c_str(), s.mean_cost,
                s.se_cost, s.mean_comms);
  }
  const double cert_fraction = mc.mpc_certificate_fraction();
  if (cert_fraction > 0.0) {
    std::printf("mpc steps decided by certificate alone: %.1f%%\n",
                100.0 * cert_fraction);
  }
  if (!out_dir.empty()) {
    write_run_directory(config, mc, "montecarlo");
    std::cout << "results written to " << out_dir << "\n";
  }
  return 0;
}

int cmd_sweep(const std::string& model_path, int seeds,
              const std::string& lambda_grid, const std::string& sigma_grid,
              const std::string& policies_csv, const std::string& out_dir,
              SolverKind solver, int threads) {
  const SystemModel model = load_model(model_path);
  ExperimentConfig config;
  config.model = model;
  config.policies = parse_policies(policies_csv, solver, false);
  config.lambda_grid = parse_grid(lambda_grid);
  config.sigma_grid = parse_grid(sigma_grid);
  config.sweep_seeds = seeds;
  config.seed_base = model.seed.value_or(1);
  config.threads = threads;

  const std::vector<SweepRow> rows = sweep(config);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream os(std::filesystem::path(out_dir) / "sweep.csv");
    require(os.good(), ErrorCode::IoError, "cannot write sweep.csv");
    write_sweep_csv(rows, os);
    std::ofstream manifest(std::filesystem::path(out_dir) / "manifest.json");
    manifest << config_manifest(config, "sweep").dump(2) << '\n';
    std::cout << rows.size() << " rows written to " << out_dir << "\n";
  } else {
    write_sweep_csv(rows, std::cout);
  }
  return 0;
}

int cmd_bench(const std::string& n_grid_csv, int horizon, int trials,
              const std::string& out_dir) {
  BenchConfig config;
  config.n_grid.clear();
  for (double v : parse_grid(n_grid_csv))
    config.n_grid.push_back(static_cast<int>(v));
  config.T = horizon;
  config.trials = trials;
  const std::vector<BenchRow> rows = bench_solvers(config);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream os(std::filesystem::path(out_dir) / "bench.csv");
    require(os.good(), ErrorCode::IoError, "cannot write bench.csv");
    write_bench_csv(rows, os);
    std::cout << rows.size() << " rows written to " << out_dir << "\n";
  } else {
    write_bench_csv(rows, std::cout);
  }
  return 0;
}

int cmd_selftest(int solver_instances, int cert_instances,
                 std::uint64_t seed) {
  const SelfTestReport report =
      run_selftest(solver_instances, cert_instances, seed, &std::cout);
  std::cout << "selftest: " << report.cross_validate_instances
            << " solver cross-validations, " << report.soundness_instances
            << " certificate soundness checks, all passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal event-triggered LQG scheduling toolkit"};
  app.require_subcommand(1);

  std::string model_path, e_csv, out_path, lp_path, policies = "mpc", periods;
  std::string lambda_grid = "0:200:20", sigma_grid = "0.1:1.0:0.3";
  std::string solver_name = "dp", n_grid = "2,8,16,32", policy = "mpc";
  int k = 0, seeds = 1000, trials = 50, horizon = 9, threads = 0;
  int st_solver_instances = 200, st_cert_instances = 500;
  std::uint64_t seed = 1, st_seed = 424242;
  bool check = false;

  auto* solve = app.add_subcommand("solve", "solve one scheduling window");
  solve->add_option("--model", model_path, "model JSON file")->required();
  solve->add_option("--e0", e_csv, "scheduler error at k, comma-separated")
      ->required();
  solve->add_option("--k", k, "window start index");
  solve->add_option("--solver", solver_name, "dp|bnb|brute");
  solve->add_option("--lp", lp_path, "dump the window MILP in LP format");
  solve->add_flag("--check", check, "cross-validate all three solvers");

  auto* certify = app.add_subcommand("certify", "one-step send/skip certificate");
  certify->add_option("--model", model_path, "model JSON file")->required();
  certify->add_option("--e", e_csv, "scheduler error, comma-separated")
      ->required();
  certify->add_option("--k", k, "time step");

  auto* simulate = app.add_subcommand("simulate", "run one closed-loop episode");
  simulate->add_option("--model", model_path, "model JSON file")->required();
  simulate->add_option("--policy", policy,
                       "mpc|offline|offline-dist|continuous|openloop|periodic:<p>");
  simulate->add_option("--seed", seed, "episode seed");
  simulate->add_option("--out", out_path, "write the trace CSV here");
  simulate->add_option("--solver", solver_name, "dp|bnb|brute");
  simulate->add_flag("--check", check, "cross-validate MPC window solves");

  auto* montecarlo = app.add_subcommand("montecarlo", "paired-seed Monte Carlo study");
  montecarlo->add_option("--model", model_path, "model JSON file")->required();
  montecarlo->add_option("--seeds", seeds, "number of seeds");
  montecarlo->add_option("--policies", policies, "comma-separated policy list");
  montecarlo->add_option("--periods", periods, "periodic baselines to add");
  montecarlo->add_option("--out", out_path, "output directory");
  montecarlo->add_option("--solver", solver_name, "dp|bnb|brute");
  montecarlo->add_option("--threads", threads, "worker threads (0 = auto)");
  montecarlo->add_flag("--check", check, "cross-validate MPC window solves");

  auto* sweep_cmd = app.add_subcommand("sweep", "(lambda, sigma) grid study");
  sweep_cmd->add_option("--model", model_path, "model JSON file")->required();
  sweep_cmd->add_option("--seeds", seeds, "seeds per grid point")
      ->default_val(100);
  sweep_cmd->add_option("--lambda-grid", lambda_grid, "a:b:step or list");
  sweep_cmd->add_option("--sigma-grid", sigma_grid, "a:b:step or list");
  sweep_cmd->add_option("--policies", policies, "comma-separated policy list");
  sweep_cmd->add_option("--out", out_path, "output directory");
  sweep_cmd->add_option("--solver", solver_name, "dp|bnb|brute");
  sweep_cmd->add_option("--threads", threads, "worker threads (0 = auto)");

  auto* bench = app.add_subcommand("bench", "solver timing benchmark");
  bench->add_option("--n-grid", n_grid, "state dimensions to benchmark");
  bench->add_option("--horizon", horizon, "window length");
  bench->add_option("--trials", trials, "instances per dimension");
  bench->add_option("--out", out_path, "output directory");

  auto* selftest = app.add_subcommand("selftest", "built-in randomized checks");
  selftest->add_option("--solver-instances", st_solver_instances,
                       "cross-validation instance count");
  selftest->add_option("--cert-instances", st_cert_instances,
                       "certificate soundness instance count");
  selftest->add_option("--seed", st_seed, "instance generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "ERROR[Usage]: " << e.what() << "\n";
    return 1;
  }

  try {
    if (solve->parsed())
      return cmd_solve(model_path, e_csv, k, solver_name, check, lp_path);
    if (certify->parsed()) return cmd_certify(model_path, e_csv, k);
    if (simulate->parsed())
      return cmd_simulate(model_path, policy, seed, out_path,
                          parse_solver(solver_name), check);
    if (montecarlo->parsed())
      return cmd_montecarlo(model_path, seeds, policies, periods, out_path,
                            parse_solver(solver_name), check, threads);
    if (sweep_cmd->parsed())
      return cmd_sweep(model_path, seeds, lambda_grid, sigma_grid, policies,
                       out_path, parse_solver(solver_name), threads);
    if (bench->parsed()) return cmd_bench(n_grid, horizon, trials, out_path);
    if (selftest->parsed())
      return cmd_selftest(st_solver_instances, st_cert_instances, st_seed);
  } catch (const Error& e) {
    std::cerr << "ERROR[" << error_code_name(e.code()) << "]: " << e.what()
              << "\n";
    return e.is_property_violation() ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "ERROR[Internal]: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
