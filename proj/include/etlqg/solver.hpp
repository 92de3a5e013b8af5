#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "etlqg/kernels.hpp"
#include "etlqg/milp.hpp"

namespace etlqg {

// Equal-objective ties (within kTieTol absolute) are broken toward fewer
// transmissions, then toward the lexicographically smallest theta_bar. All
// three solvers share this rule so results are reproducible.
inline constexpr double kTieTol = 1e-12;

struct SolveResult {
  ScheduleVector schedule;
  double objective = std::numeric_limits<double>::infinity();
  long long nodes_explored = 0;  // branch-and-bound only
  double wall_time_s = 0.0;
};

namespace detail {

class StopWatch {
 public:
  StopWatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Candidate ordering: lower cost, then fewer sends, then smaller lex value.
template <typename Lex>
bool candidate_beats(double cost_a, int sends_a, const Lex& lex_a,
                     double cost_b, int sends_b, const Lex& lex_b) {
  if (cost_a < cost_b - kTieTol) return true;
  if (cost_a > cost_b + kTieTol) return false;
  if (sends_a != sends_b) return sends_a < sends_b;
  return lex_a < lex_b;
}

// row_sums[i][c] = sum_{tau=k+c}^{k+i} g[k+i][tau]; the expected stage-(k+i)
// cost when the most recent transmission happened at k+c-1.
inline std::vector<std::vector<double>> stage_row_sums(const KernelTable& t) {
  const int len = t.window_length();
  const int k = t.window_start();
  std::vector<std::vector<double>> rows(len);
  for (int i = 0; i < len; ++i) {
    rows[i].assign(i + 1, 0.0);
    double acc = 0.0;
    for (int c = i; c >= 0; --c) {
      acc += t.coeff(k + i, k + c);
      rows[i][c] = acc;
    }
  }
  return rows;
}

// Send-free segment costs. noise(c, i) prices leaving times k+c..k+i
// untransmitted after a send at k+c-1; init(i) prices leaving k..k+i
// untransmitted from the window start (tau = k column included).
struct SegmentSums {
  std::vector<std::vector<double>> seg_noise;  // [c][i]
  std::vector<double> seg_init;                // [i]

  explicit SegmentSums(const KernelTable& table) {
    const int len = table.window_length();
    const auto rows = stage_row_sums(table);
    seg_noise.resize(len + 1);
    for (int c = 1; c <= len; ++c) {
      seg_noise[c].assign(len, 0.0);
      double acc = 0.0;
      for (int i = c; i < len; ++i) {
        acc += rows[i][c];
        seg_noise[c][i] = acc;
      }
    }
    seg_init.assign(len, 0.0);
    double acc = 0.0;
    for (int i = 0; i < len; ++i) {
      acc += rows[i][0];
      seg_init[i] = acc;
    }
  }

  double noise(int c, int i) const { return i < c ? 0.0 : seg_noise[c][i]; }
  double init(int i) const { return i < 0 ? 0.0 : seg_init[i]; }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Exhaustive enumeration. The independent oracle for the other two solvers;
// capped at 2^22 schedules.
// ---------------------------------------------------------------------------
inline SolveResult solve_bruteforce(const KernelTable& table, double lambda) {
  const int len = table.window_length();
  require(len <= 22, ErrorCode::WindowTooLarge,
          "brute force capped at window length 22, got " + std::to_string(len));
  detail::StopWatch watch;

  SolveResult best;
  int best_sends = 0;
  std::uint64_t best_lex = 0;
  ScheduleVector sched{table.window_start(),
                       std::vector<std::uint8_t>(len, 0)};
  const std::uint64_t count = 1ULL << len;
  for (std::uint64_t v = 0; v < count; ++v) {
    for (int i = 0; i < len; ++i)
      sched.theta_bar[i] = static_cast<std::uint8_t>((v >> (len - 1 - i)) & 1u);
    const double cost = cost_unfolded(table, sched, lambda);
    const int sends = sched.send_count();
    if (best.schedule.theta_bar.empty() ||
        detail::candidate_beats(cost, sends, v, best.objective, best_sends,
                                best_lex)) {
      best.objective = cost;
      best.schedule = sched;
      best_sends = sends;
      best_lex = v;
    }
  }
  best.wall_time_s = watch.seconds();
  return best;
}

// ---------------------------------------------------------------------------
// Exact dynamic program over the renewal structure: a transmission resets the
// error, so the cost after a send at time r is independent of everything
// before r. States are "next segment starts at a"; O((T-k)^2) segment sums.
// ---------------------------------------------------------------------------
inline SolveResult solve_dp(const KernelTable& table, double lambda) {
  require(table.is_bound(), ErrorCode::WindowMismatch,
          "solve_dp needs a bound kernel table");
  detail::StopWatch watch;

  const int len = table.window_length();
  const int k = table.window_start();
  const detail::SegmentSums segs(table);

  struct Tail {
    double cost = 0.0;
    int sends = 0;
    std::vector<std::uint8_t> bits;  // decisions for the suffix
  };
  const auto consider = [](Tail& best, Tail&& cand) {
    if (detail::candidate_beats(cand.cost, cand.sends, cand.bits, best.cost,
                                best.sends, best.bits)) {
      best = std::move(cand);
    }
  };
  const auto make_tail = [](int ones, const Tail* rest) {
    // `ones` skips, then (if rest) a send followed by rest's bits.
    Tail t;
    t.bits.assign(ones, 1);
    if (rest) {
      t.bits.push_back(0);
      t.bits.insert(t.bits.end(), rest->bits.begin(), rest->bits.end());
      t.sends = rest->sends + 1;
    }
    return t;
  };

  // F[c]: best continuation for times k+c..T-1 given a send at k+c-1.
  std::vector<Tail> F(len + 1);
  F[len] = Tail{};  // empty suffix
  for (int c = len - 1; c >= 1; --c) {
    Tail best = make_tail(len - c, nullptr);
    best.cost = segs.noise(c, len - 1);
    for (int j = c; j < len; ++j) {  // next send at k+j
      Tail cand = make_tail(j - c, &F[j + 1]);
      cand.cost = segs.noise(c, j - 1) + lambda + F[j + 1].cost;
      consider(best, std::move(cand));
    }
    F[c] = std::move(best);
  }

  // Window head: the error bound at k is live until the first send.
  Tail best = make_tail(len, nullptr);
  best.cost = segs.init(len - 1);
  for (int j = 0; j < len; ++j) {  // first send at k+j
    Tail cand = make_tail(j, &F[j + 1]);
    cand.cost = segs.init(j - 1) + lambda + F[j + 1].cost;
    consider(best, std::move(cand));
  }

  SolveResult out;
  out.schedule = ScheduleVector{k, std::move(best.bits)};
  out.objective = cost_unfolded(table, out.schedule, lambda);
  out.wall_time_s = watch.seconds();
  return out;
}

// Cheapest window cost when the action at k is pinned; shares the segment
// sums of solve_dp. Used to cross-check certificate verdicts against full
// solves without enumerating.
inline double dp_cost_with_first_action(const KernelTable& table, double lambda,
                                        bool send_at_k) {
  require(table.is_bound(), ErrorCode::WindowMismatch,
          "dp_cost_with_first_action needs a bound kernel table");
  const int len = table.window_length();
  const detail::SegmentSums segs(table);

  // F[c]: cheapest continuation for times k+c..T-1 after a send at k+c-1.
  std::vector<double> F(len + 1, 0.0);
  for (int c = len - 1; c >= 1; --c) {
    double best = segs.noise(c, len - 1);  // never send again
    for (int j = c; j < len; ++j) {
      best = std::min(best, segs.noise(c, j - 1) + lambda + F[j + 1]);
    }
    F[c] = best;
  }

  if (send_at_k) return lambda + (len > 1 ? F[1] : 0.0);
  double best = segs.init(len - 1);  // never send at all
  for (int j = 1; j < len; ++j) {    // first send at k+j
    best = std::min(best, segs.init(j - 1) + lambda + F[j + 1]);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Depth-first branch-and-bound on the MILP. Branches only on theta_bar in
// time order (mu variables are implied); the node bound is the exact cost of
// the decided prefix, valid because every remaining objective term is
// nonnegative. Value order follows the certificate direction at the node's
// residual covariance: send-first when the immediate stage cost of skipping
// already exceeds lambda, else skip-first.
// ---------------------------------------------------------------------------

struct BnbNodeRecord {
  std::vector<std::uint8_t> prefix;  // decided theta_bar values
  double bound = 0.0;
};

inline SolveResult solve_bnb(const MilpProblem& problem,
                             const std::optional<SolveResult>& incumbent_hint =
                                 std::nullopt,
                             std::vector<BnbNodeRecord>* trace = nullptr) {
  const int len = problem.window_length();
  require(len >= 1, ErrorCode::MalformedProblem, "empty scheduling window");
  require(problem.num_mu() == len * (len + 1) / 2, ErrorCode::MalformedProblem,
          "mu variable count does not match the window");
  require(problem.lambda >= 0.0, ErrorCode::MalformedProblem,
          "negative transmission penalty");
  for (const auto& var : problem.mu) {
    require(var.tau >= problem.k && var.tau <= var.t && var.t < problem.T,
            ErrorCode::MalformedProblem, "mu variable indices out of range");
    require(var.coeff >= -kTieTol, ErrorCode::MalformedProblem,
            "negative objective coefficient on a mu variable");
  }
  detail::StopWatch watch;

  // rows[i][c] = sum_{tau=k+c}^{k+i} g[k+i][tau]
  std::vector<std::vector<double>> rows(len);
  for (int i = 0; i < len; ++i) {
    rows[i].assign(i + 1, 0.0);
    double acc = 0.0;
    for (int c = i; c >= 0; --c) {
      acc += problem.mu[problem.mu_index(problem.k + i, problem.k + c)].coeff;
      rows[i][c] = acc;
    }
  }

  struct Incumbent {
    double cost = std::numeric_limits<double>::infinity();
    int sends = 0;
    std::vector<std::uint8_t> bits;
    bool valid = false;
  } incumbent;
  if (incumbent_hint) {
    require(incumbent_hint->schedule.k == problem.k &&
                incumbent_hint->schedule.length() == len,
            ErrorCode::WindowMismatch, "incumbent hint window mismatch");
    incumbent.cost = incumbent_hint->objective;
    incumbent.sends = incumbent_hint->schedule.send_count();
    incumbent.bits = incumbent_hint->schedule.theta_bar;
    incumbent.valid = true;
  }

  long long nodes = 0;
  std::vector<std::uint8_t> prefix;
  prefix.reserve(len);

  // i = next undecided index, last = index of the latest send within the
  // prefix (-1 if none), err = decided error cost, sends = decided sends.
  const auto dfs = [&](auto&& self, int i, int last, double err,
                       int sends) -> void {
    ++nodes;
    const double bound = err + problem.lambda * sends;
    if (trace) trace->push_back({prefix, bound});
    if (i == len) {
      if (!incumbent.valid ||
          detail::candidate_beats(bound, sends, prefix, incumbent.cost,
                                  incumbent.sends, incumbent.bits)) {
        incumbent = {bound, sends, prefix, true};
      }
      return;
    }
    if (incumbent.valid && bound >= incumbent.cost - kTieTol) return;

    const double stage_if_skip = rows[i][last + 1];
    const bool send_first = stage_if_skip >= problem.lambda;
    for (int branch = 0; branch < 2; ++branch) {
      const bool send = (branch == 0) == send_first;
      prefix.push_back(send ? 0 : 1);
      if (send) {
        self(self, i + 1, i, err, sends + 1);
      } else {
        self(self, i + 1, last, err + stage_if_skip, sends);
      }
      prefix.pop_back();
    }
  };
  dfs(dfs, 0, -1, 0.0, 0);

  SolveResult out;
  out.schedule = ScheduleVector{problem.k, incumbent.bits};
  out.objective = evaluate_schedule(problem, out.schedule);
  out.nodes_explored = nodes;
  out.wall_time_s = watch.seconds();
  return out;
}

// ---------------------------------------------------------------------------
// Cross-validation of the three solution paths.
// ---------------------------------------------------------------------------

struct CrossValidateReport {
  SolveResult brute;
  SolveResult dp;
  SolveResult bnb;
  double max_objective_gap = 0.0;       // worst pairwise disagreement
  double max_recursion_gap = 0.0;       // worst claimed-vs-recursion gap
  bool ok = false;
};

class CrossValidateError : public Error {
 public:
  CrossValidateError(const std::string& what, CrossValidateReport report)
      : Error(ErrorCode::OracleDisagreement, what), report_(std::move(report)) {}
  const CrossValidateReport& report() const { return report_; }

 private:
  CrossValidateReport report_;
};

inline double relative_gap(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// Solves the window three ways and checks (a) pairwise objective agreement
// within 1e-9 relative and (b) that each schedule achieves its claimed
// objective under the matrix recursion. Throws OracleDisagreement otherwise.
inline CrossValidateReport cross_validate(const SystemModel& model,
                                          const GainSchedule& gains, int k,
                                          const Vector& e_s, double lambda) {
  const KernelTable table =
      build_noise_kernels(gains, model, k).bind_error(e_s);
  CrossValidateReport report;
  report.brute = solve_bruteforce(table, lambda);
  report.dp = solve_dp(table, lambda);
  report.bnb = solve_bnb(build_milp(table, lambda));

  report.max_objective_gap = std::max(
      {relative_gap(report.brute.objective, report.dp.objective),
       relative_gap(report.brute.objective, report.bnb.objective),
       relative_gap(report.dp.objective, report.bnb.objective)});

  SystemModel priced = model;
  priced.lambda = lambda;
  for (const SolveResult* r : {&report.brute, &report.dp, &report.bnb}) {
    const double recur =
        cost_matrix_recursion(priced, gains, k, e_s, r->schedule);
    report.max_recursion_gap = std::max(
        report.max_recursion_gap, relative_gap(recur, r->objective));
  }

  report.ok = report.max_objective_gap <= 1e-9 && report.max_recursion_gap <= 1e-9;
  if (!report.ok) {
    throw CrossValidateError(
        "solver cross-validation failed: objective gap " +
            std::to_string(report.max_objective_gap) + ", recursion gap " +
            std::to_string(report.max_recursion_gap),
        report);
  }
  return report;
}

}  // namespace etlqg
