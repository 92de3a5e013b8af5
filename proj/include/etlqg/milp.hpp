#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "etlqg/kernels.hpp"
#include "etlqg/linalg.hpp"
#include "etlqg/model.hpp"
#include "etlqg/riccati.hpp"

namespace etlqg {

// Binary skip indicators over a window [k, T-1]: theta_bar[t] = 1 means no
// transmission at time t (the complement of the send decision theta).
struct ScheduleVector {
  int k = 0;
  std::vector<std::uint8_t> theta_bar;

  int length() const { return static_cast<int>(theta_bar.size()); }
  bool skip_at(int t) const { return theta_bar.at(t - k) != 0; }
  bool send_at(int t) const { return !skip_at(t); }

  int send_count() const {
    int sends = 0;
    for (auto b : theta_bar) sends += (b == 0);
    return sends;
  }

  // theta_bar read as a binary number, earliest step most significant; used
  // only for deterministic tie-breaking.
  std::uint64_t lex_value() const {
    std::uint64_t v = 0;
    for (auto b : theta_bar) v = (v << 1) | (b ? 1u : 0u);
    return v;
  }
};

inline ScheduleVector all_skip_schedule(int k, int len) {
  return {k, std::vector<std::uint8_t>(len, 1)};
}

inline ScheduleVector all_send_schedule(int k, int len) {
  return {k, std::vector<std::uint8_t>(len, 0)};
}

// ---------------------------------------------------------------------------
// Schedule-cost evaluators. Two independent routes to the same number: the
// covariance matrix recursion and the unfolded kernel expansion. Each serves
// as the oracle for the other in the test suite.
// ---------------------------------------------------------------------------

// Window cost by running the covariance recursion
//   Sigma_k = theta_bar_k * e e^T,
//   Sigma_{t+1} = theta_bar_{t+1} (A Sigma_t A^T + Sigma_w)
// and accumulating tr(Gamma_t Sigma_t) + lambda (1 - theta_bar_t). O(n^3) per
// stage; used as the slow reference path and in benchmarks.
inline double cost_matrix_recursion(const SystemModel& model,
                                    const GainSchedule& gains, int k,
                                    const Vector& e_s,
                                    const ScheduleVector& sched,
                                    MatrixWorkspace* ws = nullptr) {
  require(sched.k == k, ErrorCode::WindowMismatch,
          "schedule window start does not match k");
  require(sched.length() == model.T - k, ErrorCode::WindowMismatch,
          "schedule length does not span [k, T-1]");
  require(e_s.size() == model.n(), ErrorCode::DimensionMismatch,
          "cost_matrix_recursion: error vector has wrong length");

  MatrixWorkspace local;
  MatrixWorkspace& w = ws ? *ws : local;
  w.resize(model.n());

  Matrix& sigma = w.tmp_nn_a;
  sigma.setZero();
  if (sched.skip_at(k)) sigma = e_s * e_s.transpose();
  double cost = 0.0;
  for (int t = k; t < model.T; ++t) {
    cost += trace_product(gains.Gamma[t], sigma);
    cost += model.lambda * (sched.send_at(t) ? 1.0 : 0.0);
    if (t + 1 < model.T) {
      if (sched.skip_at(t + 1)) {
        w.tmp_nn_b.noalias() = model.A * sigma;
        sigma.noalias() = w.tmp_nn_b * model.A.transpose();
        sigma += model.Sigma_w;
        sigma = symmetrized(sigma);
      } else {
        sigma.setZero();
      }
    }
  }
  return cost;
}

// Window cost from a bound kernel table:
//   sum_t sum_tau (prod_{s=tau}^{t} theta_bar_s) g[t][tau] + lambda * sends.
// Running products make this O((T-k)^2) scalar work, independent of n.
inline double cost_unfolded(const KernelTable& table,
                            const ScheduleVector& sched, double lambda) {
  require(table.is_bound(), ErrorCode::WindowMismatch,
          "cost_unfolded needs a bound kernel table");
  require(sched.k == table.window_start(), ErrorCode::WindowMismatch,
          "schedule window start does not match the kernel table");
  require(sched.length() == table.window_length(), ErrorCode::WindowMismatch,
          "schedule length does not match the kernel table");

  const int k = table.window_start();
  const int T = table.horizon();
  double cost = 0.0;
  for (int t = k; t < T; ++t) {
    // The monomial prod_{s=tau}^{t} theta_bar_s is 1 exactly until the most
    // recent send, scanning tau downward, and 0 from there on.
    for (int tau = t; tau >= k; --tau) {
      if (sched.send_at(tau)) break;
      cost += table.coeff(t, tau);
    }
    cost += lambda * (sched.send_at(t) ? 1.0 : 0.0);
  }
  return cost;
}

// ---------------------------------------------------------------------------
// MILP form: binary monomials mu[t][tau] = prod_{s=tau}^{t} theta_bar_s made
// linear by the (exact on binaries) McCormick inequalities
//   mu <= theta_bar_s for all s in [tau, t],
//   mu >= sum_{s=tau}^{t} theta_bar_s - (t - tau).
// ---------------------------------------------------------------------------

struct MilpProblem {
  int k = 0;
  int T = 0;
  double lambda = 0.0;

  // mu variables enumerate pairs (t, tau), t ascending, tau ascending.
  struct MuVar {
    int t;
    int tau;
    double coeff;  // objective coefficient g[t][tau]
  };
  std::vector<MuVar> mu;
  double theta_coeff = 0.0;  // objective coefficient of every theta_bar: -lambda
  double constant = 0.0;     // lambda * (T - k)

  int window_length() const { return T - k; }
  int num_theta() const { return T - k; }
  int num_mu() const { return static_cast<int>(mu.size()); }

  int mu_index(int t, int tau) const {
    require(t >= k && t <= T - 1 && tau >= k && tau <= t,
            ErrorCode::InvalidArgument, "mu_index: pair out of range");
    const int i = t - k;
    return i * (i + 1) / 2 + (tau - k);
  }

  int num_upper_constraints() const {
    int rows = 0;
    for (const auto& v : mu) rows += v.t - v.tau + 1;
    return rows;
  }
  int num_lower_constraints() const { return num_mu(); }
};

inline MilpProblem build_milp(const KernelTable& table, double lambda) {
  require(table.is_bound(), ErrorCode::WindowMismatch,
          "build_milp needs a bound kernel table");
  MilpProblem p;
  p.k = table.window_start();
  p.T = table.horizon();
  p.lambda = lambda;
  p.theta_coeff = -lambda;
  p.constant = lambda * table.window_length();
  for (int t = p.k; t < p.T; ++t)
    for (int tau = p.k; tau <= t; ++tau)
      p.mu.push_back({t, tau, table.coeff(t, tau)});
  return p;
}

// Feasibility of a full binary assignment plus its linear objective value.
struct AssignmentCheck {
  bool feasible = false;
  double objective = 0.0;
};

inline AssignmentCheck check_assignment(const MilpProblem& p,
                                        const std::vector<std::uint8_t>& theta_bar,
                                        const std::vector<std::uint8_t>& mu) {
  require(static_cast<int>(theta_bar.size()) == p.num_theta(),
          ErrorCode::LengthMismatch, "theta_bar length mismatch");
  require(static_cast<int>(mu.size()) == p.num_mu(), ErrorCode::LengthMismatch,
          "mu length mismatch");

  AssignmentCheck out;
  out.objective = p.constant;
  for (int i = 0; i < p.num_theta(); ++i)
    out.objective += p.theta_coeff * (theta_bar[i] ? 1.0 : 0.0);
  for (int v = 0; v < p.num_mu(); ++v)
    out.objective += p.mu[v].coeff * (mu[v] ? 1.0 : 0.0);

  out.feasible = true;
  for (int v = 0; v < p.num_mu(); ++v) {
    const auto& var = p.mu[v];
    int sum = 0;
    for (int s = var.tau; s <= var.t; ++s) {
      const int th = theta_bar[s - p.k] ? 1 : 0;
      sum += th;
      if (mu[v] > th) out.feasible = false;  // mu <= theta_bar_s
    }
    if (mu[v] < sum - (var.t - var.tau)) out.feasible = false;  // lower bound
  }
  return out;
}

// The mu completion implied by a binary theta_bar assignment (the monomial
// products themselves).
inline std::vector<std::uint8_t> implied_mu(const MilpProblem& p,
                                            const std::vector<std::uint8_t>& theta_bar) {
  require(static_cast<int>(theta_bar.size()) == p.num_theta(),
          ErrorCode::LengthMismatch, "theta_bar length mismatch");
  std::vector<std::uint8_t> mu(p.num_mu());
  for (int v = 0; v < p.num_mu(); ++v) {
    const auto& var = p.mu[v];
    std::uint8_t prod = 1;
    for (int s = var.tau; s <= var.t && prod; ++s)
      prod = theta_bar[s - p.k] ? 1 : 0;
    mu[v] = prod;
  }
  return mu;
}

// Objective of a schedule under the MILP coefficients (mu set to the implied
// products). Equals cost_unfolded on the table the problem was built from.
inline double evaluate_schedule(const MilpProblem& p,
                                const ScheduleVector& sched) {
  require(sched.k == p.k && sched.length() == p.window_length(),
          ErrorCode::WindowMismatch, "schedule does not match problem window");
  double obj = p.constant;
  for (int i = 0; i < p.num_theta(); ++i)
    obj += p.theta_coeff * (sched.theta_bar[i] ? 1.0 : 0.0);
  for (const auto& var : p.mu) {
    bool prod = true;
    for (int s = var.tau; s <= var.t && prod; ++s)
      prod = sched.theta_bar[s - p.k] != 0;
    if (prod) obj += var.coeff;
  }
  return obj;
}

// LP-format text (Minimize / Subject To / Binary) for external cross-checks.
inline std::string to_lp_string(const MilpProblem& p) {
  std::ostringstream os;
  os.precision(17);
  os << "\\ Event-triggered scheduling window [" << p.k << ", " << p.T - 1
     << "]\n";
  os << "Minimize\n obj:";
  for (const auto& var : p.mu) {
    os << " + " << var.coeff << " mu_" << var.t << "_" << var.tau;
  }
  for (int t = p.k; t < p.T; ++t) os << " - " << p.lambda << " tb_" << t;
  os << " + " << p.constant << "\n";
  os << "Subject To\n";
  for (const auto& var : p.mu) {
    for (int s = var.tau; s <= var.t; ++s) {
      os << " ub_" << var.t << "_" << var.tau << "_" << s << ": mu_" << var.t
         << "_" << var.tau << " - tb_" << s << " <= 0\n";
    }
    os << " lb_" << var.t << "_" << var.tau << ": mu_" << var.t << "_"
       << var.tau;
    for (int s = var.tau; s <= var.t; ++s) os << " - tb_" << s;
    os << " >= " << -(var.t - var.tau) << "\n";
  }
  os << "Binary\n";
  for (int t = p.k; t < p.T; ++t) os << " tb_" << t << "\n";
  for (const auto& var : p.mu) os << " mu_" << var.t << "_" << var.tau << "\n";
  os << "End\n";
  return os.str();
}

}  // namespace etlqg
