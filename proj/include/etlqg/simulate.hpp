#pragma once

#include <cstdio>
#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "etlqg/certificates.hpp"
#include "etlqg/kernels.hpp"
#include "etlqg/milp.hpp"
#include "etlqg/model.hpp"
#include "etlqg/random.hpp"
#include "etlqg/riccati.hpp"
#include "etlqg/solver.hpp"

namespace etlqg {

// Conditional-mean estimator step: the fresh measurement on a send, the
// one-step prediction otherwise.
inline Vector estimator_update(const Vector& xhat_prev, const Vector& u_prev,
                               const Vector& x_k, bool theta_k,
                               const SystemModel& model) {
  require(xhat_prev.size() == model.n() && x_k.size() == model.n(),
          ErrorCode::DimensionMismatch, "estimator_update: state length");
  require(u_prev.size() == model.m(), ErrorCode::DimensionMismatch,
          "estimator_update: input length");
  if (theta_k) return x_k;
  return model.A * xhat_prev + model.B * u_prev;
}

enum class SolverKind { Dp, Bnb, Brute };

inline const char* solver_kind_name(SolverKind s) {
  switch (s) {
    case SolverKind::Dp: return "dp";
    case SolverKind::Bnb: return "bnb";
    case SolverKind::Brute: return "brute";
  }
  return "?";
}

inline SolveResult solve_window(const KernelTable& bound_table, double lambda,
                                SolverKind kind) {
  switch (kind) {
    case SolverKind::Dp: return solve_dp(bound_table, lambda);
    case SolverKind::Bnb: return solve_bnb(build_milp(bound_table, lambda));
    case SolverKind::Brute: return solve_bruteforce(bound_table, lambda);
  }
  fail(ErrorCode::InvalidArgument, "unknown solver kind");
}

// Full-horizon schedule solved once at k = 0. When a realized initial state
// is available the window is bound to e_0 = x0 - x0_mean; the distributional
// variant binds the prior covariance instead.
inline ScheduleVector offline_schedule(const SystemModel& model,
                                       const GainSchedule& gains,
                                       const Vector& x0_realized,
                                       SolverKind kind = SolverKind::Dp) {
  const KernelTable table = build_noise_kernels(gains, model, 0)
                                .bind_error(x0_realized - model.x0_mean);
  return solve_window(table, model.lambda, kind).schedule;
}

inline ScheduleVector offline_schedule_distributional(
    const SystemModel& model, const GainSchedule& gains,
    SolverKind kind = SolverKind::Dp) {
  const KernelTable table =
      build_noise_kernels(gains, model, 0).bind_covariance(model.x0_cov);
  return solve_window(table, model.lambda, kind).schedule;
}

// ---------------------------------------------------------------------------
// Scheduling policies. A policy maps (k, realized scheduler error) to the
// send decision, causally; per-episode state is reset by begin_episode.
// ---------------------------------------------------------------------------

class SchedulerPolicy {
 public:
  virtual ~SchedulerPolicy() = default;
  virtual std::string name() const = 0;
  virtual void begin_episode(const Vector& e0_s) { (void)e0_s; }
  virtual bool decide_send(int k, const Vector& e_s) = 0;
};

class ContinuousPolicy final : public SchedulerPolicy {
 public:
  std::string name() const override { return "continuous"; }
  bool decide_send(int, const Vector&) override { return true; }
};

class OpenLoopPolicy final : public SchedulerPolicy {
 public:
  std::string name() const override { return "openloop"; }
  bool decide_send(int, const Vector&) override { return false; }
};

class PeriodicPolicy final : public SchedulerPolicy {
 public:
  explicit PeriodicPolicy(int period) : period_(period) {
    require(period >= 1, ErrorCode::InvalidArgument, "period must be >= 1");
  }
  std::string name() const override {
    return "periodic" + std::to_string(period_);
  }
  bool decide_send(int k, const Vector&) override { return k % period_ == 0; }

 private:
  int period_;
};

// Fixed schedule from one full-horizon solve. Default mode re-solves per
// episode from the realized initial error; the distributional mode solves
// once from the prior covariance and replays that schedule every episode.
class OfflinePolicy final : public SchedulerPolicy {
 public:
  enum class Mode { RealizedX0, Distributional };

  OfflinePolicy(const SystemModel& model, const GainSchedule& gains,
                Mode mode = Mode::RealizedX0, SolverKind kind = SolverKind::Dp)
      : model_(&model), gains_(&gains), mode_(mode), kind_(kind) {
    table_unbound_ = build_noise_kernels(gains, model, 0);
    if (mode_ == Mode::Distributional) {
      schedule_ =
          solve_window(table_unbound_.bind_covariance(model.x0_cov),
                       model.lambda, kind_)
              .schedule;
    }
  }

  std::string name() const override {
    return mode_ == Mode::RealizedX0 ? "offline" : "offline-dist";
  }

  void begin_episode(const Vector& e0_s) override {
    if (mode_ == Mode::RealizedX0) {
      schedule_ = solve_window(table_unbound_.bind_error(e0_s),
                               model_->lambda, kind_)
                      .schedule;
    }
  }

  bool decide_send(int k, const Vector&) override {
    return schedule_.send_at(k);
  }

  const ScheduleVector& schedule() const { return schedule_; }

 private:
  const SystemModel* model_;
  const GainSchedule* gains_;
  Mode mode_;
  SolverKind kind_;
  KernelTable table_unbound_;
  ScheduleVector schedule_;
};

// Receding-horizon scheduler: at each step the one-step certificate decides
// when it can; only the indeterminate regime solves the remaining-horizon
// window (first action applied, the rest discarded).
class MpcPolicy final : public SchedulerPolicy {
 public:
  struct Stats {
    long long steps = 0;
    long long certificate_decisions = 0;
    long long solves = 0;
  };

  MpcPolicy(const SystemModel& model, const GainSchedule& gains,
            const std::vector<KernelTable>& window_tables,
            SolverKind kind = SolverKind::Dp, bool cross_check = false)
      : model_(&model),
        gains_(&gains),
        tables_(&window_tables),
        kind_(kind),
        cross_check_(cross_check) {
    require(static_cast<int>(window_tables.size()) == model.T,
            ErrorCode::InvalidArgument,
            "need one kernel table per window start");
    require(static_cast<int>(gains.W.size()) == model.T,
            ErrorCode::InvalidArgument, "gain schedule lacks tail Gramians");
  }

  std::string name() const override { return "mpc"; }

  void begin_episode(const Vector&) override { stats_ = {}; }

  bool decide_send(int k, const Vector& e_s) override {
    ++stats_.steps;
    const CertificateDecision cert =
        evaluate_certificate(e_s, gains_->Gamma[k], gains_->W[k], model_->lambda);
    if (cert.verdict == Verdict::Send) {
      ++stats_.certificate_decisions;
      return true;
    }
    if (cert.verdict == Verdict::Skip) {
      ++stats_.certificate_decisions;
      return false;
    }
    ++stats_.solves;
    const KernelTable bound = (*tables_)[k].bind_error(e_s);
    if (cross_check_) {
      if (model_->T - k <= 22) {
        cross_validate(*model_, *gains_, k, e_s, model_->lambda);
      } else {
        // Windows beyond the enumeration cap: check the two exact solvers
        // against each other.
        const SolveResult dp = solve_dp(bound, model_->lambda);
        const SolveResult bnb = solve_bnb(build_milp(bound, model_->lambda));
        require(relative_gap(dp.objective, bnb.objective) <= 1e-9,
                ErrorCode::OracleDisagreement,
                "dp and branch-and-bound disagree at step " +
                    std::to_string(k));
      }
    }
    const SolveResult res = solve_window(bound, model_->lambda, kind_);
    return res.schedule.send_at(k);
  }

  const Stats& stats() const { return stats_; }

 private:
  const SystemModel* model_;
  const GainSchedule* gains_;
  const std::vector<KernelTable>* tables_;
  SolverKind kind_;
  bool cross_check_;
  Stats stats_;
};

// ---------------------------------------------------------------------------
// Episode simulation.
// ---------------------------------------------------------------------------

// Everything one closed-loop run produces. x has T+1 entries (terminal state
// included); the per-step vectors have T.
struct SimTrace {
  std::uint64_t seed = 0;
  std::string policy;
  std::vector<Vector> x;     // x_0 .. x_T
  std::vector<Vector> xhat;  // conditional means
  std::vector<Vector> es;    // scheduler errors e^s_k
  std::vector<Vector> e;     // estimator errors e_k = (1 - theta_k) e^s_k
  std::vector<Vector> u;
  std::vector<Vector> w;     // process noise applied at each step
  std::vector<std::uint8_t> theta;
  std::vector<double> stage_cost;
  double realized_cost = 0.0;
  int comm_count = 0;
  MpcPolicy::Stats mpc_stats;  // zero for non-MPC policies

  // Re-evaluates the cost functional from the stored trajectory.
  double recompute_cost(const SystemModel& model) const {
    double cost = 0.0;
    for (int k = 0; k < model.T; ++k) {
      cost += quadratic_form(x[k], model.Q) + quadratic_form(u[k], model.R) +
              model.lambda * (theta[k] ? 1.0 : 0.0);
    }
    cost += quadratic_form(x[model.T], model.QT);
    return cost;
  }
};

// Simulates one episode under u_k = -L_k xhat_k with the given scheduling
// policy. Convention at k = 0: the pre-measurement predictor is the prior
// mean, so e_0^s = x_0 - x0_mean.
inline SimTrace run_episode(const SystemModel& model, const GainSchedule& gains,
                            SchedulerPolicy& policy, std::uint64_t seed) {
  const int T = model.T;
  NoiseStream noise(model, seed);

  SimTrace trace;
  trace.seed = seed;
  trace.policy = policy.name();
  trace.x.reserve(T + 1);
  trace.xhat.reserve(T);
  trace.es.reserve(T);
  trace.e.reserve(T);
  trace.u.reserve(T);
  trace.w.reserve(T);
  trace.theta.reserve(T);
  trace.stage_cost.reserve(T);

  Vector x = noise.draw_x0();
  Vector pred = model.x0_mean;  // one-step prediction of x_k
  policy.begin_episode(x - model.x0_mean);

  for (int k = 0; k < T; ++k) {
    const Vector e_s = x - pred;
    const bool send = policy.decide_send(k, e_s);
    const Vector xhat = send ? x : pred;
    const Vector u = -(gains.L[k] * xhat);
    const double stage = quadratic_form(x, model.Q) +
                         quadratic_form(u, model.R) +
                         (send ? model.lambda : 0.0);
    const Vector w = noise.draw_w();

    trace.x.push_back(x);
    trace.es.push_back(e_s);
    trace.theta.push_back(send ? 1 : 0);
    trace.e.push_back(send ? Vector(Vector::Zero(model.n())) : e_s);
    trace.xhat.push_back(xhat);
    trace.u.push_back(u);
    trace.w.push_back(w);
    trace.stage_cost.push_back(stage);
    trace.realized_cost += stage;
    trace.comm_count += send ? 1 : 0;

    x = model.A * x + model.B * u + w;
    pred = model.A * xhat + model.B * u;
  }
  trace.x.push_back(x);
  trace.realized_cost += quadratic_form(x, model.QT);

  if (const auto* mpc = dynamic_cast<const MpcPolicy*>(&policy)) {
    trace.mpc_stats = mpc->stats();
  }
  return trace;
}

// CSV serialization: one row per step k = 0..T-1 with header
// k,x[0..n),xhat[0..n),es[0..n),theta,u[0..m),stage_cost.
inline void write_trace_csv(const SimTrace& trace, const SystemModel& model,
                            std::ostream& os) {
  const int n = model.n();
  const int m = model.m();
  os << "k";
  for (int i = 0; i < n; ++i) os << ",x" << i;
  for (int i = 0; i < n; ++i) os << ",xhat" << i;
  for (int i = 0; i < n; ++i) os << ",es" << i;
  os << ",theta";
  for (int i = 0; i < m; ++i) os << ",u" << i;
  os << ",stage_cost\n";

  char buf[32];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    os << ',' << buf;
  };
  for (int k = 0; k < model.T; ++k) {
    os << k;
    for (int i = 0; i < n; ++i) put(trace.x[k](i));
    for (int i = 0; i < n; ++i) put(trace.xhat[k](i));
    for (int i = 0; i < n; ++i) put(trace.es[k](i));
    os << ',' << int(trace.theta[k]);
    for (int i = 0; i < m; ++i) put(trace.u[k](i));
    put(trace.stage_cost[k]);
    os << '\n';
  }
}

}  // namespace etlqg
