#pragma once

#include <string>

#include "etlqg/linalg.hpp"
#include "etlqg/riccati.hpp"
#include "etlqg/solver.hpp"

namespace etlqg {

enum class Verdict { Send, Skip, Indeterminate };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Send: return "Send";
    case Verdict::Skip: return "Skip";
    case Verdict::Indeterminate: return "Indeterminate";
  }
  return "?";
}

// One-step certificate for the benefit of sending at k (skip-minus-send cost
// difference). The benefit is sandwiched by
//   e^T Gamma_k e - lambda  <=  Ben_k  <=  e^T W_k e - lambda,
// so a nonnegative lower bound proves sending optimal and a nonpositive upper
// bound proves skipping optimal, without solving the window. The boundary
// where a bound is exactly zero resolves toward Skip (weak optimality, fewer
// transmissions).
struct CertificateDecision {
  Verdict verdict = Verdict::Indeterminate;
  double lower = 0.0;  // e^T Gamma_k e - lambda
  double upper = 0.0;  // e^T W_k e - lambda
};

inline CertificateDecision evaluate_certificate(const Vector& e_s,
                                                const Matrix& Gamma_k,
                                                const Matrix& W_k,
                                                double lambda) {
  CertificateDecision d;
  d.lower = quadratic_form(e_s, Gamma_k) - lambda;
  d.upper = quadratic_form(e_s, W_k) - lambda;
  if (d.upper <= 0.0) {
    d.verdict = Verdict::Skip;
  } else if (d.lower >= 0.0) {
    d.verdict = Verdict::Send;
  } else {
    d.verdict = Verdict::Indeterminate;
  }
  return d;
}

struct SoundnessReport {
  CertificateDecision decision;
  double best_cost_sending = 0.0;   // optimum over schedules with a send at k
  double best_cost_skipping = 0.0;  // optimum over schedules skipping at k
  bool pass = true;
};

// Verifies a certificate verdict against exhaustive enumeration: a Send
// verdict must admit an optimal schedule that sends at k, a Skip verdict one
// that skips at k. Indeterminate asserts nothing. Throws SoundnessViolation
// on failure.
inline SoundnessReport certificate_soundness_check(const SystemModel& model,
                                                   const GainSchedule& gains,
                                                   int k, const Vector& e_s,
                                                   double lambda) {
  const int len = model.T - k;
  require(len <= 22, ErrorCode::WindowTooLarge,
          "soundness check needs a brute-force-solvable window");
  require(static_cast<int>(gains.W.size()) == model.T,
          ErrorCode::InvalidArgument, "gain schedule lacks tail Gramians");
  const KernelTable table =
      build_noise_kernels(gains, model, k).bind_error(e_s);

  SoundnessReport report;
  report.decision =
      evaluate_certificate(e_s, gains.Gamma[k], gains.W[k], lambda);

  double best_send = std::numeric_limits<double>::infinity();
  double best_skip = std::numeric_limits<double>::infinity();
  ScheduleVector sched{k, std::vector<std::uint8_t>(len, 0)};
  for (std::uint64_t v = 0; v < (1ULL << len); ++v) {
    for (int i = 0; i < len; ++i)
      sched.theta_bar[i] = static_cast<std::uint8_t>((v >> (len - 1 - i)) & 1u);
    const double cost = cost_unfolded(table, sched, lambda);
    if (sched.theta_bar[0] == 0) {
      best_send = std::min(best_send, cost);
    } else {
      best_skip = std::min(best_skip, cost);
    }
  }
  report.best_cost_sending = best_send;
  report.best_cost_skipping = best_skip;

  const double tol =
      1e-9 * std::max({1.0, std::abs(best_send), std::abs(best_skip)});
  if (report.decision.verdict == Verdict::Send) {
    report.pass = best_send <= best_skip + tol;
  } else if (report.decision.verdict == Verdict::Skip) {
    report.pass = best_skip <= best_send + tol;
  }
  if (!report.pass) {
    fail(ErrorCode::SoundnessViolation,
         std::string("certificate verdict ") +
             verdict_name(report.decision.verdict) +
             " contradicts enumeration: best sending cost " +
             std::to_string(best_send) + ", best skipping cost " +
             std::to_string(best_skip));
  }
  return report;
}

}  // namespace etlqg
