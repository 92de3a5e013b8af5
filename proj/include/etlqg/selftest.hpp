#pragma once

// Built-in randomized self-checks: solver cross-validation over random
// instances and certificate soundness against enumeration. The CLI `selftest`
// subcommand and the acceptance suite both run these.

#include <cmath>
#include <ostream>
#include <string>

#include "etlqg/certificates.hpp"
#include "etlqg/model.hpp"
#include "etlqg/random.hpp"
#include "etlqg/riccati.hpp"
#include "etlqg/solver.hpp"

namespace etlqg {

// Random instance with a stable or unstable A (spectral radius in
// [0.3, 1.3]), random PSD weights, PD R, and PSD process noise.
inline SystemModel random_instance(CounterRng& rng, int n, int m, int T) {
  const auto random_matrix = [&](int rows, int cols) {
    Matrix out(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) out(r, c) = rng.next_normal();
    return out;
  };
  const auto random_psd = [&](int dim, int rank) {
    const Matrix g = random_matrix(dim, rank);
    return Matrix(g * g.transpose() / std::max(1, rank));
  };

  SystemModel model;
  model.A = random_matrix(n, n);
  const double radius = model.A.eigenvalues().cwiseAbs().maxCoeff();
  const double target = rng.uniform(0.3, 1.3);
  if (radius > 1e-12) model.A *= target / radius;
  model.B = random_matrix(n, m);
  model.Q = random_psd(n, n);
  model.QT = random_psd(n, n);
  model.R = random_psd(m, m) + 0.1 * Matrix::Identity(m, m);
  model.Sigma_w = random_psd(n, n);
  model.lambda = std::pow(10.0, rng.uniform(-2.0, 2.0));  // log-uniform
  model.T = T;
  model.x0_mean = Vector::Zero(n);
  model.x0_cov = Matrix::Identity(n, n);
  return validate_model(model);
}

struct SelfTestReport {
  int cross_validate_instances = 0;
  int soundness_instances = 0;
  long long bnb_nodes_total = 0;
  int indeterminate_verdicts = 0;
  bool ok = false;
};

// Cross-validates the three solvers on `instances` random windows
// (n in {1..4}, window length 1..12). Throws OracleDisagreement on the first
// failure.
inline SelfTestReport selftest_solvers(int instances, std::uint64_t seed,
                                       std::ostream* log = nullptr) {
  CounterRng rng(seed);
  SelfTestReport report;
  for (int i = 0; i < instances; ++i) {
    const int n = 1 + static_cast<int>(rng.next_below(4));
    const int m = 1 + static_cast<int>(rng.next_below(2));
    const int len = 1 + static_cast<int>(rng.next_below(12));
    const int T = len + static_cast<int>(rng.next_below(4));
    const int k = T - len;
    const SystemModel model = random_instance(rng, n, m, T);
    const GainSchedule gains = compute_gain_schedule(model);
    Vector e_s(n);
    for (int j = 0; j < n; ++j) e_s(j) = 2.0 * rng.next_normal();
    const CrossValidateReport r =
        cross_validate(model, gains, k, e_s, model.lambda);
    report.bnb_nodes_total += r.bnb.nodes_explored;
    ++report.cross_validate_instances;
  }
  report.ok = true;
  if (log) {
    *log << "solver cross-validation: " << report.cross_validate_instances
         << " instances, no disagreements\n";
  }
  return report;
}

// Certificate soundness on random (model, error, lambda) triples with
// enumerable windows. Throws SoundnessViolation on the first failure.
inline SelfTestReport selftest_certificates(int instances, std::uint64_t seed,
                                            std::ostream* log = nullptr) {
  CounterRng rng(seed);
  SelfTestReport report;
  for (int i = 0; i < instances; ++i) {
    const int n = 1 + static_cast<int>(rng.next_below(3));
    const int m = 1 + static_cast<int>(rng.next_below(2));
    const int T = 2 + static_cast<int>(rng.next_below(9));
    const int k = static_cast<int>(rng.next_below(T));
    const SystemModel model = random_instance(rng, n, m, T);
    const GainSchedule gains = compute_gain_schedule(model);
    Vector e_s(n);
    for (int j = 0; j < n; ++j) e_s(j) = 3.0 * rng.next_normal();
    const SoundnessReport r =
        certificate_soundness_check(model, gains, k, e_s, model.lambda);
    if (r.decision.verdict == Verdict::Indeterminate)
      ++report.indeterminate_verdicts;
    ++report.soundness_instances;
  }
  report.ok = true;
  if (log) {
    *log << "certificate soundness: " << report.soundness_instances
         << " instances, " << report.indeterminate_verdicts
         << " indeterminate (not asserted)\n";
  }
  return report;
}

inline SelfTestReport run_selftest(int solver_instances, int cert_instances,
                                   std::uint64_t seed,
                                   std::ostream* log = nullptr) {
  SelfTestReport a = selftest_solvers(solver_instances, seed, log);
  SelfTestReport b = selftest_certificates(cert_instances, seed + 1, log);
  SelfTestReport out;
  out.cross_validate_instances = a.cross_validate_instances;
  out.bnb_nodes_total = a.bnb_nodes_total;
  out.soundness_instances = b.soundness_instances;
  out.indeterminate_verdicts = b.indeterminate_verdicts;
  out.ok = a.ok && b.ok;
  return out;
}

}  // namespace etlqg
