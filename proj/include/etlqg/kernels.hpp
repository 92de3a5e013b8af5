#pragma once

#include <vector>

#include "etlqg/linalg.hpp"
#include "etlqg/model.hpp"
#include "etlqg/riccati.hpp"

namespace etlqg {

// Scalar coefficients of the unfolded covariance expansion for the scheduling
// window [k, T-1]. For stage t and source index tau the coefficient
//
//   g[t][tau] = tr(Gamma_t A^{t-tau} Sigma_w (A^{t-tau})^T)   for tau >= k+1
//   g[t][k]   = e^T (A^{t-k})^T Gamma_t A^{t-k} e             once bound
//
// prices the covariance injected at time tau and still alive at t. The noise
// part and the matrices H[t] = (A^{t-k})^T Gamma_t A^{t-k} depend only on the
// model and are precomputed once per window; binding a realized error (or an
// initial covariance) fills the tau = k column and is the only per-step work
// in the receding-horizon loop.
class KernelTable {
 public:
  KernelTable() = default;

  KernelTable(const GainSchedule& gains, const SystemModel& model, int k)
      : k_(k), T_(model.T), n_(model.n()) {
    require(k >= 0 && k <= T_ - 1, ErrorCode::InvalidArgument,
            "kernel window start must satisfy 0 <= k <= T-1");
    require(static_cast<int>(gains.Gamma.size()) == T_,
            ErrorCode::DimensionMismatch,
            "gain schedule does not match the model horizon");
    const int len = T_ - k;
    h_.resize(len);
    g_.resize(len);
    for (int i = 0; i < len; ++i) g_[i].assign(i + 1, 0.0);

    // Forward powering: one matrix product per step for A^j, plus the two
    // congruences per stage.
    Matrix Apow = Matrix::Identity(n_, n_);       // A^j
    std::vector<Matrix> noise(len);               // A^j Sigma_w (A^j)^T
    for (int j = 0; j < len; ++j) {
      if (j > 0) Apow = model.A * Apow;
      h_[j] = symmetrized(Apow.transpose() * gains.Gamma[k + j] * Apow);
      noise[j] = symmetrized(Apow * model.Sigma_w * Apow.transpose());
    }
    for (int i = 0; i < len; ++i) {       // stage t = k + i
      for (int c = 1; c <= i; ++c) {      // source tau = k + c >= k+1
        g_[i][c] = trace_product(gains.Gamma[k + i], noise[i - c]);
      }
    }
  }

  int window_start() const { return k_; }
  int horizon() const { return T_; }
  int window_length() const { return T_ - k_; }
  int state_dim() const { return n_; }
  bool is_bound() const { return bound_; }

  const Matrix& H_matrix(int t) const { return h_[check_stage(t)]; }

  // tau >= k+1 column (model-only part).
  double noise_kernel(int t, int tau) const {
    const int i = check_stage(t);
    require(tau >= k_ + 1 && tau <= t, ErrorCode::InvalidArgument,
            "noise_kernel: tau out of range");
    return g_[i][tau - k_];
  }

  // tau = k column; requires a bound table.
  double init_cost(int t) const {
    require(bound_, ErrorCode::WindowMismatch,
            "kernel table not bound to an error realization");
    return g_[check_stage(t)][0];
  }

  // g[t][tau] with the tau = k column included.
  double coeff(int t, int tau) const {
    const int i = check_stage(t);
    require(tau >= k_ && tau <= t, ErrorCode::InvalidArgument,
            "coeff: tau out of range");
    if (tau == k_) return init_cost(t);
    return g_[i][tau - k_];
  }

  // Returns a copy with the tau = k column set from a realized scheduler
  // error: g[t][k] = e^T H[t] e.
  KernelTable bind_error(const Vector& e_s) const {
    require(e_s.size() == n_, ErrorCode::DimensionMismatch,
            "bind_error: error vector has wrong length");
    KernelTable out = *this;
    for (int i = 0; i < window_length(); ++i)
      out.g_[i][0] = quadratic_form(e_s, h_[i]);
    out.bound_ = true;
    return out;
  }

  // Distributional variant: g[t][k] = tr(H[t] Sigma0). bind_error(e) is the
  // special case Sigma0 = e e^T.
  KernelTable bind_covariance(const Matrix& sigma0) const {
    require_dims(sigma0, n_, n_, "sigma0");
    KernelTable out = *this;
    for (int i = 0; i < window_length(); ++i)
      out.g_[i][0] = trace_product(h_[i], symmetrized(sigma0));
    out.bound_ = true;
    return out;
  }

 private:
  int check_stage(int t) const {
    require(t >= k_ && t <= T_ - 1, ErrorCode::InvalidArgument,
            "stage index out of window");
    return t - k_;
  }

  int k_ = 0;
  int T_ = 0;
  int n_ = 0;
  bool bound_ = false;
  std::vector<Matrix> h_;
  std::vector<std::vector<double>> g_;
};

inline KernelTable build_noise_kernels(const GainSchedule& gains,
                                       const SystemModel& model, int k) {
  return KernelTable(gains, model, k);
}

// Tables for every window start, built once up front for the receding-horizon
// loop. O(T^3) matrix products total, negligible at the design scale.
inline std::vector<KernelTable> build_all_windows(const GainSchedule& gains,
                                                  const SystemModel& model) {
  std::vector<KernelTable> tables;
  tables.reserve(model.T);
  for (int k = 0; k < model.T; ++k) tables.emplace_back(gains, model, k);
  return tables;
}

}  // namespace etlqg
