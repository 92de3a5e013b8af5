#pragma once

#include <vector>

#include "etlqg/linalg.hpp"
#include "etlqg/model.hpp"

namespace etlqg {

// Finite-horizon LQR quantities, one entry per step:
//   P[k]     cost-to-go matrix, P[T] = QT
//   S[k]     = R + B^T P[k+1] B
//   L[k]     = S[k]^{-1} B^T P[k+1] A
//   Gamma[k] = L[k]^T S[k] L[k], the weight that prices estimation error
//   W[k]     = sum_{j=0}^{T-1-k} (A^j)^T Gamma[k+j] A^j, the tail Gramian
//              that prices an error which is never corrected again
// Immutable once built; shared freely across threads.
struct GainSchedule {
  std::vector<Matrix> P;      // T+1 entries
  std::vector<Matrix> S;      // T entries
  std::vector<Matrix> L;      // T entries
  std::vector<Matrix> Gamma;  // T entries
  std::vector<Matrix> W;      // T entries, empty until tail_gramians()

  int horizon() const { return static_cast<int>(S.size()); }
};

// Backward Riccati recursion from P_T = QT. S_k is inverted via Cholesky
// solve, never an explicit inverse; P_k and Gamma_k are re-symmetrized each
// step.
inline GainSchedule compute_gains(const SystemModel& model) {
  const int T = model.T;
  GainSchedule gains;
  gains.P.assign(T + 1, Matrix());
  gains.S.assign(T, Matrix());
  gains.L.assign(T, Matrix());
  gains.Gamma.assign(T, Matrix());

  gains.P[T] = model.QT;
  for (int k = T - 1; k >= 0; --k) {
    const Matrix& Pn = gains.P[k + 1];
    const Matrix S = symmetrized(model.R + model.B.transpose() * Pn * model.B);
    Eigen::LLT<Matrix> llt(S);
    require(llt.info() == Eigen::Success, ErrorCode::SingularS,
            "S_k not positive definite at k=" + std::to_string(k));
    const Matrix L = llt.solve(model.B.transpose() * Pn * model.A);
    gains.S[k] = S;
    gains.L[k] = L;
    gains.Gamma[k] = symmetrized(L.transpose() * S * L);
    gains.P[k] = symmetrized(model.A.transpose() * Pn * model.A + model.Q -
                             model.A.transpose() * Pn * model.B * L);
  }
  return gains;
}

// Fills W by the backward recursion W_{T-1} = Gamma_{T-1},
// W_k = Gamma_k + A^T W_{k+1} A, which telescopes to the explicit sum above.
inline GainSchedule tail_gramians(GainSchedule gains, const Matrix& A, int T) {
  require(T >= 1 && static_cast<int>(gains.Gamma.size()) == T,
          ErrorCode::DimensionMismatch,
          "tail_gramians: Gamma not populated for horizon T");
  require_dims(A, gains.Gamma[0].rows(), gains.Gamma[0].cols(), "A");
  gains.W.assign(T, Matrix());
  gains.W[T - 1] = gains.Gamma[T - 1];
  for (int k = T - 2; k >= 0; --k) {
    gains.W[k] =
        symmetrized(gains.Gamma[k] + A.transpose() * gains.W[k + 1] * A);
  }
  return gains;
}

// Gains plus tail Gramians in one call; computed once per model and cached
// by callers.
inline GainSchedule compute_gain_schedule(const SystemModel& model) {
  return tail_gramians(compute_gains(model), model.A, model.T);
}

}  // namespace etlqg
