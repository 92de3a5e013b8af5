#include "etlqg/riccati.hpp"

#include <gtest/gtest.h>

#include "etlqg/random.hpp"
#include "etlqg/selftest.hpp"
#include "tests/helpers.hpp"

namespace etlqg {
namespace {

// Scalar A=B=Q=R=QT=1, T=2: the recursion P_k = 1 + P_{k+1}/(1+P_{k+1})
// gives P = (1.6, 1.5, 1), S = (2.5, 2), L = (0.6, 0.5), Gamma = (0.9, 0.5).
TEST(Riccati, ScalarHandExample) {
  const SystemModel m = test::scalar_example_model();
  const GainSchedule g = compute_gains(m);
  EXPECT_NEAR(g.P[2](0, 0), 1.0, 1e-15);
  EXPECT_NEAR(g.P[1](0, 0), 1.5, 1e-15);
  EXPECT_NEAR(g.P[0](0, 0), 1.6, 1e-15);
  EXPECT_NEAR(g.S[1](0, 0), 2.0, 1e-15);
  EXPECT_NEAR(g.S[0](0, 0), 2.5, 1e-15);
  EXPECT_NEAR(g.L[1](0, 0), 0.5, 1e-15);
  EXPECT_NEAR(g.L[0](0, 0), 0.6, 1e-15);
  EXPECT_NEAR(g.Gamma[1](0, 0), 0.5, 1e-15);
  EXPECT_NEAR(g.Gamma[0](0, 0), 0.9, 1e-14);
}

TEST(Riccati, TerminalConditionExact) {
  const SystemModel m = test::double_integrator_model();
  const GainSchedule g = compute_gains(m);
  EXPECT_TRUE(g.P[m.T].isApprox(m.QT, 0.0));
}

// B = 0 removes control authority: L = Gamma = 0 and P is the pure Lyapunov
// accumulation sum_j (A^j)^T Q A^j + (A^{T-k})^T QT A^{T-k}.
TEST(Riccati, NoControlLimit) {
  SystemModel m = test::double_integrator_model();
  m.B = Matrix::Zero(2, 1);
  m.T = 6;
  m = validate_model(m);
  const GainSchedule g = compute_gains(m);
  for (int k = 0; k < m.T; ++k) {
    EXPECT_EQ(g.L[k].norm(), 0.0);
    EXPECT_EQ(g.Gamma[k].norm(), 0.0);
  }
  for (int k = 0; k <= m.T; ++k) {
    Matrix expected = Matrix::Zero(2, 2);
    Matrix apow = Matrix::Identity(2, 2);
    for (int j = k; j < m.T; ++j) {
      expected += apow.transpose() * m.Q * apow;
      apow = m.A * apow;
    }
    expected += apow.transpose() * m.QT * apow;
    EXPECT_LT((g.P[k] - expected).norm(), 1e-10) << "k=" << k;
  }
}

TEST(Riccati, ZeroStateCost) {
  SystemModel m = test::double_integrator_model();
  m.Q = Matrix::Zero(2, 2);
  m.QT = Matrix::Zero(2, 2);
  m = validate_model(m);
  const GainSchedule g = compute_gains(m);
  for (int k = 0; k < m.T; ++k) {
    EXPECT_EQ(g.P[k].norm(), 0.0);
    EXPECT_EQ(g.Gamma[k].norm(), 0.0);
  }
}

TEST(Riccati, CostToGoPsd) {
  CounterRng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const SystemModel m = random_instance(rng, 3, 2, 8);
    const GainSchedule g = compute_gains(m);
    for (int k = 0; k <= m.T; ++k) {
      EXPECT_GE(min_eigenvalue_symmetric(g.P[k]), -1e-9);
    }
  }
}

TEST(TailGramians, LastStepEqualsGamma) {
  const SystemModel m = test::double_integrator_model();
  const GainSchedule g = compute_gain_schedule(m);
  EXPECT_TRUE(g.W[m.T - 1].isApprox(g.Gamma[m.T - 1], 0.0));
}

TEST(TailGramians, ScalarHandExample) {
  const SystemModel m = test::scalar_example_model();
  const GainSchedule g = compute_gain_schedule(m);
  EXPECT_NEAR(g.W[0](0, 0), 1.4, 1e-14);  // Gamma_0 + Gamma_1
  EXPECT_NEAR(g.W[1](0, 0), 0.5, 1e-15);
}

TEST(TailGramians, ZeroGammaGivesZero) {
  SystemModel m = test::double_integrator_model();
  m.Q = Matrix::Zero(2, 2);
  m.QT = Matrix::Zero(2, 2);
  m = validate_model(m);
  const GainSchedule g = compute_gain_schedule(m);
  for (int k = 0; k < m.T; ++k) EXPECT_EQ(g.W[k].norm(), 0.0);
}

// Recursive W equals the explicit sum over matrix powers, for stable and
// unstable A.
TEST(TailGramians, MatchesDirectSum) {
  CounterRng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_below(6));
    const int T = 2 + static_cast<int>(rng.next_below(29));
    const SystemModel m = random_instance(rng, n, 1 + static_cast<int>(rng.next_below(2)), T);
    const GainSchedule g = compute_gain_schedule(m);
    for (int k = 0; k < T; ++k) {
      Matrix direct = Matrix::Zero(n, n);
      Matrix apow = Matrix::Identity(n, n);
      for (int j = 0; j + k < T; ++j) {
        direct += apow.transpose() * g.Gamma[k + j] * apow;
        apow = m.A * apow;
      }
      const double scale = std::max(1.0, direct.norm());
      EXPECT_LT((g.W[k] - direct).norm() / scale, 1e-10)
          << "trial=" << trial << " k=" << k;
    }
  }
}

// x^T W_k x >= x^T Gamma_k x: the tail Gramian dominates in the Loewner order.
TEST(TailGramians, DominatesGamma) {
  CounterRng rng(37);
  int checked = 0;
  while (checked < 10000) {
    const int n = 1 + static_cast<int>(rng.next_below(4));
    const SystemModel m =
        random_instance(rng, n, 1, 3 + static_cast<int>(rng.next_below(8)));
    const GainSchedule g = compute_gain_schedule(m);
    for (int rep = 0; rep < 50; ++rep) {
      const int k = static_cast<int>(rng.next_below(m.T));
      const Vector x = rng.next_normal_vector(n);
      const double gamma_form = quadratic_form(x, g.Gamma[k]);
      const double w_form = quadratic_form(x, g.W[k]);
      EXPECT_GE(w_form, gamma_form - 1e-9 * std::max(1.0, std::abs(w_form)));
      ++checked;
    }
  }
}

TEST(Riccati, SingularSDetected) {
  // Bypass validate_model to hit the internal guard directly.
  SystemModel m = test::scalar_example_model();
  m.R(0, 0) = -1.0;
  m.Q(0, 0) = 0.0;
  m.QT(0, 0) = 0.0;
  try {
    compute_gains(m);
    FAIL() << "expected SingularS";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularS);
  }
}

}  // namespace
}  // namespace etlqg
