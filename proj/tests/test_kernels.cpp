#include "etlqg/kernels.hpp"

#include <gtest/gtest.h>

#include "etlqg/milp.hpp"
#include "etlqg/selftest.hpp"
#include "tests/helpers.hpp"

namespace etlqg {
namespace {

TEST(Kernels, ScalarNoiseEntry) {
  const SystemModel m = test::scalar_example_model();
  const GainSchedule g = compute_gain_schedule(m);
  const KernelTable t = build_noise_kernels(g, m, 0);
  EXPECT_NEAR(t.noise_kernel(1, 1), 0.25, 1e-15);  // tr(0.5 * 0.5)
}

TEST(Kernels, ZeroNoiseZeroKernels) {
  SystemModel m = test::double_integrator_model();
  m.Sigma_w = Matrix::Zero(2, 2);
  m = validate_model(m);
  const GainSchedule g = compute_gain_schedule(m);
  const KernelTable t = build_noise_kernels(g, m, 0);
  for (int stage = 0; stage < m.T; ++stage)
    for (int tau = 1; tau <= stage; ++tau)
      EXPECT_EQ(t.noise_kernel(stage, tau), 0.0);
}

TEST(Kernels, HeadMatrixIsGamma) {
  const SystemModel m = test::double_integrator_model();
  const GainSchedule g = compute_gain_schedule(m);
  for (int k : {0, 7, 24}) {
    const KernelTable t = build_noise_kernels(g, m, k);
    EXPECT_LT((t.H_matrix(k) - g.Gamma[k]).norm(), 1e-12);
  }
}

TEST(BindError, ZeroErrorZeroInitCosts) {
  const SystemModel m = test::double_integrator_model();
  const GainSchedule g = compute_gain_schedule(m);
  const KernelTable t =
      build_noise_kernels(g, m, 3).bind_error(Vector::Zero(2));
  for (int stage = 3; stage < m.T; ++stage) EXPECT_EQ(t.init_cost(stage), 0.0);
}

TEST(BindError, ScalarHandValues) {
  const SystemModel m = test::scalar_example_model();
  const GainSchedule g = compute_gain_schedule(m);
  const KernelTable t =
      build_noise_kernels(g, m, 0).bind_error(test::scalar_vec(2.0));
  EXPECT_NEAR(t.init_cost(0), 3.6, 1e-14);  // 0.9 * 4
  EXPECT_NEAR(t.init_cost(1), 2.0, 1e-14);  // 0.5 * 4
}

TEST(BindError, NullSpaceErrorGivesZeros) {
  // B spans only the second state, Q weights only the first; choose an error
  // direction orthogonal to every H[t] by using a rank-one Gamma.
  SystemModel m = test::double_integrator_model();
  m.A = Matrix::Identity(2, 2);
  m.T = 4;
  m = validate_model(m);
  const GainSchedule g = compute_gain_schedule(m);
  // With A = I, H[t] = Gamma_t; find a vector in the common null space if one
  // exists. Gamma_t = L_t^T S_t L_t has null space = null(L_t).
  Eigen::FullPivLU<Matrix> lu(g.L[0]);
  const Matrix null_space = lu.kernel();
  ASSERT_GT(null_space.cols(), 0);
  Vector dir = null_space.col(0);
  bool in_all = true;
  for (int t = 0; t < m.T; ++t) {
    if (std::abs(quadratic_form(dir, g.Gamma[t])) > 1e-12) in_all = false;
  }
  if (in_all) {
    const KernelTable table = build_noise_kernels(g, m, 0).bind_error(dir);
    for (int t = 0; t < m.T; ++t) EXPECT_NEAR(table.init_cost(t), 0.0, 1e-12);
  }
}

TEST(BindError, DimensionChecked) {
  const SystemModel m = test::double_integrator_model();
  const GainSchedule g = compute_gain_schedule(m);
  const KernelTable t = build_noise_kernels(g, m, 0);
  try {
    t.bind_error(Vector::Zero(3));
    FAIL() << "expected DimensionMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(Kernels, InitCostMatchesTraceForm) {
  CounterRng rng(47);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_below(4));
    const int T = 2 + static_cast<int>(rng.next_below(8));
    const SystemModel m = random_instance(rng, n, 1, T);
    const GainSchedule g = compute_gain_schedule(m);
    const int k = static_cast<int>(rng.next_below(T));
    const Vector e = rng.next_normal_vector(n);
    const KernelTable t = build_noise_kernels(g, m, k).bind_error(e);
    Matrix apow = Matrix::Identity(n, n);
    for (int stage = k; stage < T; ++stage) {
      const Matrix shifted = apow * e * e.transpose() * apow.transpose();
      const double direct = trace_product(g.Gamma[stage], shifted);
      EXPECT_NEAR(t.init_cost(stage), direct,
                  1e-10 * std::max(1.0, std::abs(direct)));
      apow = m.A * apow;
    }
  }
}

TEST(Kernels, InitCostAtWindowStartIsGammaForm) {
  CounterRng rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const SystemModel m = random_instance(rng, 3, 1, 6);
    const GainSchedule g = compute_gain_schedule(m);
    const int k = static_cast<int>(rng.next_below(m.T));
    const Vector e = rng.next_normal_vector(3);
    const KernelTable t = build_noise_kernels(g, m, k).bind_error(e);
    EXPECT_NEAR(t.init_cost(k), quadratic_form(e, g.Gamma[k]), 1e-12);
  }
}

TEST(Kernels, CoefficientsNonnegative) {
  CounterRng rng(59);
  for (int trial = 0; trial < 30; ++trial) {
    const SystemModel m = random_instance(rng, 2 + static_cast<int>(rng.next_below(3)), 1, 8);
    const GainSchedule g = compute_gain_schedule(m);
    const Vector e = rng.next_normal_vector(m.n());
    const KernelTable t = build_noise_kernels(g, m, 0).bind_error(e);
    for (int stage = 0; stage < m.T; ++stage)
      for (int tau = 0; tau <= stage; ++tau)
        EXPECT_GE(t.coeff(stage, tau), -1e-12);
  }
}

// Per-stage identity between the kernel expansion and the covariance matrix
// recursion, over random schedules and models.
TEST(Kernels, StageCostsMatchMatrixRecursion) {
  CounterRng rng(61);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_below(5));
    const int T = 2 + static_cast<int>(rng.next_below(14));
    const SystemModel m = random_instance(rng, n, 1, T);
    const GainSchedule g = compute_gain_schedule(m);
    const int k = static_cast<int>(rng.next_below(T));
    const Vector e = rng.next_normal_vector(n);
    const KernelTable t = build_noise_kernels(g, m, k).bind_error(e);

    ScheduleVector sched{k, {}};
    sched.theta_bar.resize(T - k);
    for (auto& b : sched.theta_bar)
      b = static_cast<std::uint8_t>(rng.next_below(2));

    // Matrix recursion, stage by stage.
    Matrix sigma = sched.skip_at(k) ? Matrix(e * e.transpose())
                                    : Matrix(Matrix::Zero(n, n));
    for (int stage = k; stage < T; ++stage) {
      const double via_recursion = trace_product(g.Gamma[stage], sigma);
      double via_kernels = 0.0;
      double prod = 1.0;
      for (int tau = stage; tau >= k; --tau) {
        if (sched.send_at(tau)) break;
        via_kernels += prod * t.coeff(stage, tau);
      }
      EXPECT_NEAR(via_kernels, via_recursion,
                  1e-9 * std::max(1.0, std::abs(via_recursion)))
          << "trial=" << trial << " stage=" << stage;
      if (stage + 1 < T) {
        if (sched.skip_at(stage + 1)) {
          sigma = symmetrized(m.A * sigma * m.A.transpose() + m.Sigma_w);
        } else {
          sigma.setZero();
        }
      }
    }
  }
}

}  // namespace
}  // namespace etlqg
