#include "etlqg/random.hpp"

#include <gtest/gtest.h>

#include "tests/helpers.hpp"

namespace etlqg {
namespace {

TEST(CounterRng, KnownSplitMixSequence) {
  // Reference values for seed 1234567: the published SplitMix64 stream.
  CounterRng rng(1234567);
  EXPECT_EQ(rng.next_u64(), 6457827717110365317ULL);
  EXPECT_EQ(rng.next_u64(), 3203168211198807973ULL);
  EXPECT_EQ(rng.next_u64(), 9817491932198370423ULL);
}

TEST(CounterRng, SameSeedSameStream) {
  CounterRng a(99), b(99);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(CounterRng, DoublesInUnitInterval) {
  CounterRng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double d = rng.next_double();
    EXPECT_GE(d, 0.0);
    EXPECT_LT(d, 1.0);
    const double o = rng.next_double_open();
    EXPECT_GT(o, 0.0);
    EXPECT_LE(o, 1.0);
  }
}

TEST(CounterRng, NormalMomentsRoughlyStandard) {
  CounterRng rng(5);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.next_normal();
    sum += z;
    sumsq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.02);
  EXPECT_NEAR(sumsq / n, 1.0, 0.02);
}

TEST(NoiseStream, BitForBitReproducible) {
  const SystemModel m = test::double_integrator_model();
  NoiseStream a(m, 42), b(m, 42);
  const Vector x0a = a.draw_x0();
  const Vector x0b = b.draw_x0();
  EXPECT_EQ(x0a(0), x0b(0));
  EXPECT_EQ(x0a(1), x0b(1));
  for (int k = 0; k < m.T; ++k) {
    const Vector wa = a.draw_w();
    const Vector wb = b.draw_w();
    EXPECT_EQ(wa(0), wb(0));
    EXPECT_EQ(wa(1), wb(1));
  }
}

TEST(NoiseStream, CovarianceShapesSamples) {
  SystemModel m = test::double_integrator_model();
  m.Sigma_w = Matrix::Zero(2, 2);
  m.Sigma_w(0, 0) = 4.0;  // rank one: second component must stay zero
  m = validate_model(m);
  NoiseStream ns(m, 7);
  ns.draw_x0();
  double var0 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const Vector w = ns.draw_w();
    var0 += w(0) * w(0);
    EXPECT_EQ(w(1), 0.0);
  }
  EXPECT_NEAR(var0 / n, 4.0, 0.2);
}

}  // namespace
}  // namespace etlqg
