#pragma once

// Shared fixtures: the scalar worked example used throughout the unit tests
// (A=B=Q=R=QT=1, Sigma_w=0.5, lambda=0.3, T=2, for which the optimal window
// schedule and all intermediate quantities are known by hand) and the
// double-integrator case-study configuration.

#include "etlqg/model.hpp"

namespace etlqg::test {

inline SystemModel scalar_example_model() {
  SystemModel m;
  m.A = Matrix::Ones(1, 1);
  m.B = Matrix::Ones(1, 1);
  m.Q = Matrix::Ones(1, 1);
  m.QT = Matrix::Ones(1, 1);
  m.R = Matrix::Ones(1, 1);
  m.Sigma_w = 0.5 * Matrix::Ones(1, 1);
  m.lambda = 0.3;
  m.T = 2;
  m.x0_mean = Vector::Zero(1);
  m.x0_cov = Matrix::Ones(1, 1);
  return validate_model(m);
}

// Position-velocity double integrator, sampling period 0.1 s, horizon 25,
// Sigma_w = 0.5 I, lambda = 100. Q = I, R = 1, QT = Q are the documented
// defaults for this configuration.
inline SystemModel double_integrator_model(double lambda = 100.0) {
  const double ts = 0.1;
  SystemModel m;
  m.A = Matrix(2, 2);
  m.A << 1, ts, 0, 1;
  m.B = Matrix(2, 1);
  m.B << ts * ts / 2.0, ts;
  m.Q = Matrix::Identity(2, 2);
  m.QT = m.Q;
  m.R = Matrix::Identity(1, 1);
  m.Sigma_w = 0.5 * Matrix::Identity(2, 2);
  m.lambda = lambda;
  m.T = 25;
  m.x0_mean = Vector::Zero(2);
  m.x0_cov = Matrix::Identity(2, 2);
  return validate_model(m);
}

inline Vector scalar_vec(double v) {
  Vector x(1);
  x << v;
  return x;
}

}  // namespace etlqg::test
